"""Load artifact CSV traces and render figure specs to PNG + SVG."""

import collections
import csv
import pathlib
import re

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .figspec import AXIS_LABELS, X_COLUMNS  # noqa: E402

# a fixed salt keeps SVG element ids stable across renders
matplotlib.rcParams["svg.hashsalt"] = "subnewton-plots"

_RUN_NAME = re.compile(r"^(?P<label>.+)_seed(?P<seed>\d+)\.csv$")


class ArtifactError(ValueError):
    pass


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ArtifactError(f"{path}: empty run trace")
    return {col: np.array([float(r[col]) for r in rows])
            for col in rows[0]}


def load_artifacts(artifact_dir):
    """Map run label -> list of per-seed column dicts, sorted by seed."""
    runs_dir = pathlib.Path(artifact_dir) / "runs"
    if not runs_dir.is_dir():
        raise ArtifactError(
            f"{artifact_dir}: no runs/ directory; not an artifact directory")
    by_label = collections.defaultdict(list)
    for path in sorted(runs_dir.glob("*.csv")):
        m = _RUN_NAME.match(path.name)
        if not m:
            continue
        by_label[m.group("label")].append(
            (int(m.group("seed")), _read_csv(path)))
    if not by_label:
        raise ArtifactError(f"{artifact_dir}: no run traces found")
    return {label: [cols for _, cols in sorted(pairs, key=lambda p: p[0])]
            for label, pairs in by_label.items()}


def _mean_curve(seed_runs, x_col, y_col):
    """Mean-over-seeds line, truncated to the shortest seed trace."""
    n = min(len(r[y_col]) for r in seed_runs)
    x = np.mean([r[x_col][:n] for r in seed_runs], axis=0)
    y = np.mean([r[y_col][:n] for r in seed_runs], axis=0)
    return x, y


def render(artifact_dir, specs, output_dir):
    """Render every panel of every spec; returns the written paths.

    All series are resolved before anything is written, so a bad spec
    leaves no partial output.
    """
    runs = load_artifacts(artifact_dir)
    for spec in specs:
        missing = [s for s in spec.series if s not in runs]
        if missing:
            raise ArtifactError(
                f"figure {spec.name!r}: no runs for series {missing}; "
                f"available labels: {sorted(runs)}")

    out = pathlib.Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in specs:
        for i, panel in enumerate(spec.panels):
            fig, ax = plt.subplots(figsize=(5.0, 3.6))
            for label in spec.series:
                x, y = _mean_curve(runs[label], X_COLUMNS[panel.x], panel.y)
                if panel.logy:
                    # a log axis cannot show values at or below zero
                    y = np.maximum(y, 1e-16)
                ax.plot(x, y, label=label, linewidth=1.4)
            if panel.logy:
                ax.set_yscale("log")
            ax.set_xlabel(AXIS_LABELS[panel.x])
            ax.set_ylabel(AXIS_LABELS[panel.y])
            ax.legend(frameon=False, fontsize=8)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            stem = out / f"{spec.name}_panel{i}_{panel.y}_vs_{panel.x}"
            for ext in ("png", "svg"):
                path = stem.with_suffix(f".{ext}")
                fig.savefig(path, metadata={"Date": None} if ext == "svg"
                            else None)
                written.append(path)
            plt.close(fig)
    return written
