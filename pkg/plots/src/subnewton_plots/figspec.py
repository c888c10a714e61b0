"""Figure specification: which run labels to overlay on which axes."""

import dataclasses
import json

X_AXES = ("iterations", "effective_grad_evals", "wall_time")
Y_AXES = ("train_error", "test_error")

X_COLUMNS = {"iterations": "k",
             "effective_grad_evals": "effective_grad_evals",
             "wall_time": "wall_time"}

AXIS_LABELS = {"iterations": "iterations",
               "effective_grad_evals": "effective gradient evaluations",
               "wall_time": "wall time (s)",
               "train_error": "training error",
               "test_error": "testing error"}


class SpecError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class Panel:
    x: str
    y: str
    logy: bool

    def __post_init__(self):
        if self.x not in X_AXES:
            raise SpecError(f"unknown x-axis {self.x!r}; choose from {X_AXES}")
        if self.y not in Y_AXES:
            raise SpecError(f"unknown y-axis {self.y!r}; choose from {Y_AXES}")


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    name: str
    panels: tuple
    series: tuple  # run labels to overlay

    def __post_init__(self):
        if not self.name:
            raise SpecError("figure needs a name")
        if not self.panels:
            raise SpecError(f"figure {self.name!r} needs at least one panel")
        if not self.series:
            raise SpecError(f"figure {self.name!r} needs at least one series")


def _parse_panel(raw, where):
    if not isinstance(raw, dict):
        raise SpecError(f"{where}: panel must be an object")
    unknown = set(raw) - {"x", "y", "logy"}
    if unknown:
        raise SpecError(f"{where}: unknown panel keys {sorted(unknown)}")
    y = raw.get("y", "train_error")
    # training error spans orders of magnitude; log scale by default
    logy = raw.get("logy", y == "train_error")
    return Panel(x=raw.get("x", "iterations"), y=y, logy=bool(logy))


def load_figure_specs(path):
    """Parse a figure-spec JSON file into a list of FigureSpec."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"figure spec is not valid JSON: {exc}") from None
    figures = data.get("figures") if isinstance(data, dict) else None
    if not isinstance(figures, list) or not figures:
        raise SpecError('figure spec needs a non-empty "figures" list')
    specs = []
    for i, fig in enumerate(figures):
        if not isinstance(fig, dict):
            raise SpecError(f"figures[{i}] must be an object")
        name = fig.get("name", f"figure{i}")
        panels = tuple(_parse_panel(p, f"{name}.panels[{j}]")
                       for j, p in enumerate(fig.get("panels", [])))
        specs.append(FigureSpec(name=name, panels=panels,
                                series=tuple(fig.get("series", []))))
    return specs
