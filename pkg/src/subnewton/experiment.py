"""Configuration-driven experiment runner: validates a JSON config, runs
every (method, seed) pair against a cached reference minimizer, and emits
per-run CSV traces plus a summary and a replayable manifest."""

import concurrent.futures
import csv
import dataclasses
import json
import os
import pathlib

import numpy as np

from . import analysis, dataset as ds_mod, optimize, sampling
from .objective import LogisticObjective

CSV_COLUMNS = ["k", "train_error", "test_error", "dist_to_opt",
               "grad_component_evals", "hvp_component_evals",
               "func_component_evals", "effective_grad_evals", "wall_time"]

WORKERS_ENV = "SUBNEWTON_WORKERS"


class ConfigError(ValueError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclasses.dataclass
class ExperimentConfig:
    dataset: dict
    methods: list
    seeds: list
    budget: dict
    output_dir: str = "artifacts"
    lam: float = None  # None -> 1/N_train
    split: dict = dataclasses.field(
        default_factory=lambda: {"ratio": 0.7, "seed": 0})
    scale_for_sgi: bool = False
    constants: dict = dataclasses.field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)


_TOP_KEYS = {"dataset", "methods", "seeds", "budget", "output_dir",
             "lambda", "split", "scale_for_sgi", "constants"}
_METHOD_KEYS = {"label", "method", "grad_schedule", "hess_schedule", "cg",
                "sgi", "step_mode", "fixed_step", "line_search"}
_SCHEDULE_KEYS = {"kind", "beta", "x0", "eta", "replacement"}


def _check_schedule(spec, where, errors):
    if spec is None:
        return
    if not isinstance(spec, dict):
        errors.append(f"{where}: schedule must be an object")
        return
    for key in set(spec) - _SCHEDULE_KEYS:
        errors.append(f"{where}: unknown schedule key {key!r}")
    kind = spec.get("kind")
    if kind not in sampling.KINDS:
        errors.append(f"{where}: unknown schedule kind {kind!r}")
        return
    if kind == "constant" and not spec.get("beta"):
        errors.append(f"{where}: constant schedule needs beta")
    if kind == "geometric" and not spec.get("eta", 2.0) > 1.0:
        errors.append(f"{where}: geometric schedule needs eta > 1")


def _check_method(m, i, errors):
    if not isinstance(m, dict):
        errors.append(f"methods[{i}]: must be an object")
        return
    label = m.get("label") or m.get("method") or f"methods[{i}]"
    for key in set(m) - _METHOD_KEYS:
        errors.append(f"{label}: unknown key {key!r}")
    name = m.get("method")
    if name not in optimize.METHODS:
        errors.append(f"{label}: unknown method {name!r}")
        return
    _check_schedule(m.get("grad_schedule"), f"{label}.grad_schedule", errors)
    _check_schedule(m.get("hess_schedule"), f"{label}.hess_schedule", errors)
    if name == "NewtonCG":
        cg = m.get("cg")
        if not isinstance(cg, dict):
            errors.append(f"{label}: NewtonCG requires a cg block")
        else:
            zeta = cg.get("zeta", 0.01)
            if cg.get("fixed_r") is None and not 0.0 < zeta < 1.0:
                errors.append(f"{label}: zeta must lie in (0, 1)")
    if name == "NewtonSGI":
        sgi = m.get("sgi")
        if not isinstance(sgi, dict):
            errors.append(f"{label}: NewtonSGI requires an sgi block")
        elif sgi.get("iterations") is None and (
                sgi.get("beta") is None or sgi.get("max_cg") is None):
            errors.append(
                f"{label}: sgi needs iterations or (beta, max_cg)")
    if m.get("step_mode", "armijo") not in ("armijo", "unit", "fixed"):
        errors.append(f"{label}: unknown step_mode {m.get('step_mode')!r}")
    if m.get("step_mode") == "fixed" and m.get("fixed_step") is None:
        errors.append(f"{label}: fixed step mode needs fixed_step")


def validate_config(raw):
    """Parse and validate config text; collects every error, not the first."""
    errors = []
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["config root must be an object"])
    for key in set(data) - _TOP_KEYS:
        errors.append(f"unknown top-level key {key!r}")

    dataset_spec = data.get("dataset")
    if not isinstance(dataset_spec, dict) or not (
            "synthetic" in dataset_spec or "path" in dataset_spec):
        errors.append("dataset must specify either synthetic params or a path")

    methods = data.get("methods")
    if not isinstance(methods, list) or not methods:
        errors.append("need at least one method")
        methods = []
    labels = [m.get("label") or m.get("method") for m in methods
              if isinstance(m, dict)]
    if len(labels) != len(set(labels)):
        errors.append("method labels must be unique")
    for i, m in enumerate(methods):
        _check_method(m, i, errors)

    seeds = data.get("seeds")
    if not isinstance(seeds, list) or not seeds:
        errors.append("need at least one seed")
        seeds = []
    elif not all(isinstance(s, int) for s in seeds):
        errors.append("seeds must be integers")

    budget = data.get("budget")
    if not isinstance(budget, dict) or not budget.get("max_iters"):
        errors.append("budget needs max_iters")
        budget = {"max_iters": 1}

    lam = data.get("lambda")
    if lam is not None and not (isinstance(lam, (int, float)) and lam > 0):
        errors.append("lambda must be positive when given")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        dataset=dataset_spec, methods=methods, seeds=seeds, budget=budget,
        output_dir=data.get("output_dir", "artifacts"), lam=lam,
        split=data.get("split", {"ratio": 0.7, "seed": 0}),
        scale_for_sgi=bool(data.get("scale_for_sgi", False)),
        constants=data.get("constants", {}))


def _build_schedule(spec, cap):
    if spec is None:
        return None
    return sampling.SampleSchedule(
        kind=spec["kind"], cap=cap, beta=spec.get("beta", 0),
        x0=spec.get("x0", 1.0), eta=spec.get("eta", 2.0),
        replacement=spec.get("replacement", False))


def build_method_config(m, n_train):
    cg = optimize.CGConfig(**m["cg"]) if m.get("cg") else None
    sgi = optimize.SGIConfig(**m["sgi"]) if m.get("sgi") else None
    ls = optimize.LineSearchParams(**m.get("line_search", {}))
    return optimize.MethodConfig(
        method=m["method"], label=m.get("label", ""),
        grad_schedule=_build_schedule(m.get("grad_schedule"), n_train),
        hess_schedule=_build_schedule(m.get("hess_schedule"), n_train),
        cg=cg, sgi=sgi, step_mode=m.get("step_mode", "armijo"),
        fixed_step=m.get("fixed_step"), line_search=ls)


def load_dataset(spec):
    if "synthetic" in spec:
        p = spec["synthetic"]
        return ds_mod.synthesize(p["n"], p["d"], seed=p.get("seed", 0))
    fmt = spec.get("format", "libsvm")
    if fmt == "libsvm":
        return ds_mod.load_libsvm(spec["path"])
    if fmt == "csv":
        return ds_mod.load_csv(spec["path"])
    raise ConfigError([f"unknown dataset format {fmt!r}"])


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_run_csv(path, record):
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for e in record.entries:
            writer.writerow([_format_cell(getattr(e, col))
                             for col in CSV_COLUMNS])
    os.replace(tmp, path)


def read_run_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [{k: (int(v) if k.endswith("_evals") and "effective" not in k
                     or k == "k" else float(v))
                 for k, v in row.items()} for row in reader]
    return rows


def _one_run(obj, cfg, budget, seed, ref_value, w_star, test_obj):
    w0 = np.zeros(obj.dim)
    return optimize.run(obj, w0, cfg, budget, seed, ref_value=ref_value,
                        w_star=w_star, test_obj=test_obj)


def run_experiment(cfg, output_dir=None):
    """Execute the whole experiment; returns (artifact_dir, failures, total)."""
    out = pathlib.Path(output_dir or cfg.output_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)

    source = load_dataset(cfg.dataset)
    scale = 1.0
    lam_for_scale = cfg.lam if cfg.lam is not None else 1.0 / source.n
    if cfg.scale_for_sgi:
        source, scale = ds_mod.rescale_for_sgi(source, lam_for_scale)
    split = ds_mod.split(source, ratio=cfg.split.get("ratio", 0.7),
                         seed=cfg.split.get("seed", 0))
    lam = cfg.lam if cfg.lam is not None else 1.0 / split.train.n
    obj = LogisticObjective(split.train, lam)
    test_obj = LogisticObjective(split.test, lam)

    w_star = optimize.reference_minimizer(obj)
    ref_value = obj.value(w_star)

    budget = optimize.Budget(
        max_iters=cfg.budget["max_iters"],
        max_effective_grads=cfg.budget.get("max_effective_grads"),
        target_train_error=cfg.budget.get("target_train_error"))

    tc_report = _constants_report(cfg, obj, w_star)
    with open(out / "theory_constants.json", "w") as fh:
        json.dump(tc_report, fh, indent=2, sort_keys=True)

    jobs = [(build_method_config(m, obj.n), seed)
            for m in cfg.methods for seed in cfg.seeds]
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    results = {}
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            futs = {pool.submit(_one_run, obj, mc, budget, seed, ref_value,
                                w_star, test_obj): (mc.label, seed)
                    for mc, seed in jobs}
            for fut in concurrent.futures.as_completed(futs):
                results[futs[fut]] = fut.result()
    else:
        for mc, seed in jobs:
            results[(mc.label, seed)] = _one_run(
                obj, mc, budget, seed, ref_value, w_star, test_obj)

    failures = []
    summary_runs = []
    for (label, seed), rec in sorted(results.items()):
        write_run_csv(out / "runs" / f"{label}_seed{seed}.csv", rec)
        ok = rec.status in ("max_iters", "target_reached", "budget_exhausted")
        if not ok:
            failures.append({"label": label, "seed": seed,
                             "status": rec.status,
                             "detail": rec.status_detail})
        summary_runs.append({
            "label": label, "seed": seed, "status": rec.status,
            "iterations": rec.entries[-1].k,
            "final_train_error": rec.entries[-1].train_error,
            "final_test_error": rec.entries[-1].test_error,
        })

    rate_fits = {}
    for m in cfg.methods:
        label = m.get("label") or m["method"]
        recs = [results[(label, s)] for s in cfg.seeds
                if (label, s) in results]
        if not recs:
            continue
        n_common = min(len(r.entries) for r in recs)
        mean_gap = np.mean(
            [[e.train_error for e in r.entries[:n_common]] for r in recs],
            axis=0)
        try:
            fit = analysis.fit_rate(mean_gap)
            rate_fits[label] = {"rate": fit.rate,
                                "superlinear": fit.superlinear,
                                "ratios": fit.ratios.tolist()}
        except ValueError as exc:
            rate_fits[label] = {"error": str(exc)}

    summary = {"runs": summary_runs, "rate_fits": rate_fits,
               "theory_constants": tc_report,
               "dataset": {"name": source.name, "n": source.n,
                           "d": source.dim, "n_train": split.train.n,
                           "scale": scale},
               "lambda": lam}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)

    manifest = {"config": cfg.to_dict(), "failures": failures}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return out, len(failures), len(jobs)


def _constants_report(cfg, obj, w_star):
    beta = cfg.constants.get("beta", max(1, round(0.05 * obj.n)))
    tc = analysis.build_constants(
        obj, w_star, np.zeros(obj.dim), beta,
        trials=cfg.constants.get("trials", 5),
        seed=cfg.constants.get("seed", 0),
        gamma=cfg.constants.get("gamma", 2.0))
    lq = analysis.compute_lq_constants(tc)
    beta_star, clamped = analysis.required_hessian_sample(tc, obj.n)
    return {
        "constants": tc.to_dict(),
        "lq_constants": dataclasses.asdict(lq),
        "required_hessian_sample": beta_star,
        "required_hessian_sample_clamped": clamped,
        "required_cg_iters": analysis.required_cg_iters(tc, obj.dim),
        "zeta_bound": analysis.zeta_bound(tc),
        "disclaimer": "derived from empirical estimates, not certified",
    }


def replay(manifest_path, output_dir):
    """Re-run the experiment recorded in a manifest into a fresh directory."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    cfg = ExperimentConfig(**manifest["config"])
    return run_experiment(cfg, output_dir=output_dir)
