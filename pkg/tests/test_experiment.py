import json
import os

import numpy as np
import pytest

from subnewton import cli, experiment
from subnewton.experiment import (CSV_COLUMNS, ConfigError, read_run_csv,
                                  run_experiment, validate_config,
                                  write_run_csv)

MINIMAL = {
    "dataset": {"synthetic": {"n": 120, "d": 4, "seed": 3}},
    "methods": [{"method": "GD"}],
    "seeds": [0],
    "budget": {"max_iters": 3},
}


def as_json(overrides=None, **top):
    data = {**MINIMAL, **(overrides or {}), **top}
    return json.dumps(data)


def test_validate_minimal_defaults():
    cfg = validate_config(as_json())
    assert cfg.lam is None
    assert cfg.split == {"ratio": 0.7, "seed": 0}
    assert not cfg.scale_for_sgi
    assert cfg.output_dir == "artifacts"


def test_validate_rejects_bad_json():
    with pytest.raises(ConfigError, match="valid JSON"):
        validate_config("{nope")
    with pytest.raises(ConfigError):
        validate_config("[1, 2]")


def test_validate_collects_all_errors():
    bad = {
        "dataset": {},
        "methods": [
            {"method": "NewtonCG"},                       # missing cg block
            {"method": "Mystery"},                        # unknown method
            {"method": "GD", "step_mode": "fixed"},       # missing fixed_step
        ],
        "seeds": ["a"],
        "budget": {},
        "extra_key": 1,
    }
    with pytest.raises(ConfigError) as exc_info:
        validate_config(json.dumps(bad))
    msgs = exc_info.value.errors
    assert len(msgs) >= 6
    joined = "; ".join(msgs)
    assert "NewtonCG requires a cg block" in joined
    assert "unknown method 'Mystery'" in joined
    assert "fixed_step" in joined
    assert "seeds must be integers" in joined
    assert "budget needs max_iters" in joined
    assert "unknown top-level key" in joined
    assert "dataset must specify" in joined


def test_validate_zeta_range():
    methods = [{"method": "NewtonCG", "cg": {"zeta": 1.5}}]
    with pytest.raises(ConfigError, match="zeta"):
        validate_config(as_json(methods=methods))


def test_validate_sgi_budget_keys():
    methods = [{"method": "NewtonSGI", "sgi": {"beta": 50}}]
    with pytest.raises(ConfigError, match="iterations or"):
        validate_config(as_json(methods=methods))


def test_validate_unique_labels():
    methods = [{"method": "GD"}, {"method": "GD"}]
    with pytest.raises(ConfigError, match="unique"):
        validate_config(as_json(methods=methods))
    methods = [{"method": "GD", "label": "a"}, {"method": "GD", "label": "b"}]
    validate_config(as_json(methods=methods))


def test_validate_schedule_spec():
    methods = [{"method": "SubsampledNewton",
                "hess_schedule": {"kind": "warp"}}]
    with pytest.raises(ConfigError, match="schedule kind"):
        validate_config(as_json(methods=methods))
    methods = [{"method": "SubsampledNewton",
                "hess_schedule": {"kind": "constant", "beta": 5,
                                  "typo": True}}]
    with pytest.raises(ConfigError, match="unknown schedule key"):
        validate_config(as_json(methods=methods))


def test_csv_roundtrip_is_lossless(tmp_path):
    from subnewton.optimize import IterationEntry, RunRecord
    entries = [IterationEntry(k=i, train_error=np.pi * 10.0 ** -i,
                              test_error=0.1 + i, dist_to_opt=1.0 / (i + 1),
                              grad_component_evals=100 * i,
                              hvp_component_evals=7 * i,
                              func_component_evals=3 * i,
                              effective_grad_evals=1.37 * i,
                              wall_time=0.25 * i)
               for i in range(4)]
    rec = RunRecord(label="x", method="GD", seed=0, n_train=100,
                    entries=entries, status="max_iters")
    path = tmp_path / "x.csv"
    write_run_csv(path, rec)
    rows = read_run_csv(path)
    assert [r["train_error"] for r in rows] == \
        [e.train_error for e in entries]
    assert [r["effective_grad_evals"] for r in rows] == \
        [e.effective_grad_evals for e in entries]
    assert [r["grad_component_evals"] for r in rows] == [0, 100, 200, 300]
    assert all(isinstance(r["k"], int) for r in rows)


def experiment_config(tmp_path, **top):
    raw = as_json(
        methods=[
            {"method": "GD", "label": "gd"},
            {"method": "NewtonCG", "label": "ncg",
             "hess_schedule": {"kind": "constant", "beta": 20},
             "cg": {"zeta": 0.01, "max_cg": 10}},
        ],
        seeds=[0, 1],
        budget={"max_iters": 5},
        output_dir=str(tmp_path / "arts"),
        **top,
    )
    return validate_config(raw)


def test_run_experiment_artifacts(tmp_path):
    cfg = experiment_config(tmp_path)
    out, failures, total = run_experiment(cfg)
    assert failures == 0 and total == 4
    for label in ("gd", "ncg"):
        for seed in (0, 1):
            path = out / "runs" / f"{label}_seed{seed}.csv"
            assert path.exists()
            rows = read_run_csv(path)
            assert len(rows) == 6
            assert list(rows[0]) == CSV_COLUMNS
    summary = json.loads((out / "summary.json").read_text())
    assert {r["label"] for r in summary["runs"]} == {"gd", "ncg"}
    assert summary["dataset"]["n_train"] == 84
    assert summary["lambda"] == pytest.approx(1.0 / 84)
    assert "gd" in summary["rate_fits"]
    tc = json.loads((out / "theory_constants.json").read_text())
    assert "zeta_bound" in tc and tc["constants"]["estimated"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["failures"] == []
    assert manifest["config"]["seeds"] == [0, 1]


def test_run_experiment_seed_determinism(tmp_path):
    cfg = experiment_config(tmp_path)
    out1, _, _ = run_experiment(cfg, output_dir=tmp_path / "a")
    out2, _, _ = run_experiment(cfg, output_dir=tmp_path / "b")
    for name in ("ncg_seed0.csv", "gd_seed1.csv"):
        r1 = read_run_csv(out1 / "runs" / name)
        r2 = read_run_csv(out2 / "runs" / name)
        for a, b in zip(r1, r2):
            a.pop("wall_time"), b.pop("wall_time")
            assert a == b


def test_replay_reproduces_runs(tmp_path):
    cfg = experiment_config(tmp_path)
    out, _, _ = run_experiment(cfg)
    rout, failures, total = experiment.replay(out / "manifest.json",
                                              tmp_path / "replayed")
    assert failures == 0 and total == 4
    for path in sorted((out / "runs").iterdir()):
        orig = read_run_csv(path)
        rep = read_run_csv(rout / "runs" / path.name)
        for a, b in zip(orig, rep):
            a.pop("wall_time"), b.pop("wall_time")
            assert a == b


def test_run_experiment_parallel_matches_serial(tmp_path):
    cfg = experiment_config(tmp_path)
    out_s, _, _ = run_experiment(cfg, output_dir=tmp_path / "serial")
    os.environ[experiment.WORKERS_ENV] = "3"
    try:
        out_p, _, _ = run_experiment(cfg, output_dir=tmp_path / "par")
    finally:
        del os.environ[experiment.WORKERS_ENV]
    for path in sorted((out_s / "runs").iterdir()):
        a = read_run_csv(path)
        b = read_run_csv(out_p / "runs" / path.name)
        for ra, rb in zip(a, b):
            ra.pop("wall_time"), rb.pop("wall_time")
            assert ra == rb


def test_run_experiment_records_failures(tmp_path):
    # unscaled data with a huge feature makes the SGI inner loop blow up
    raw = as_json(
        dataset={"synthetic": {"n": 100, "d": 4, "seed": 3}},
        methods=[{"method": "NewtonSGI", "label": "sgi",
                  "sgi": {"iterations": 4000, "alpha": 8.0}}],
        seeds=[0],
        budget={"max_iters": 5},
        output_dir=str(tmp_path / "fail"),
    )
    out, failures, total = run_experiment(validate_config(raw))
    assert total == 1
    if failures:  # divergence depends on the draw; when it fires, check trace
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["failures"][0]["status"] == "sgi_divergence"


def write_config(tmp_path, raw):
    path = tmp_path / "cfg.json"
    path.write_text(raw)
    return str(path)


def test_cli_validate_ok_and_error(tmp_path, capsys):
    good = write_config(tmp_path, as_json())
    assert cli.main(["validate", good]) == cli.EXIT_OK
    assert "config ok" in capsys.readouterr().out
    bad = write_config(tmp_path, as_json(methods=[{"method": "Huh"}]))
    assert cli.main(["validate", bad]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_run_and_replay(tmp_path, capsys):
    path = write_config(
        tmp_path, as_json(output_dir=str(tmp_path / "out")))
    assert cli.main(["run", path]) == cli.EXIT_OK
    assert (tmp_path / "out" / "summary.json").exists()
    capsys.readouterr()
    assert cli.main(["replay", str(tmp_path / "out" / "manifest.json"),
                     "-o", str(tmp_path / "out2")]) == cli.EXIT_OK
    assert (tmp_path / "out2" / "summary.json").exists()


def test_cli_run_bad_config_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, "{broken")
    assert cli.main(["run", path]) == cli.EXIT_CONFIG
    capsys.readouterr()


def test_cli_constants_report(tmp_path, capsys):
    path = write_config(tmp_path, as_json())
    assert cli.main(["constants", path]) == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["required_cg_iters"] >= 1
    assert 0.0 < report["zeta_bound"] < 1.0
    assert "not certified" in report["disclaimer"]
