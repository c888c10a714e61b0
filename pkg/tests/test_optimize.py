import numpy as np
import pytest

from subnewton import (Counters, Dataset, LogisticObjective, rescale_for_sgi,
                       synthesize)
from subnewton.optimize import (Budget, CGConfig, LineSearchError,
                                LineSearchParams, MethodConfig, SGIConfig,
                                armijo_search, reference_minimizer, run)
from subnewton.sampling import SampleSchedule


class QuadraticStub:
    """Minimal objective protocol: f(w) = 0.5 w'Aw - b'w."""

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.dim = len(b)

    def value(self, w, counters=None, regularized=True):
        if counters is not None:
            counters.func_components += 1
        return float(0.5 * w @ (self.A @ w) - self.b @ w)

    def gradient(self, w, counters=None):
        return self.A @ w - self.b


def test_armijo_accepts_unit_step_on_well_scaled_quadratic():
    obj = QuadraticStub(np.eye(2), np.zeros(2))
    w = np.array([1.0, -2.0])
    g = obj.gradient(w)
    alpha, trials = armijo_search(obj, w, -g, g, LineSearchParams())
    assert alpha == 1.0 and trials == 1


def test_armijo_backtracks_on_steep_quadratic():
    # f = 0.5 c w^2 with c = 16: steepest descent from w = 1 rejects
    # alpha = 1, 1/2, 1/4, 1/8 (the last lands back at |w| = 1) and
    # accepts alpha = 1/16, which jumps exactly to the minimizer
    obj = QuadraticStub(np.array([[16.0]]), np.zeros(1))
    w = np.array([1.0])
    g = obj.gradient(w)
    alpha, trials = armijo_search(obj, w, -g, g, LineSearchParams())
    assert alpha == 0.0625 and trials == 5


def test_armijo_counts_every_trial():
    obj = QuadraticStub(np.array([[16.0]]), np.zeros(1))
    w = np.array([1.0])
    g = obj.gradient(w)
    c = Counters()
    armijo_search(obj, w, -g, g, LineSearchParams(), counters=c, f_w=obj.value(w))
    assert c.func_components == 5


def test_armijo_rejects_ascent_direction():
    obj = QuadraticStub(np.eye(2), np.zeros(2))
    w = np.array([1.0, 0.0])
    g = obj.gradient(w)
    with pytest.raises(LineSearchError):
        armijo_search(obj, w, g, g, LineSearchParams())


def test_armijo_exhaustion():
    obj = QuadraticStub(np.array([[1e9]]), np.zeros(1))
    w = np.array([1.0])
    g = obj.gradient(w)
    with pytest.raises(LineSearchError, match="backtracks"):
        armijo_search(obj, w, -g, g, LineSearchParams(max_backtracks=3))


def test_line_search_params_validation():
    with pytest.raises(ValueError):
        LineSearchParams(c1=1.0)
    with pytest.raises(ValueError):
        LineSearchParams(backtrack=0.0)
    with pytest.raises(ValueError):
        LineSearchParams(alpha0=-1.0)


def test_method_config_validation():
    with pytest.raises(ValueError):
        MethodConfig(method="Quasi")
    with pytest.raises(ValueError):
        MethodConfig(method="NewtonCG")
    with pytest.raises(ValueError):
        MethodConfig(method="NewtonSGI")
    with pytest.raises(ValueError):
        MethodConfig(method="GD", step_mode="fixed")
    cfg = MethodConfig(method="GD")
    assert cfg.label == "GD"
    with pytest.raises(ValueError):
        Budget(max_iters=0)


def test_sgi_config_budget_resolution():
    assert SGIConfig(iterations=77).resolved_iterations() == 77
    assert SGIConfig(beta=350, max_cg=10).resolved_iterations() == 3500
    with pytest.raises(ValueError):
        SGIConfig().resolved_iterations()


@pytest.fixture(scope="module")
def toy():
    ds = synthesize(300, 6, seed=21)
    obj = LogisticObjective(ds, lam=0.01)
    w_star = reference_minimizer(obj)
    return obj, w_star, obj.value(w_star)


def test_gd_monotone_decrease(toy):
    obj, w_star, f_star = toy
    rec = run(obj, np.zeros(obj.dim), MethodConfig(method="GD"),
              Budget(max_iters=25), seed=0, ref_value=f_star, w_star=w_star)
    err = rec.series("train_error")
    assert np.all(np.diff(err) < 0)
    assert rec.status == "max_iters"
    assert len(rec.entries) == 26


def test_newton_reaches_target_fast(toy):
    obj, w_star, f_star = toy
    rec = run(obj, np.zeros(obj.dim), MethodConfig(method="Newton"),
              Budget(max_iters=50, target_train_error=1e-10),
              seed=0, ref_value=f_star, w_star=w_star)
    assert rec.status == "target_reached"
    assert rec.entries[-1].k <= 10
    assert rec.series("dist_to_opt")[-1] <= 1e-4


def test_newton_cg_tight_matches_exact_newton(toy):
    obj, w_star, f_star = toy
    budget = Budget(max_iters=6)
    exact = run(obj, np.zeros(obj.dim), MethodConfig(method="Newton"),
                budget, seed=0, ref_value=f_star, record_iterates=True)
    cg = run(obj, np.zeros(obj.dim),
             MethodConfig(method="NewtonCG",
                          cg=CGConfig(zeta=1e-12, max_cg=obj.dim)),
             budget, seed=0, ref_value=f_star, record_iterates=True)
    for we, wc in zip(exact.iterates, cg.iterates):
        assert np.linalg.norm(we - wc) <= 1e-8 * max(1.0, np.linalg.norm(we))


def test_subsampled_newton_full_samples_match_newton(toy):
    obj, w_star, f_star = toy
    budget = Budget(max_iters=5)
    exact = run(obj, np.zeros(obj.dim), MethodConfig(method="Newton"),
                budget, seed=0, ref_value=f_star, record_iterates=True)
    sub = run(obj, np.zeros(obj.dim),
              MethodConfig(method="SubsampledNewton"),
              budget, seed=0, ref_value=f_star, record_iterates=True)
    for we, ws in zip(exact.iterates, sub.iterates):
        assert np.linalg.norm(we - ws) <= 1e-8 * max(1.0, np.linalg.norm(we))


def test_newton_sgi_converges_on_scaled_data():
    ds, _ = rescale_for_sgi(synthesize(400, 5, seed=8), 0.01)
    obj = LogisticObjective(ds, lam=0.01)
    w_star = reference_minimizer(obj)
    f_star = obj.value(w_star)
    rec = run(obj, np.zeros(5),
              MethodConfig(method="NewtonSGI",
                           sgi=SGIConfig(iterations=2000)),
              Budget(max_iters=15), seed=3, ref_value=f_star, w_star=w_star)
    err = rec.series("train_error")
    assert err[-1] < 1e-4 * err[0]


def test_run_determinism(toy):
    obj, w_star, f_star = toy
    sched = SampleSchedule(kind="constant", cap=obj.n, beta=40)
    cfg = MethodConfig(method="NewtonCG", hess_schedule=sched,
                       cg=CGConfig(zeta=0.01, max_cg=10))
    budget = Budget(max_iters=8)
    a = run(obj, np.zeros(obj.dim), cfg, budget, seed=17, ref_value=f_star)
    b = run(obj, np.zeros(obj.dim), cfg, budget, seed=17, ref_value=f_star)
    assert a.series("train_error").tobytes() == b.series("train_error").tobytes()
    assert a.series("hvp_component_evals").tobytes() == \
        b.series("hvp_component_evals").tobytes()
    c = run(obj, np.zeros(obj.dim), cfg, budget, seed=18, ref_value=f_star)
    assert a.series("train_error").tobytes() != c.series("train_error").tobytes()


def test_counters_exact_for_fixed_step_gd(toy):
    obj, _, f_star = toy
    rec = run(obj, np.zeros(obj.dim),
              MethodConfig(method="GD", step_mode="fixed", fixed_step=0.5),
              Budget(max_iters=7), seed=0, ref_value=f_star)
    grads = rec.series("grad_component_evals")
    assert grads.tolist() == [obj.n * k for k in range(8)]
    assert rec.series("func_component_evals").tolist() == [0] * 8
    assert rec.series("effective_grad_evals").tolist() == list(range(8))


def test_counters_exact_for_cg_budget(toy):
    obj, _, f_star = toy
    sched = SampleSchedule(kind="constant", cap=obj.n, beta=30)
    rec = run(obj, np.zeros(obj.dim),
              MethodConfig(method="NewtonCG", hess_schedule=sched,
                           cg=CGConfig(fixed_r=4), step_mode="unit"),
              Budget(max_iters=5), seed=0, ref_value=f_star)
    hvps = rec.series("hvp_component_evals")
    # fixed_r CG applies the operator once per inner step on 30 samples
    assert hvps.tolist() == [30 * 4 * k for k in range(6)]


def test_metric_evaluations_not_counted(toy):
    obj, w_star, f_star = toy
    base = run(obj, np.zeros(obj.dim),
               MethodConfig(method="GD", step_mode="fixed", fixed_step=0.5),
               Budget(max_iters=4), seed=0)
    with_metrics = run(obj, np.zeros(obj.dim),
                       MethodConfig(method="GD", step_mode="fixed",
                                    fixed_step=0.5),
                       Budget(max_iters=4), seed=0, ref_value=f_star,
                       w_star=w_star, test_obj=obj)
    assert base.series("effective_grad_evals").tolist() == \
        with_metrics.series("effective_grad_evals").tolist()


def test_budget_effective_grads_stop(toy):
    obj, _, f_star = toy
    rec = run(obj, np.zeros(obj.dim), MethodConfig(method="GD"),
              Budget(max_iters=1000, max_effective_grads=10.0),
              seed=0, ref_value=f_star)
    assert rec.status == "budget_exhausted"
    assert rec.entries[-1].effective_grad_evals >= 10.0
    assert rec.entries[-2].effective_grad_evals < 10.0


def test_non_finite_start_rejected(toy):
    obj, _, _ = toy
    with pytest.raises(ValueError):
        run(obj, np.full(obj.dim, np.inf), MethodConfig(method="GD"),
            Budget(max_iters=2), seed=0)


def test_sgi_divergence_status():
    rng = np.random.default_rng(5)
    X = 8.0 * rng.standard_normal((60, 4))
    ds = Dataset(X, np.where(rng.random(60) < 0.5, 1.0, -1.0))
    obj = LogisticObjective(ds, lam=1e-4)
    rec = run(obj, np.zeros(4),
              MethodConfig(method="NewtonSGI",
                           sgi=SGIConfig(iterations=5000)),
              Budget(max_iters=5), seed=0)
    assert rec.status == "sgi_divergence"


def test_reference_minimizer_gradient_norm(toy):
    obj, w_star, _ = toy
    assert np.linalg.norm(obj.gradient(w_star)) <= 1e-12


def test_reference_minimizer_cache_hit(toy):
    obj, w_star, _ = toy
    again = reference_minimizer(obj)
    assert np.array_equal(again, w_star)
    again[0] = 99.0  # returned copy must not poison the cache
    assert reference_minimizer(obj)[0] == w_star[0]


def test_reference_minimizer_requires_regularization():
    ds = synthesize(20, 2, seed=0)
    obj = LogisticObjective(ds, lam=0.0)
    with pytest.raises(ValueError):
        reference_minimizer(obj)
