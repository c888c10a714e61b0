"""Matrix-free inner solvers for the Newton system: conjugate gradient
and the semi-stochastic gradient inner iteration."""

import dataclasses

import numpy as np

from . import kernels

# refresh the accumulated A*p product from scratch to control drift
_CG_REFRESH_EVERY = 50
# conservative margin so the reported residual test also holds when the
# residual is recomputed from the returned solution
_CG_STOP_MARGIN = 1.0 - 1e-9

SGI_DIVERGENCE_FACTOR = 1e6


class IndefiniteOperatorError(RuntimeError):
    pass


class SGIDivergenceError(RuntimeError):
    def __init__(self, step, norm):
        super().__init__(
            f"SGI iterate norm {norm:.3e} exceeded the divergence guard "
            f"at inner step {step}")
        self.step = step


@dataclasses.dataclass(frozen=True)
class LinearOperator:
    """Symmetric positive definite operator p -> A @ p."""

    apply: callable
    dim: int


@dataclasses.dataclass
class CGReport:
    solution: np.ndarray
    iterations: int
    residual_norms: list
    stop_reason: str  # residual_test | max_iters | exact_dim


def cg_solve(A, b, zeta=0.01, max_iters=10, fixed_iters=None):
    """Conjugate gradient on A p = b from p0 = 0.

    Stops at the first j with ||A p_j - b|| <= zeta*||b||, at
    j = max_iters, or at j = dim.  With fixed_iters set, the residual
    test is disabled and exactly min(fixed_iters, dim) steps run.
    Residual norms are computed as ||b - A p_j|| from the accumulated
    product, refreshed from scratch every few iterations.
    """
    b = np.asarray(b, dtype=np.float64)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ValueError("cg_solve needs a nonzero right-hand side")
    if fixed_iters is None:
        if not 0.0 < zeta < 1.0:
            raise ValueError("zeta must lie in (0, 1)")
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        limit = min(max_iters, A.dim)
    else:
        if fixed_iters < 1:
            raise ValueError("fixed_iters must be >= 1")
        limit = min(fixed_iters, A.dim)

    p = np.zeros(A.dim)
    Ap = np.zeros(A.dim)
    r = b.copy()
    d = r.copy()
    rr = float(r @ r)
    residual_norms = [b_norm]
    threshold = zeta * b_norm * _CG_STOP_MARGIN

    j = 0
    while True:
        if fixed_iters is None and residual_norms[-1] <= threshold:
            return CGReport(p, j, residual_norms, "residual_test")
        if residual_norms[-1] == 0.0:
            # exact solution; continuing would divide by zero curvature
            return CGReport(p, j, residual_norms, "residual_test")
        if j >= limit:
            reason = "exact_dim" if limit == A.dim else "max_iters"
            return CGReport(p, j, residual_norms, reason)
        Ad = A.apply(d)
        dAd = float(d @ Ad)
        if not np.isfinite(dAd) or dAd <= 0.0:
            raise IndefiniteOperatorError(
                f"non-positive curvature {dAd:.3e} at CG iteration {j}")
        alpha = rr / dAd
        p += alpha * d
        Ap += alpha * Ad
        j += 1
        if j % _CG_REFRESH_EVERY == 0:
            Ap = A.apply(p)
        r = b - Ap
        rr_new = float(r @ r)
        if not np.isfinite(rr_new):
            raise IndefiniteOperatorError(
                f"non-finite residual at CG iteration {j}")
        d = r + (rr_new / rr) * d
        rr = rr_new
        residual_norms.append(float(np.sqrt(rr_new)))


def cg_worst_case_bound(kappa, r):
    """Worst-case A-norm contraction of CG after r steps: 2*((sqrt(k)-1)/(sqrt(k)+1))^r."""
    if kappa < 1.0:
        raise ValueError("condition number must be >= 1")
    if r < 0:
        raise ValueError("iteration count must be >= 0")
    theta = (np.sqrt(kappa) - 1.0) / (np.sqrt(kappa) + 1.0)
    return 2.0 * theta ** r


def sgi_iteration_budget(beta, max_cg):
    """Inner-iteration count matching the per-outer-step HVP cost of CG."""
    if beta < 1 or max_cg < 1:
        raise ValueError("beta and max_cg must be >= 1")
    return beta * max_cg


def sgi_solve(obj, w, b, iterations, alpha, rng, counters=None, lam_guard=None):
    """Semi-stochastic gradient iteration on the Newton quadratic model.

    Starting from p0 = 0, each inner step draws one component index i and
    applies p <- p - alpha*(-b + H_i(w) p); with alpha = 1 this is the
    plain semi-stochastic iteration.  `b` is the negated full gradient,
    so the returned p approximates the Newton step.  Counts one HVP
    component per completed step.  Raises SGIDivergenceError when ||p||
    exceeds 1e6*||b||/lam.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    b = np.ascontiguousarray(b, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    lam = obj.lam if lam_guard is None else lam_guard
    if lam <= 0.0:
        raise ValueError("divergence guard needs a positive regularizer")
    limit = SGI_DIVERGENCE_FACTOR * float(np.linalg.norm(b)) / lam
    idx = rng.integers(0, obj.n, size=iterations, dtype=np.int64)
    p = np.zeros(obj.dim)
    g = -b
    done = kernels.sgi_iterate(obj.data.features, w, g, obj.lam, alpha,
                               idx, p, limit)
    if counters is not None:
        counters.hvp_components += abs(done)
    if done < 0:
        raise SGIDivergenceError(-done, float(np.linalg.norm(p)))
    return p
