"""Pure-numpy reference implementations of the hot kernels.

Selected at import time by :mod:`subnewton.kernels` when the compiled
extension is unavailable (or when SUBNEWTON_PURE_PYTHON is set).
"""

import numpy as np

BACKEND = "python"


def _sigmoid_deriv(m):
    # exp(-|m|)/(1+exp(-|m|))^2; symmetric in the sign of m, overflow-safe
    e = np.exp(-np.abs(m))
    return e / (1.0 + e) ** 2


def hvp_indexed(X, w, p, idx, lam):
    """Averaged logistic Hessian-vector product over the rows in idx.

    Returns (1/|idx|) sum_i sig'(x_i.w) x_i (x_i.p) + lam*p.
    """
    Xs = X[idx]
    c = _sigmoid_deriv(Xs @ w)
    out = Xs.T @ (c * (Xs @ p))
    out /= len(idx)
    out += lam * p
    return out


def sgi_iterate(X, w, g, lam, alpha, idx, p, limit):
    """Run len(idx) semi-stochastic inner steps on the Newton quadratic.

    Each step uses one component Hessian: p <- p - alpha*(g + H_i p),
    H_i p = sig'(x_i.w) x_i (x_i.p) + lam p.  Updates p in place and
    returns the number of completed steps, negated if ||p|| exceeded
    `limit` (divergence).
    """
    Xs = X[idx]
    c = _sigmoid_deriv(Xs @ w)
    limit_sq = limit * limit
    for t in range(len(idx)):
        x = Xs[t]
        p -= alpha * (g + (c[t] * (x @ p)) * x + lam * p)
        if p @ p > limit_sq:
            return -(t + 1)
    return len(idx)
