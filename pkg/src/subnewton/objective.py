"""l2-regularized logistic loss: value, (subsampled) gradient, dense
Hessian, and matrix-free Hessian-vector products with exact cost counters.
"""

import dataclasses

import numpy as np

from . import kernels

DENSE_HESSIAN_GUARD = 5000


@dataclasses.dataclass
class Counters:
    """Exact component-evaluation counts for one optimizer run."""

    grad_components: int = 0
    hvp_components: int = 0
    func_components: int = 0

    def effective_grad_evals(self, n_train):
        return (self.grad_components + self.hvp_components
                + self.func_components) / n_train

    def copy(self):
        return Counters(self.grad_components, self.hvp_components,
                        self.func_components)


@dataclasses.dataclass(frozen=True)
class IndexSet:
    """Indices into the training pool, with the sampling mode recorded."""

    indices: np.ndarray
    replacement: bool = False

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)


def _check_indices(idx, n):
    if idx is None:
        return np.arange(n, dtype=np.int64)
    ind = idx.indices if isinstance(idx, IndexSet) else np.asarray(idx, dtype=np.int64)
    if len(ind) == 0:
        raise ValueError("empty index set")
    if ind.min() < 0 or ind.max() >= n:
        raise ValueError("index out of range")
    return np.ascontiguousarray(ind)


class LogisticObjective:
    """R(w) = (1/N) sum log(1+exp(-y_i w.x_i)) + (lam/2)||w||^2."""

    def __init__(self, data, lam):
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        self.data = data
        self.lam = float(lam)
        self.n = data.n
        self.dim = data.dim

    def _margins(self, w, idx):
        X = self.data.features
        y = self.data.labels
        return y[idx] * (X[idx] @ w)

    def value(self, w, idx=None, counters=None, regularized=True):
        w = np.asarray(w, dtype=np.float64)
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite weight vector")
        idx = _check_indices(idx, self.n)
        t = self._margins(w, idx)
        # log(1+exp(-t)) via logaddexp for overflow safety at large |t|
        val = float(np.mean(np.logaddexp(0.0, -t)))
        if regularized:
            val += 0.5 * self.lam * float(w @ w)
        if counters is not None:
            counters.func_components += len(idx)
        return val

    def gradient(self, w, idx=None, counters=None):
        w = np.asarray(w, dtype=np.float64)
        idx = _check_indices(idx, self.n)
        X = self.data.features[idx]
        y = self.data.labels[idx]
        t = y * (X @ w)
        # d/dt log(1+exp(-t)) = -1/(1+exp(t)), overflow-safe via |t|
        e = np.exp(-np.abs(t))
        sig_neg = np.where(t >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
        g = X.T @ (-y * sig_neg)
        g /= len(idx)
        g += self.lam * w
        if counters is not None:
            counters.grad_components += len(idx)
        return g

    def hessian_vector(self, w, p, idx=None, counters=None):
        w = np.ascontiguousarray(w, dtype=np.float64)
        p = np.ascontiguousarray(p, dtype=np.float64)
        if p.shape != (self.dim,):
            raise ValueError("vector length must equal the feature dimension")
        idx = _check_indices(idx, self.n)
        if counters is not None:
            counters.hvp_components += len(idx)
        return kernels.hvp_indexed(self.data.features, w, p, idx, self.lam)

    def component_hessian_coeffs(self, w):
        """Curvatures c_i = sig'(x_i.w); component Hessian is c_i x_i x_i^T + lam I."""
        m = self.data.features @ np.asarray(w, dtype=np.float64)
        e = np.exp(-np.abs(m))
        return e / (1.0 + e) ** 2

    def dense_hessian(self, w, idx=None, counters=None):
        if self.dim > DENSE_HESSIAN_GUARD:
            raise ValueError(
                f"dense Hessian guard: d={self.dim} > {DENSE_HESSIAN_GUARD}")
        w = np.asarray(w, dtype=np.float64)
        idx = _check_indices(idx, self.n)
        X = self.data.features[idx]
        e = np.exp(-np.abs(X @ w))
        c = e / (1.0 + e) ** 2
        H = (X.T * c) @ X
        H /= len(idx)
        H += self.lam * np.eye(self.dim)
        if counters is not None:
            # equate one dense subsampled Hessian with d probing HVPs
            counters.hvp_components += len(idx) * self.dim
        return H
