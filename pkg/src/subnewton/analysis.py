"""Empirical problem constants and the derived theoretical quantities:
linear-rate constants, linear-quadratic constants, required Hessian sample
size, required CG iterations, residual-test bound, and complexity table.

Estimated constants are empirical bounds (extrema over probes and trials),
not certified; reports carry an `estimated` disclaimer.
"""

import dataclasses
import math

import numpy as np

_SLACK = 1e-9
SIGMA_DENSE_GUARD = 5000


@dataclasses.dataclass(frozen=True)
class TheoryConstants:
    mu: float           # extreme eigenvalues of the full Hessian
    L: float
    mu_beta: float      # extreme eigenvalues over sampled Hessians of size beta
    L_beta: float
    mu_bar: float       # uniform bounds over all sample sizes
    L_bar: float
    v: float            # gradient-variance bound
    sigma: float        # Hessian-variance bound
    M: float            # Hessian Lipschitz constant (empirical lower bound)
    gamma: float = 2.0  # configured, not estimated
    beta: int = None    # sample size the (mu_beta, L_beta) pair refers to
    estimated: bool = True

    def __post_init__(self):
        if not 0.0 < self.mu <= self.L + _SLACK:
            raise ValueError("need 0 < mu <= L")
        chain = (self.mu_bar, self.mu_beta, self.L_beta, self.L_bar)
        if any(not np.isfinite(c) or c <= 0.0 for c in chain):
            raise ValueError("spectral constants must be finite and positive")
        if not (self.mu_bar <= self.mu_beta + _SLACK
                and self.mu_beta <= self.L_beta + _SLACK
                and self.L_beta <= self.L_bar + _SLACK):
            raise ValueError("need mu_bar <= mu_beta <= L_beta <= L_bar")
        if self.v < 0.0 or self.sigma < 0.0 or self.M < 0.0:
            raise ValueError("variance and Lipschitz bounds are nonnegative")

    @property
    def kappa(self):
        return self.L / self.mu

    @property
    def kappa_hat(self):
        return self.L_bar / self.mu

    @property
    def kappa_hat_max(self):
        return self.L_bar / self.mu_bar

    @property
    def delta_beta(self):
        return self.L_beta / self.mu_beta

    def to_dict(self):
        d = dataclasses.asdict(self)
        d.update(kappa=self.kappa, kappa_hat=self.kappa_hat,
                 kappa_hat_max=self.kappa_hat_max, delta_beta=self.delta_beta)
        return d


@dataclasses.dataclass(frozen=True)
class SpectrumEstimate:
    mu_beta: float
    L_beta: float
    mu: float
    L: float
    mu_bar: float
    L_bar: float


def default_probe_set(w_star, w0, rng, n_segment=3):
    """w*, w0, and points on the segment between them (the convergence
    guarantees are local, so constants are estimated along the path)."""
    probes = [np.asarray(w_star, float), np.asarray(w0, float)]
    for _ in range(n_segment):
        t = rng.random()
        probes.append((1.0 - t) * probes[0] + t * probes[1])
    return probes


def estimate_spectrum(obj, w_probes, beta, trials, rng):
    """Extreme Hessian eigenvalues: full, at sample size beta, and uniform.

    The uniform bounds come from a singleton scan: each component logistic
    Hessian c_i x_i x_i^T + lam*I has extreme eigenvalues lam (for d > 1)
    and c_i ||x_i||^2 + lam, and averaging PSD components can only shrink
    the extremes toward the full-Hessian interval.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    beta = min(beta, obj.n)
    mus, Ls = [], []
    mus_b, Ls_b = [], []
    mu_bars, L_bars = [], []
    sq_norms = np.einsum("ij,ij->i", obj.data.features, obj.data.features)
    for w in w_probes:
        eigs = np.linalg.eigvalsh(obj.dense_hessian(w))
        mus.append(eigs[0])
        Ls.append(eigs[-1])
        for _ in range(trials):
            idx = rng.choice(obj.n, size=beta, replace=False)
            eigs_b = np.linalg.eigvalsh(obj.dense_hessian(w, idx=idx))
            mus_b.append(eigs_b[0])
            Ls_b.append(eigs_b[-1])
        c = obj.component_hessian_coeffs(w)
        top = c * sq_norms + obj.lam
        if obj.dim > 1:
            mu_bars.append(min(obj.lam, float(top.min())))
        else:
            mu_bars.append(float(top.min()))
        L_bars.append(float(top.max()))
    return SpectrumEstimate(
        mu_beta=float(min(mus_b)), L_beta=float(max(Ls_b)),
        mu=float(min(mus)), L=float(max(Ls)),
        mu_bar=float(min(mu_bars)), L_bar=float(max(L_bars)))


@dataclasses.dataclass(frozen=True)
class VarianceEstimate:
    v: float
    sigma: float
    sigma_probe_fallback: bool = False


def estimate_variances(obj, w_probes, trials=20, rng=None):
    """Gradient-variance bound v and Hessian-variance bound sigma.

    v^2: max over probes of tr Cov(grad F_i) over the full pool.
    sigma^2: max over probes of the largest eigenvalue of the mean squared
    Hessian deviation; dense when d is small, else a probe-based estimate
    (flagged).
    """
    X = obj.data.features
    y = obj.data.labels
    sq_norms = np.einsum("ij,ij->i", X, X)
    v_sq = 0.0
    sigma_sq = 0.0
    fallback = obj.dim > SIGMA_DENSE_GUARD
    if fallback and rng is None:
        rng = np.random.default_rng(0)
    for w in w_probes:
        t = y * (X @ w)
        e = np.exp(-np.abs(t))
        sig_neg = np.where(t >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
        coef = -y * sig_neg
        # the lam*w term is common to every component and cancels in Cov
        mean_g = X.T @ coef / obj.n
        v_sq = max(v_sq, float(np.mean(coef ** 2 * sq_norms) - mean_g @ mean_g))
        c = obj.component_hessian_coeffs(w)
        if not fallback:
            H0 = (X.T * c) @ X / obj.n
            M1 = (X.T * (c ** 2 * sq_norms)) @ X / obj.n
            dev = M1 - H0 @ H0
            sigma_sq = max(sigma_sq, float(np.linalg.eigvalsh(dev)[-1]))
        else:
            # power iteration on p -> (1/N) sum (H_i - H0)^2 p via two passes
            p = rng.standard_normal(obj.dim)
            p /= np.linalg.norm(p)
            est = 0.0
            for _ in range(trials):
                q = _squared_deviation_apply(X, c, p, obj.n)
                est = float(np.linalg.norm(q))
                if est == 0.0:
                    break
                p = q / est
            sigma_sq = max(sigma_sq, est)
    return VarianceEstimate(v=math.sqrt(max(v_sq, 0.0)),
                            sigma=math.sqrt(max(sigma_sq, 0.0)),
                            sigma_probe_fallback=fallback)


def _squared_deviation_apply(X, c, p, n):
    H0p = X.T @ (c * (X @ p)) / n
    M1p = X.T @ ((c ** 2 * np.einsum("ij,ij->i", X, X)) * (X @ p)) / n
    H0H0p = X.T @ (c * (X @ H0p)) / n
    return M1p - H0H0p


def estimate_lipschitz_M(obj, w_probe_pairs):
    """Empirical lower bound on the Hessian Lipschitz constant."""
    best = None
    for w, z in w_probe_pairs:
        w = np.asarray(w, float)
        z = np.asarray(z, float)
        dist = float(np.linalg.norm(w - z))
        if dist == 0.0:
            continue
        diff = obj.dense_hessian(w) - obj.dense_hessian(z)
        best = max(best or 0.0, float(np.linalg.norm(diff, 2)) / dist)
    if best is None:
        raise ValueError("need at least one probe pair with w != z")
    return best


def build_constants(obj, w_star, w0, beta, trials=5, seed=0, gamma=2.0):
    """Estimate every constant around the segment [w0, w*]."""
    rng = np.random.default_rng(seed)
    probes = default_probe_set(w_star, w0, rng)
    spec = estimate_spectrum(obj, probes, beta, trials, rng)
    var = estimate_variances(obj, probes, rng=rng)
    pairs = [(probes[i], probes[j])
             for i in range(len(probes)) for j in range(i + 1, len(probes))]
    M = estimate_lipschitz_M(obj, pairs)
    return TheoryConstants(
        mu=spec.mu, L=spec.L, mu_beta=spec.mu_beta, L_beta=spec.L_beta,
        mu_bar=spec.mu_bar, L_bar=spec.L_bar, v=var.v, sigma=var.sigma,
        M=M, gamma=gamma, beta=min(beta, obj.n))


@dataclasses.dataclass(frozen=True)
class LinearConstants:
    C: float
    rho_hat: float
    alpha_fixed: float


def compute_linear_constants(tc, eta, f_gap0):
    """Linear-rate constants for the geometric gradient-sample schedule."""
    if eta <= 1.0:
        raise ValueError("eta must exceed 1")
    C = max(f_gap0, tc.v ** 2 * tc.L_beta / (tc.mu * tc.mu_beta))
    rho_hat = max(1.0 - tc.mu * tc.mu_beta / (2.0 * tc.L * tc.L_beta),
                  1.0 / eta)
    return LinearConstants(C=C, rho_hat=rho_hat,
                           alpha_fixed=tc.mu_beta / tc.L)


@dataclasses.dataclass(frozen=True)
class LQConstants:
    C1: float
    C2: float
    C3: float
    theta: float
    delta: float


def compute_lq_constants(tc):
    """Linear-quadratic bound constants for the fixed-r Newton-CG analysis."""
    delta = tc.delta_beta
    sq = math.sqrt(delta)
    return LQConstants(
        C1=tc.M / (2.0 * tc.mu_beta),
        C2=tc.sigma / tc.mu_beta,
        C3=2.0 * tc.L / tc.mu_beta * sq,
        theta=(sq - 1.0) / (sq + 1.0),
        delta=delta)


def required_hessian_sample(tc, pool_size=None):
    """Hessian sample size for the halving rate; (beta, clamped-to-pool)."""
    if tc.mu_bar <= 0.0:
        raise ValueError("mu_bar must be positive")
    if tc.sigma == 0.0:
        beta = 1
    else:
        beta = math.ceil(64.0 * tc.sigma ** 2 / tc.mu_bar ** 2)
    if pool_size is not None and beta > pool_size:
        return pool_size, True
    return beta, False


def required_cg_iters(tc, d):
    """CG steps for the halving rate; one exact step suffices at delta <= 1."""
    delta = tc.delta_beta
    if delta <= 1.0:
        return 1
    sq = math.sqrt(delta)
    raw = math.log(16.0 * tc.L * sq / tc.mu_beta) \
        / math.log((sq + 1.0) / (sq - 1.0))
    return min(d, max(1, math.ceil(raw)))


def zeta_bound(tc):
    """Residual-test tolerance preserving the halving rate."""
    return tc.mu_beta / (8.0 * tc.L)


def table41_costs(tc, n, d, v, omega, epsilon):
    """Order-of-magnitude cost per method to reach an epsilon-accurate
    solution.  Comparable numbers only, not runtimes."""
    if min(n, d, v, omega, epsilon) <= 0.0:
        raise ValueError("all inputs must be positive")
    if epsilon >= 1.0:
        raise ValueError("epsilon must be below 1")
    log_eps = math.log(1.0 / epsilon)
    kmax = tc.kappa_hat_max
    rows = {
        "SG": d * omega * tc.kappa ** 2 / epsilon,
        "DSS": d * v * tc.kappa / (tc.mu * epsilon),
        "GD": n * d * tc.kappa * log_eps,
        "Newton": n * d ** 2 * math.log(log_eps),
        "NewtonCG-exact": (n + kmax ** 2 * d) * d * log_eps,
        "NewtonCG-inexact": (n + kmax ** 2 * math.sqrt(kmax)) * d * log_eps,
        "LiSSA": (n + kmax ** 2 * tc.kappa_hat) * d * log_eps,
        "NewtonSketch": (n + tc.kappa ** 4 * d ** 2) * d * log_eps,
    }
    return {"note": "order-of-magnitude only", "costs": rows}


@dataclasses.dataclass(frozen=True)
class RateFit:
    ratios: np.ndarray
    rate: float
    superlinear: bool


def fit_rate(errors, floor=1e-14):
    """Per-iteration error ratios, fitted linear rate, superlinearity verdict.

    `errors` are ensemble means of a positive error metric.  Entries at or
    below the numerical floor (and everything after the first such entry)
    are discarded.
    """
    e = np.asarray(errors, dtype=np.float64)
    below = np.nonzero(e <= floor)[0]
    if below.size:
        e = e[:below[0]]
    if len(e) < 4:
        raise ValueError(
            "need at least 4 iterations above the numerical floor; "
            "use a smaller budget or looser floor")
    ratios = e[1:] / e[:-1]
    rate = float(np.exp(np.mean(np.log(ratios))))
    superlinear = bool(np.all(np.diff(ratios) < 0.0))
    return RateFit(ratios=ratios, rate=rate, superlinear=superlinear)
