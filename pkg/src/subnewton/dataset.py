"""Binary-classification dataset loading, synthesis, splitting, rescaling."""

import dataclasses

import numpy as np


class DatasetError(ValueError):
    pass


class ParseError(DatasetError):
    pass


@dataclasses.dataclass(frozen=True)
class Dataset:
    """Dense feature matrix (one row per example) with +-1 labels."""

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise DatasetError("features must be a 2-d array")
        if X.shape[0] != y.shape[0]:
            raise DatasetError(
                f"{X.shape[0]} feature rows but {y.shape[0]} labels"
            )
        if X.size and not np.all(np.isfinite(X)):
            raise DatasetError("non-finite feature values")
        if y.size and not np.all(np.abs(y) == 1.0):
            raise DatasetError("labels must be exactly -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, indices, name=None):
        return Dataset(self.features[indices], self.labels[indices],
                       name or self.name)


@dataclasses.dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    test: Dataset
    split_seed: int


def _map_label(raw, lineno):
    if raw in (1.0, -1.0):
        return raw
    if raw == 0.0:
        return -1.0
    raise ParseError(f"line {lineno}: label {raw:g} not in {{0, 1, -1, +1}}")


def load_libsvm(path, name=None):
    """Read `label idx:val ...` lines (1-based ascending indices).

    0/1 labels are mapped to -1/+1; absent entries are zero; d is the
    largest index seen.
    """
    labels = []
    rows = []
    d = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                raw = float(parts[0])
            except ValueError:
                raise ParseError(f"line {lineno}: bad label {parts[0]!r}") from None
            labels.append(_map_label(raw, lineno))
            row = []
            prev = 0
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"line {lineno}: bad entry {tok!r}") from None
                if idx <= prev:
                    raise ParseError(
                        f"line {lineno}: index {idx} not 1-based ascending")
                prev = idx
                row.append((idx, val))
                d = max(d, idx)
            rows.append(row)
    X = np.zeros((len(rows), d))
    for i, row in enumerate(rows):
        for idx, val in row:
            X[i, idx - 1] = val
    if name is None:
        name = str(path)
    return Dataset(X, np.array(labels), name)


def save_libsvm(ds, path):
    """Write the libsvm text format (zeros omitted, indices 1-based)."""
    with open(path, "w") as fh:
        for x, y in zip(ds.features, ds.labels):
            entries = " ".join(
                f"{j + 1}:{float(x[j])!r}" for j in np.nonzero(x)[0]
            )
            fh.write(f"{int(y):+d} {entries}".rstrip() + "\n")


def load_csv(path, name=None):
    """CSV with optional header; last column is the label."""
    with open(path) as fh:
        first = fh.readline()
        has_header = False
        for tok in first.strip().split(","):
            try:
                float(tok)
            except ValueError:
                has_header = True
                break
    data = np.loadtxt(path, delimiter=",", skiprows=1 if has_header else 0,
                      ndmin=2)
    if data.shape[1] < 2:
        raise ParseError("csv needs at least one feature column plus a label")
    y = np.array([_map_label(v, i + 1) for i, v in enumerate(data[:, -1])])
    if name is None:
        name = str(path)
    return Dataset(data[:, :-1], y, name)


def split(ds, ratio=0.7, seed=0):
    """Random train/test split; first round(ratio*N) of a seeded permutation."""
    if not 0.0 < ratio < 1.0:
        raise DatasetError("split ratio must be in (0, 1)")
    if ds.n < 2:
        raise DatasetError("need at least 2 examples to split")
    perm = np.random.default_rng(seed).permutation(ds.n)
    n_train = round(ratio * ds.n)
    train = ds.subset(perm[:n_train], f"{ds.name}:train")
    test = ds.subset(perm[n_train:], f"{ds.name}:test")
    return SplitDataset(train=train, test=test, split_seed=seed)


def synthesize(n, d, seed=0, name="synthetic"):
    """Gaussian features, hidden Gaussian weight vector, logistic labels."""
    if n < 1 or d < 1:
        raise DatasetError("n and d must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    w_true = rng.standard_normal(d)
    prob = 1.0 / (1.0 + np.exp(-X @ w_true))
    y = np.where(rng.random(n) < prob, 1.0, -1.0)
    return Dataset(X, y, name)


def rescale_for_sgi(ds, lam):
    """Shrink features so every component logistic Hessian has norm < 1.

    The component Hessian is c_i x_i x_i^T + lam*I with c_i <= 1/4, so it
    suffices that ||x_i||^2/4 + lam < 1 for all i.
    """
    if lam < 0:
        raise DatasetError("lambda must be nonnegative")
    if lam >= 1.0:
        raise DatasetError("lambda >= 1: rescaling cannot bound the Hessians")
    sq_norms = np.einsum("ij,ij->i", ds.features, ds.features)
    max_sq = float(sq_norms.max()) if ds.n else 0.0
    if max_sq == 0.0:
        return ds, 1.0
    s = min(1.0, np.sqrt(0.99 * (1.0 - lam) * 4.0 / max_sq))
    if s == 1.0:
        return ds, 1.0
    return Dataset(ds.features * s, ds.labels, f"{ds.name}:scaled"), float(s)
