"""Statistical verification tools: autocorrelation, Ljung-Box tests, and
maximum-mean-discrepancy heatmaps over stream batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaincc

__all__ = [
    "AcfResult",
    "LjungBoxResult",
    "MmdMatrix",
    "acf",
    "ljung_box",
    "chi_square_upper_tail",
    "mmd2_rbf",
    "median_bandwidth",
    "mmd_heatmap",
]

SIGNIFICANCE_LEVELS = (0.05, 0.01, 0.001)


@dataclass(frozen=True)
class AcfResult:
    correlations: np.ndarray  # indexed by lag 0..max_lag
    n: int

    def __getitem__(self, lag: int) -> float:
        return float(self.correlations[lag])


@dataclass(frozen=True)
class LjungBoxResult:
    Q: float
    h: int
    p_value: float
    reject_at: dict[float, bool]


@dataclass(frozen=True)
class MmdMatrix:
    batch_size: int
    values: np.ndarray
    bandwidth: float

    @property
    def n_batches(self) -> int:
        return self.values.shape[0]


def acf(series: np.ndarray, max_lag: int) -> AcfResult:
    """Biased autocorrelation estimate at lags 0..max_lag.

    rho_k = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2
    """

    x = np.asarray(series, dtype=float).ravel()
    n = x.shape[0]
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if n <= max_lag:
        raise ValueError("series must be longer than max_lag")
    if not np.all(np.isfinite(x)):
        raise ValueError("series must be finite")
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom <= 0.0:
        raise ValueError("constant series has no autocorrelation")
    corr = np.empty(max_lag + 1)
    corr[0] = 1.0
    for k in range(1, max_lag + 1):
        corr[k] = float(centered[:-k] @ centered[k:]) / denom
    return AcfResult(correlations=corr, n=n)


def chi_square_upper_tail(x: float, k: int) -> float:
    """P(X >= x) for X ~ chi-square with k degrees of freedom."""

    if x < 0:
        raise ValueError("x must be non-negative")
    if k < 1:
        raise ValueError("k must be a positive integer")
    return float(gammaincc(k / 2.0, x / 2.0))


def ljung_box(series: np.ndarray, h: int = 20) -> LjungBoxResult:
    """Ljung-Box portmanteau test for autocorrelation up to lag h.

    Q = n (n+2) sum_{k=1..h} rho_k^2 / (n - k), compared against a chi-square
    with h degrees of freedom.
    """

    x = np.asarray(series, dtype=float).ravel()
    n = x.shape[0]
    if h < 1:
        raise ValueError("h must be positive")
    if n <= h + 1:
        raise ValueError("series must be longer than h + 1")
    rho = acf(x, h).correlations
    ks = np.arange(1, h + 1)
    Q = float(n * (n + 2) * np.sum(rho[1:] ** 2 / (n - ks)))
    p = chi_square_upper_tail(Q, h)
    return LjungBoxResult(
        Q=Q,
        h=h,
        p_value=p,
        reject_at={lvl: p < lvl for lvl in SIGNIFICANCE_LEVELS},
    )


def _rbf(sq_dists: np.ndarray, bandwidth: float) -> np.ndarray:
    return np.exp(-sq_dists / (2.0 * bandwidth * bandwidth))


def mmd2_rbf(A: np.ndarray, B: np.ndarray, bandwidth: float) -> float:
    """Biased V-statistic estimate of squared MMD with an RBF kernel.

    The V-statistic keeps the diagonal terms, so identical batches give
    exactly zero.
    """

    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise ValueError("batches must be non-empty")
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"column arity mismatch: {A.shape[1]} vs {B.shape[1]}"
        )
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    kaa = _rbf(cdist(A, A, "sqeuclidean"), bandwidth).mean()
    kbb = _rbf(cdist(B, B, "sqeuclidean"), bandwidth).mean()
    kab = _rbf(cdist(A, B, "sqeuclidean"), bandwidth).mean()
    return max(float(kaa + kbb - 2.0 * kab), 0.0)


def median_bandwidth(X: np.ndarray, seed: int = 0, subsample: int = 1000) -> float:
    """Median pairwise distance over at most ``subsample`` rows."""

    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two rows for a bandwidth")
    if n > subsample:
        rng = np.random.default_rng(seed)
        idx = rng.choice(n, size=subsample, replace=False)
        X = X[np.sort(idx)]
    d = cdist(X, X)
    med = float(np.median(d[np.triu_indices_from(d, k=1)]))
    return med if med > 0 else 1.0


def mmd_heatmap(
    X: np.ndarray,
    batch_size: int,
    y: np.ndarray | None = None,
    include_label: bool = False,
    seed: int = 0,
) -> MmdMatrix:
    """Squared MMD between all pairs of consecutive stream batches.

    All columns are standardized by their global mean and scale; joint mode
    appends the label as one more standardized numeric column.  A trailing
    partial batch is dropped.
    """

    X = np.atleast_2d(np.asarray(X, dtype=float))
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    n = X.shape[0]
    if n < 2 * batch_size:
        raise ValueError("stream too short: need at least two batches")
    if include_label:
        if y is None:
            raise ValueError("joint mode needs the label column")
        y = np.asarray(y, dtype=float).reshape(-1, 1)
        if y.shape[0] != n:
            raise ValueError("label length does not match the stream")
        M = np.hstack([X, y])
    else:
        M = X
    if not np.all(np.isfinite(M)):
        raise ValueError("stream contains missing or non-finite values")
    mean = M.mean(axis=0)
    scale = M.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (M - mean) / scale

    bw = median_bandwidth(Z, seed=seed)
    n_batches = n // batch_size
    batches = [Z[i * batch_size : (i + 1) * batch_size] for i in range(n_batches)]
    values = np.zeros((n_batches, n_batches))
    for i in range(n_batches):
        for j in range(i + 1, n_batches):
            v = mmd2_rbf(batches[i], batches[j], bw)
            values[i, j] = v
            values[j, i] = v
    return MmdMatrix(batch_size=batch_size, values=values, bandwidth=bw)
