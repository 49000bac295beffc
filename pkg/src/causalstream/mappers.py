"""Node value machinery: root distributions, target functions, mappers.

Root nodes sample from a parameterized distribution.  Every inner node owns a
mapper.  Continuous mappers are small regression models fitted to a synthetic
target function evaluated on standardized ancestor samples; categorical
mappers assign class indices from centroid geometry in raw parent space.

Continuous mappers standardize their inputs with the per-parent mean/scale
captured at fit time (prevents scale blow-up along deep causal chains) and
record the mean/std of their own predictions on the fit sample, which later
anchors the node's noise amplitude.  Categorical mappers work on raw parent
values and keep the parent min/max box so drift can redraw centroids inside
the region the parents actually visit.

All parameters serialize to plain JSON-compatible dicts with exact float
round-trip; ``serialize_params`` gives canonical bytes for equality checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CONTINUOUS_KINDS",
    "CATEGORICAL_KINDS",
    "TARGET_FN_KINDS",
    "RootDistribution",
    "TargetFunction",
    "eval_target_function",
    "draw_target_function",
    "ParentStats",
    "MLPMapper",
    "RegressionTreeMapper",
    "SGDLinearMapper",
    "PrototypeMapper",
    "GaussianPrototypeMapper",
    "RadialBasisMapper",
    "HyperplaneMapper",
    "fit_continuous_mapper",
    "init_random_mlp",
    "init_categorical_mapper",
    "mapper_predict",
    "categorical_predict",
    "mapper_from_dict",
    "serialize_params",
]

CONTINUOUS_KINDS = ("learned-mlp", "random-mlp", "regression-tree", "sgd-linear")
CATEGORICAL_KINDS = ("prototype", "gaussian-prototype", "random-rbf", "hyperplane")
TARGET_FN_KINDS = ("linear", "sine", "step", "checkerboard", "rbf")

_HIDDEN = 10          # MLP hidden width
_MLP_EPOCHS = 10
_MLP_LR = 1e-3
_MLP_BATCH = 64
_SGD_EPOCHS = 10
_SGD_ALPHA = 1e-4     # l2 penalty
_SGD_ETA0 = 0.01
_SGD_POWER_T = 0.25
_TREE_DEPTH_RANGE = (5, 25)


# ---------------------------------------------------------------------------
# root distributions


@dataclass(frozen=True)
class RootDistribution:
    """Sampling distribution of a root node.

    ``normal`` params are (mean, variance); ``uniform`` params are (low, high).
    """

    kind: str
    p1: float
    p2: float

    def __post_init__(self) -> None:
        if self.kind == "normal":
            if self.p2 <= 0:
                raise ValueError("normal variance must be positive")
        elif self.kind == "uniform":
            if self.p2 <= self.p1:
                raise ValueError("uniform needs high > low")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "normal":
            return rng.normal(self.p1, float(np.sqrt(self.p2)), size)
        return rng.uniform(self.p1, self.p2, size)

    def mean(self) -> float:
        if self.kind == "normal":
            return float(self.p1)
        return float((self.p1 + self.p2) / 2.0)

    def std(self) -> float:
        if self.kind == "normal":
            return float(np.sqrt(self.p2))
        return float((self.p2 - self.p1) / np.sqrt(12.0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p1": float(self.p1), "p2": float(self.p2)}

    @classmethod
    def from_dict(cls, d: dict) -> "RootDistribution":
        return cls(kind=d["kind"], p1=float(d["p1"]), p2=float(d["p2"]))


# ---------------------------------------------------------------------------
# target functions


@dataclass(frozen=True)
class TargetFunction:
    """Deterministic synthetic function fitted by continuous mappers.

    Observation noise is added by the fitting routine, never here; the
    checkerboard is noise-free by design (its output must stay in {0, 1}).
    """

    kind: str
    weights: tuple[float, ...] | None = None   # linear only
    bias: float = 0.0                          # linear only
    sigma: float = 1.0                         # rbf width

    def __post_init__(self) -> None:
        if self.kind not in TARGET_FN_KINDS:
            raise ValueError(f"unknown target function kind {self.kind!r}")
        if self.kind == "linear" and not self.weights:
            raise ValueError("linear target function needs weights")
        if self.kind == "rbf" and self.sigma <= 0:
            raise ValueError("rbf width must be positive")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "linear":
            d["weights"] = [float(w) for w in self.weights]
            d["bias"] = float(self.bias)
        if self.kind == "rbf":
            d["sigma"] = float(self.sigma)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TargetFunction":
        return cls(
            kind=d["kind"],
            weights=tuple(d["weights"]) if "weights" in d else None,
            bias=float(d.get("bias", 0.0)),
            sigma=float(d.get("sigma", 1.0)),
        )


def eval_target_function(fn: TargetFunction, x: np.ndarray) -> np.ndarray | float:
    """Evaluate the noiseless target function on rows of ``x``.

    ``x`` may be a single vector ``(k,)`` or a matrix ``(n, k)``.
    """

    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if fn.kind == "linear":
        w = np.asarray(fn.weights, dtype=float)
        if X.shape[1] != w.shape[0]:
            raise ValueError("input width does not match linear weights")
        out = X @ w + fn.bias
    elif fn.kind == "sine":
        out = np.sin(X).sum(axis=1)
    elif fn.kind == "step":
        out = (X.sum(axis=1) > 0).astype(float)
    elif fn.kind == "checkerboard":
        out = np.mod(np.floor(X).sum(axis=1), 2.0)
    elif fn.kind == "rbf":
        out = np.exp(-np.sum(X * X, axis=1) / (2.0 * fn.sigma**2))
    else:  # pragma: no cover - guarded by the dataclass
        raise ValueError(fn.kind)
    return float(out[0]) if single else out


def draw_target_function(
    kind: str, n_inputs: int, rng: np.random.Generator
) -> TargetFunction:
    """Draw function parameters for ``kind`` over ``n_inputs`` inputs."""

    if kind == "linear":
        w = rng.uniform(-2.0, 2.0, size=n_inputs)
        b = float(rng.uniform(-1.0, 1.0))
        return TargetFunction("linear", weights=tuple(float(v) for v in w), bias=b)
    if kind == "rbf":
        return TargetFunction("rbf", sigma=float(rng.uniform(0.5, 2.0)))
    return TargetFunction(kind)


# ---------------------------------------------------------------------------
# continuous mappers


def _standardize_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    bound = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-bound, bound, size=shape)


class _ContinuousBase:
    kind: str = ""

    def __init__(self, in_mean, in_scale, out_mean=0.0, out_scale=1.0, fitted_target=None):
        self.in_mean = np.asarray(in_mean, dtype=float)
        self.in_scale = np.asarray(in_scale, dtype=float)
        if np.any(self.in_scale <= 0):
            raise ValueError("standardization scales must be positive")
        self.out_mean = float(out_mean)
        self.out_scale = float(out_scale)
        self.fitted_target = fitted_target

    @property
    def n_inputs(self) -> int:
        return int(self.in_mean.shape[0])

    def _z(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise ValueError(
                f"expected {self.n_inputs} inputs, got {x.shape[-1]}"
            )
        return (x - self.in_mean) / self.in_scale

    def predict(self, x: np.ndarray):
        z = self._z(x)
        if z.ndim == 1:
            return float(self._forward(z[None, :])[0])
        return self._forward(z)

    def _forward(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def _base_dict(self) -> dict:
        return {
            "kind": self.kind,
            "in_mean": self.in_mean.tolist(),
            "in_scale": self.in_scale.tolist(),
            "out_mean": self.out_mean,
            "out_scale": self.out_scale,
            "fitted_target": None if self.fitted_target is None else self.fitted_target.to_dict(),
        }


class MLPMapper(_ContinuousBase):
    """One-hidden-layer relu network; ``learned-mlp`` or ``random-mlp``.

    A learned MLP is trained with adam on the fit sample; a random MLP keeps
    its Xavier-uniform initialization and acts as a fixed random function.
    """

    def __init__(self, kind, W1, b1, w2, b2, **base):
        if kind not in ("learned-mlp", "random-mlp"):
            raise ValueError(kind)
        self.kind = kind
        self.W1 = np.asarray(W1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = float(b2)
        super().__init__(**base)

    def _forward(self, z: np.ndarray) -> np.ndarray:
        h = np.maximum(z @ self.W1 + self.b1, 0.0)
        return h @ self.w2 + self.b2

    def reinit(self, rng: np.random.Generator) -> None:
        """Redraw all weights (random-mlp drift); standardization is kept."""
        k = self.n_inputs
        self.W1 = _xavier(rng, k, _HIDDEN, (k, _HIDDEN))
        self.b1 = np.zeros(_HIDDEN)
        self.w2 = _xavier(rng, _HIDDEN, 1, (_HIDDEN,))
        self.b2 = 0.0

    def to_dict(self) -> dict:
        d = self._base_dict()
        d.update(
            W1=self.W1.tolist(),
            b1=self.b1.tolist(),
            w2=self.w2.tolist(),
            b2=self.b2,
        )
        return d


class RegressionTreeMapper(_ContinuousBase):
    """CART regression tree with squared-error splits.

    Nodes are stored as parallel arrays; ``feature[i] == -1`` marks a leaf.
    Thresholds are midpoints of adjacent fit samples, so they always lie
    inside the fit range; inputs beyond it land in a boundary leaf.
    """

    kind = "regression-tree"

    def __init__(self, feature, threshold, left, right, value, max_depth, **base):
        self.feature = np.asarray(feature, dtype=int)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=int)
        self.right = np.asarray(right, dtype=int)
        self.value = np.asarray(value, dtype=float)
        self.max_depth = int(max_depth)
        super().__init__(**base)

    def _forward(self, z: np.ndarray) -> np.ndarray:
        out = np.empty(z.shape[0])
        for i in range(z.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if z[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out

    def to_dict(self) -> dict:
        d = self._base_dict()
        d.update(
            feature=self.feature.tolist(),
            threshold=self.threshold.tolist(),
            left=self.left.tolist(),
            right=self.right.tolist(),
            value=self.value.tolist(),
            max_depth=self.max_depth,
        )
        return d


class SGDLinearMapper(_ContinuousBase):
    """Linear model trained by per-sample SGD with l2 penalty.

    ``partial_fit`` performs one additional step and exists for incremental
    drift, which re-fits the node toward a new target function one instance
    at a time; its inverse-scaling schedule restarts whenever a drift event
    begins (``reset_partial_schedule``), otherwise steps at the tail of the
    original schedule would be invisibly small.
    """

    kind = "sgd-linear"

    def __init__(self, w, b, **base):
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)
        self._partial_steps = 0
        super().__init__(**base)

    def _forward(self, z: np.ndarray) -> np.ndarray:
        return z @ self.w + self.b

    def partial_fit(self, z: np.ndarray, y: float) -> None:
        self._partial_steps += 1
        lr = _SGD_ETA0 / self._partial_steps**_SGD_POWER_T
        err = float(z @ self.w + self.b - y)
        self.w -= lr * (err * z + _SGD_ALPHA * self.w)
        self.b -= lr * err

    def reset_partial_schedule(self) -> None:
        self._partial_steps = 0

    def to_dict(self) -> dict:
        d = self._base_dict()
        d.update(w=self.w.tolist(), b=self.b)
        return d


def _fit_mlp_weights(z, y, rng):
    n, k = z.shape
    W1 = _xavier(rng, k, _HIDDEN, (k, _HIDDEN))
    b1 = np.zeros(_HIDDEN)
    w2 = _xavier(rng, _HIDDEN, 1, (_HIDDEN,))
    b2 = 0.0
    moments = [np.zeros_like(p) for p in (W1, b1, w2)] + [0.0]
    moments2 = [np.zeros_like(p) for p in (W1, b1, w2)] + [0.0]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    for _ in range(_MLP_EPOCHS):
        perm = rng.permutation(n)
        for start in range(0, n, _MLP_BATCH):
            idx = perm[start : start + _MLP_BATCH]
            zb, yb = z[idx], y[idx]
            pre = zb @ W1 + b1
            h = np.maximum(pre, 0.0)
            pred = h @ w2 + b2
            g_out = 2.0 * (pred - yb) / len(idx)
            g_w2 = h.T @ g_out
            g_b2 = float(g_out.sum())
            g_h = np.outer(g_out, w2) * (pre > 0)
            g_W1 = zb.T @ g_h
            g_b1 = g_h.sum(axis=0)
            step += 1
            params = [W1, b1, w2]
            grads = [g_W1, g_b1, g_w2]
            for i in range(3):
                moments[i] = beta1 * moments[i] + (1 - beta1) * grads[i]
                moments2[i] = beta2 * moments2[i] + (1 - beta2) * grads[i] ** 2
                mhat = moments[i] / (1 - beta1**step)
                vhat = moments2[i] / (1 - beta2**step)
                params[i] -= _MLP_LR * mhat / (np.sqrt(vhat) + eps)
            moments[3] = beta1 * moments[3] + (1 - beta1) * g_b2
            moments2[3] = beta2 * moments2[3] + (1 - beta2) * g_b2**2
            b2 -= _MLP_LR * (moments[3] / (1 - beta1**step)) / (
                np.sqrt(moments2[3] / (1 - beta2**step)) + eps
            )
    return W1, b1, w2, b2


def _fit_tree(z, y, max_depth):
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        if depth >= max_depth or len(idx) < 2 or np.all(y[idx] == y[idx][0]):
            return node
        best = None  # (sse, feat, thr, order, pos)
        for f in range(z.shape[1]):
            order = idx[np.argsort(z[idx, f], kind="stable")]
            xs = z[order, f]
            ys = y[order]
            valid = np.nonzero(xs[:-1] < xs[1:])[0]
            if valid.size == 0:
                continue
            cs = np.cumsum(ys)
            cs2 = np.cumsum(ys * ys)
            n = len(ys)
            nl = valid + 1.0
            nr = n - nl
            sl = cs[valid]
            sr = cs[-1] - sl
            s2l = cs2[valid]
            s2r = cs2[-1] - s2l
            sse = (s2l - sl * sl / nl) + (s2r - sr * sr / nr)
            j = int(np.argmin(sse))
            if best is None or sse[j] < best[0]:
                pos = int(valid[j])
                thr = float((xs[pos] + xs[pos + 1]) / 2.0)
                best = (float(sse[j]), f, thr, order, pos)
        if best is None:
            return node
        _, f, thr, order, pos = best
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(order[: pos + 1], depth + 1)
        right[node] = grow(order[pos + 1 :], depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return feature, threshold, left, right, value


def _fit_sgd(z, y, rng):
    n, k = z.shape
    w = np.zeros(k)
    b = 0.0
    t = 0
    for _ in range(_SGD_EPOCHS):
        perm = rng.permutation(n)
        for i in perm:
            t += 1
            lr = _SGD_ETA0 / t**_SGD_POWER_T
            err = float(z[i] @ w + b - y[i])
            w -= lr * (err * z[i] + _SGD_ALPHA * w)
            b -= lr * err
    return w, b


def fit_continuous_mapper(
    kind: str,
    parent_samples: np.ndarray,
    target_fn: TargetFunction,
    rng: np.random.Generator,
    eps_scale: float = 0.05,
):
    """Fit a continuous mapper of ``kind`` to ``target_fn``.

    ``parent_samples`` are raw ancestor-simulated parent values, one row per
    sample.  Inputs are standardized by their fit-time mean/std; targets get
    gaussian observation noise with std ``eps_scale`` times the target's own
    output std (checkerboard stays noise-free).
    """

    X = np.asarray(parent_samples, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("cannot fit a mapper on an empty ancestor sample")
    if not np.all(np.isfinite(X)):
        raise ValueError("ancestor samples must be finite")
    if kind not in ("learned-mlp", "regression-tree", "sgd-linear"):
        raise ValueError(f"not a fittable continuous mapper kind: {kind!r}")

    in_mean, in_scale = _standardize_stats(X)
    z = (X - in_mean) / in_scale
    y0 = np.asarray(eval_target_function(target_fn, z), dtype=float)
    t_scale = float(y0.std())
    if target_fn.kind == "checkerboard" or eps_scale == 0.0:
        y = y0
    else:
        y = y0 + rng.normal(0.0, eps_scale * (t_scale if t_scale > 0 else 1.0), len(y0))

    base = dict(in_mean=in_mean, in_scale=in_scale, fitted_target=target_fn)
    if kind == "learned-mlp":
        W1, b1, w2, b2 = _fit_mlp_weights(z, y, rng)
        mapper = MLPMapper("learned-mlp", W1, b1, w2, b2, **base)
    elif kind == "regression-tree":
        depth = int(rng.integers(_TREE_DEPTH_RANGE[0], _TREE_DEPTH_RANGE[1] + 1))
        parts = _fit_tree(z, y, depth)
        mapper = RegressionTreeMapper(*parts, max_depth=depth, **base)
    else:
        w, b = _fit_sgd(z, y, rng)
        mapper = SGDLinearMapper(w, b, **base)

    preds = mapper._forward(z)
    mapper.out_mean = float(preds.mean())
    out_scale = float(preds.std())
    if out_scale <= 0:
        out_scale = t_scale if t_scale > 0 else 1.0
    mapper.out_scale = out_scale
    return mapper


def init_random_mlp(n_in: int, rng: np.random.Generator) -> MLPMapper:
    """Xavier-uniform random network used as a fixed causal mechanism."""

    if n_in < 1:
        raise ValueError("random mlp needs at least one input")
    W1 = _xavier(rng, n_in, _HIDDEN, (n_in, _HIDDEN))
    b1 = np.zeros(_HIDDEN)
    w2 = _xavier(rng, _HIDDEN, 1, (_HIDDEN,))
    return MLPMapper(
        "random-mlp",
        W1,
        b1,
        w2,
        0.0,
        in_mean=np.zeros(n_in),
        in_scale=np.ones(n_in),
    )


def mapper_predict(mapper, x: np.ndarray):
    """Functional alias for ``mapper.predict`` (continuous mappers)."""

    return mapper.predict(x)


# ---------------------------------------------------------------------------
# categorical mappers


@dataclass(frozen=True)
class ParentStats:
    """Per-parent summary of the values seen in the ancestor sample."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    means: tuple[float, ...]
    scales: tuple[float, ...]

    @classmethod
    def from_samples(cls, X: np.ndarray) -> "ParentStats":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("parent stats need a non-empty sample matrix")
        return cls(
            mins=tuple(float(v) for v in X.min(axis=0)),
            maxs=tuple(float(v) for v in X.max(axis=0)),
            means=tuple(float(v) for v in X.mean(axis=0)),
            scales=tuple(float(v) for v in X.std(axis=0)),
        )

    @property
    def n_inputs(self) -> int:
        return len(self.mins)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.mins) + np.asarray(self.maxs)) / 2.0

    def to_dict(self) -> dict:
        return {
            "mins": list(self.mins),
            "maxs": list(self.maxs),
            "means": list(self.means),
            "scales": list(self.scales),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParentStats":
        return cls(
            mins=tuple(d["mins"]),
            maxs=tuple(d["maxs"]),
            means=tuple(d["means"]),
            scales=tuple(d["scales"]),
        )


class _CentroidBase:
    """Shared storage for centroid-driven categorical mappers."""

    kind: str = ""

    def __init__(self, centroids, classes, n_classes, stats: ParentStats):
        self.centroids = np.asarray(centroids, dtype=float)
        self.classes = np.asarray(classes, dtype=int)
        self.n_classes = int(n_classes)
        self.stats = stats
        if self.centroids.ndim != 2 or len(self.centroids) != len(self.classes):
            raise ValueError("one class per centroid required")
        if set(self.classes.tolist()) != set(range(self.n_classes)):
            raise ValueError("every class needs at least one centroid")

    @property
    def n_inputs(self) -> int:
        return int(self.centroids.shape[1])

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {x.shape[-1]}")
        return x

    def move_centroids(self, rng: np.random.Generator, stats: ParentStats | None = None) -> None:
        """Redraw centroid positions inside the (possibly updated) parent box."""
        if stats is not None:
            self.stats = stats
        lo = np.asarray(self.stats.mins)
        hi = np.asarray(self.stats.maxs)
        self.centroids = rng.uniform(lo, hi, size=self.centroids.shape)

    def _base_dict(self) -> dict:
        return {
            "kind": self.kind,
            "centroids": self.centroids.tolist(),
            "classes": self.classes.tolist(),
            "n_classes": self.n_classes,
            "stats": self.stats.to_dict(),
        }


class PrototypeMapper(_CentroidBase):
    """Nearest-centroid classifier; euclidean or manhattan distance."""

    kind = "prototype"

    def __init__(self, centroids, classes, n_classes, stats, distance="euclidean"):
        if distance not in ("euclidean", "manhattan"):
            raise ValueError(f"unknown distance {distance!r}")
        self.distance = distance
        super().__init__(centroids, classes, n_classes, stats)

    def _dists(self, X: np.ndarray) -> np.ndarray:
        diff = X[:, None, :] - self.centroids[None, :, :]
        if self.distance == "euclidean":
            return np.sqrt((diff * diff).sum(axis=2))
        return np.abs(diff).sum(axis=2)

    def predict(self, x: np.ndarray):
        x = self._check(x)
        single = x.ndim == 1
        X = x[None, :] if single else x
        # argmin returns the first minimum: ties break to the lowest centroid index
        win = np.argmin(self._dists(X), axis=1)
        out = self.classes[win]
        return int(out[0]) if single else out

    def to_dict(self) -> dict:
        d = self._base_dict()
        d["distance"] = self.distance
        return d


class GaussianPrototypeMapper(_CentroidBase):
    """Assigns the class of the isotropic gaussian with highest density.

    Unlike the plain RBF activation this includes the ``s^-k`` normalization,
    so a wide gaussian can win far away even when a narrow one is closer.
    """

    kind = "gaussian-prototype"

    def __init__(self, centroids, classes, n_classes, stats, spreads):
        self.spreads = np.asarray(spreads, dtype=float)
        super().__init__(centroids, classes, n_classes, stats)
        if len(self.spreads) != len(self.classes) or np.any(self.spreads <= 0):
            raise ValueError("one positive spread per centroid required")

    def predict(self, x: np.ndarray):
        x = self._check(x)
        single = x.ndim == 1
        X = x[None, :] if single else x
        diff = X[:, None, :] - self.centroids[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        k = self.n_inputs
        logdens = -d2 / (2.0 * self.spreads**2) - k * np.log(self.spreads)
        win = np.argmax(logdens, axis=1)
        out = self.classes[win]
        return int(out[0]) if single else out

    def to_dict(self) -> dict:
        d = self._base_dict()
        d["spreads"] = self.spreads.tolist()
        return d


class RadialBasisMapper(_CentroidBase):
    """Assigns the class of the maximum RBF activation exp(-d^2 / 2s^2)."""

    kind = "random-rbf"

    def __init__(self, centroids, classes, n_classes, stats, spreads):
        self.spreads = np.asarray(spreads, dtype=float)
        super().__init__(centroids, classes, n_classes, stats)
        if len(self.spreads) != len(self.classes) or np.any(self.spreads <= 0):
            raise ValueError("one positive spread per centroid required")

    def predict(self, x: np.ndarray):
        x = self._check(x)
        single = x.ndim == 1
        X = x[None, :] if single else x
        diff = X[:, None, :] - self.centroids[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        act = -d2 / (2.0 * self.spreads**2)  # log of the activation, same argmax
        win = np.argmax(act, axis=1)
        out = self.classes[win]
        return int(out[0]) if single else out

    def to_dict(self) -> dict:
        d = self._base_dict()
        d["spreads"] = self.spreads.tolist()
        return d


class HyperplaneMapper:
    """Binary classifier: class 1 iff w . x + b > 0."""

    kind = "hyperplane"

    def __init__(self, w, b, stats: ParentStats):
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)
        self.n_classes = 2
        self.stats = stats

    @property
    def n_inputs(self) -> int:
        return int(self.w.shape[0])

    def predict(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {x.shape[-1]}")
        single = x.ndim == 1
        X = x[None, :] if single else x
        out = (X @ self.w + self.b > 0).astype(int)
        return int(out[0]) if single else out

    def rotate(self, angle_rad: float, plane_dir: np.ndarray) -> None:
        """Rotate ``w`` by ``angle_rad`` toward the orthogonal unit ``plane_dir``.

        The bias is recomputed so the plane keeps passing through the parent
        box centre.  With a single input the rotation degenerates to scaling
        by cos(angle), flipping the sign past 90 degrees.
        """
        norm = float(np.linalg.norm(self.w))
        if self.n_inputs == 1:
            self.w = self.w * np.cos(angle_rad)
        else:
            u = np.asarray(plane_dir, dtype=float)
            self.w = np.cos(angle_rad) * self.w + np.sin(angle_rad) * norm * u
        self.b = -float(self.w @ self.stats.center)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "w": self.w.tolist(),
            "b": self.b,
            "n_classes": 2,
            "stats": self.stats.to_dict(),
        }


def init_categorical_mapper(
    kind: str,
    n_classes: int,
    parent_stats: ParentStats,
    rng: np.random.Generator,
    n_centroids_range: tuple[int, int] = (1, 3),
    distance: str = "euclidean",
):
    """Initialize a categorical mapper from parent statistics.

    Centroids are drawn uniformly inside the parent min/max box, 1-3 per
    class (a class may own several centroids); spreads are a uniform 0.1-0.5
    fraction of the mean parent scale.  Draw order per class: count, then
    centroid coordinates, then spreads.
    """

    if kind not in CATEGORICAL_KINDS:
        raise ValueError(f"unknown categorical mapper kind {kind!r}")
    if n_classes < 2:
        raise ValueError("need at least two classes")
    lo = np.asarray(parent_stats.mins, dtype=float)
    hi = np.asarray(parent_stats.maxs, dtype=float)
    if np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)):
        raise ValueError("parent stats must be finite")
    if np.any(hi <= lo):
        raise ValueError("degenerate parent box: min == max on some axis")
    c_lo, c_hi = n_centroids_range
    if not 1 <= c_lo <= c_hi <= 3:
        raise ValueError("centroid count range must lie within [1, 3]")

    if kind == "hyperplane":
        if n_classes != 2:
            raise ValueError("hyperplane mapper is binary only")
        w = rng.normal(size=parent_stats.n_inputs)
        w /= np.linalg.norm(w)
        b = -float(w @ parent_stats.center)
        return HyperplaneMapper(w, b, parent_stats)

    scale_ref = float(np.mean(parent_stats.scales))
    if scale_ref <= 0:
        scale_ref = float(np.mean(hi - lo)) / np.sqrt(12.0)
    centroids = []
    classes = []
    spreads = []
    for c in range(n_classes):
        m = int(rng.integers(c_lo, c_hi + 1))
        centroids.append(rng.uniform(lo, hi, size=(m, len(lo))))
        classes.extend([c] * m)
        if kind in ("gaussian-prototype", "random-rbf"):
            spreads.extend(rng.uniform(0.1, 0.5, size=m) * scale_ref)
    centroids = np.vstack(centroids)
    if kind == "prototype":
        return PrototypeMapper(centroids, classes, n_classes, parent_stats, distance)
    if kind == "gaussian-prototype":
        return GaussianPrototypeMapper(centroids, classes, n_classes, parent_stats, spreads)
    return RadialBasisMapper(centroids, classes, n_classes, parent_stats, spreads)


def categorical_predict(mapper, x: np.ndarray):
    """Functional alias for ``mapper.predict`` (categorical mappers)."""

    return mapper.predict(x)


# ---------------------------------------------------------------------------
# serialization


def mapper_from_dict(d: dict):
    kind = d["kind"]
    if kind in ("learned-mlp", "random-mlp"):
        return MLPMapper(
            kind,
            d["W1"],
            d["b1"],
            d["w2"],
            d["b2"],
            in_mean=d["in_mean"],
            in_scale=d["in_scale"],
            out_mean=d["out_mean"],
            out_scale=d["out_scale"],
            fitted_target=None
            if d["fitted_target"] is None
            else TargetFunction.from_dict(d["fitted_target"]),
        )
    if kind == "regression-tree":
        return RegressionTreeMapper(
            d["feature"],
            d["threshold"],
            d["left"],
            d["right"],
            d["value"],
            d["max_depth"],
            in_mean=d["in_mean"],
            in_scale=d["in_scale"],
            out_mean=d["out_mean"],
            out_scale=d["out_scale"],
            fitted_target=None
            if d["fitted_target"] is None
            else TargetFunction.from_dict(d["fitted_target"]),
        )
    if kind == "sgd-linear":
        return SGDLinearMapper(
            d["w"],
            d["b"],
            in_mean=d["in_mean"],
            in_scale=d["in_scale"],
            out_mean=d["out_mean"],
            out_scale=d["out_scale"],
            fitted_target=None
            if d["fitted_target"] is None
            else TargetFunction.from_dict(d["fitted_target"]),
        )
    stats = ParentStats.from_dict(d["stats"])
    if kind == "prototype":
        return PrototypeMapper(
            d["centroids"], d["classes"], d["n_classes"], stats, d["distance"]
        )
    if kind == "gaussian-prototype":
        return GaussianPrototypeMapper(
            d["centroids"], d["classes"], d["n_classes"], stats, d["spreads"]
        )
    if kind == "random-rbf":
        return RadialBasisMapper(
            d["centroids"], d["classes"], d["n_classes"], stats, d["spreads"]
        )
    if kind == "hyperplane":
        return HyperplaneMapper(d["w"], d["b"], stats)
    raise ValueError(f"unknown mapper kind {kind!r}")


def serialize_params(mapper) -> bytes:
    """Canonical byte serialization of a mapper's parameters."""

    return json.dumps(mapper.to_dict(), sort_keys=True, separators=(",", ":")).encode()
