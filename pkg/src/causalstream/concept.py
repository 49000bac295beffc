"""A concept binds a graph to concrete distributions and mappers.

Initialization walks the graph in topological order.  Each root draws a
distribution; each inner node draws a mapper kind (the target's kind is
forced by the task) and is fitted on a warmup simulation of its parents:
1024 steps of the same temporal process the generator will run, so fit-time
marginals match generation-time marginals even at small alpha, where root
values concentrate far below the raw distribution spread.

Snapshots are full deep serializations (graph, distributions, mapper
parameters, class permutation, temporal state) with exact float round-trip;
restoring one never restores the temporal state, which keeps dynamics
continuous across recurrent drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph import CausalGraph
from .mappers import (
    CATEGORICAL_KINDS,
    CONTINUOUS_KINDS,
    TARGET_FN_KINDS,
    ParentStats,
    RootDistribution,
    TargetFunction,
    draw_target_function,
    fit_continuous_mapper,
    init_categorical_mapper,
    init_random_mlp,
    mapper_from_dict,
)
from .temporal import TemporalParams, TemporalState, simulate_ar_noise, simulate_root_values

__all__ = [
    "ConceptParams",
    "Concept",
    "ConceptSnapshot",
    "init_concept",
    "snapshot_concept",
    "restore_concept",
    "deterministic_label",
    "simulate_concept_samples",
]

_LEARNED_KINDS = ("learned-mlp", "regression-tree", "sgd-linear")


@dataclass(frozen=True)
class ConceptParams:
    """Ranges and pins controlling concept initialization.

    ``nodes`` maps node id to a pin dict; recognized pin keys are ``dist``,
    ``dist_params``, ``mapper``, ``target_fn``, ``distance`` and
    ``n_classes`` (categorical feature nodes only).
    """

    task: str = "classification"
    n_classes: int = 2
    p_categorical: float = 0.25
    feature_classes_range: tuple[int, int] = (2, 5)
    centroids_per_class: tuple[int, int] = (1, 3)
    eps_scale: float = 0.05
    fit_samples: int = 1024
    mean_range: tuple[float, float] = (-5.0, 5.0)
    variance_range: tuple[float, float] = (0.25, 4.0)
    low_range: tuple[float, float] = (-5.0, 0.0)
    width_range: tuple[float, float] = (1.0, 10.0)
    nodes: dict[int, dict] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == "classification" and self.n_classes < 2:
            raise ValueError("classification needs at least two classes")
        if not 0.0 <= self.p_categorical <= 1.0:
            raise ValueError("p_categorical must lie in [0, 1]")
        if self.fit_samples < 2:
            raise ValueError("fit_samples must be at least 2")
        if self.eps_scale < 0:
            raise ValueError("eps_scale must be non-negative")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "n_classes": self.n_classes,
            "p_categorical": self.p_categorical,
            "feature_classes_range": list(self.feature_classes_range),
            "centroids_per_class": list(self.centroids_per_class),
            "eps_scale": self.eps_scale,
            "fit_samples": self.fit_samples,
            "mean_range": list(self.mean_range),
            "variance_range": list(self.variance_range),
            "low_range": list(self.low_range),
            "width_range": list(self.width_range),
            "nodes": {str(k): dict(v) for k, v in sorted(self.nodes.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConceptParams":
        return cls(
            task=d["task"],
            n_classes=int(d["n_classes"]),
            p_categorical=float(d["p_categorical"]),
            feature_classes_range=tuple(d["feature_classes_range"]),
            centroids_per_class=tuple(d["centroids_per_class"]),
            eps_scale=float(d["eps_scale"]),
            fit_samples=int(d["fit_samples"]),
            mean_range=tuple(d["mean_range"]),
            variance_range=tuple(d["variance_range"]),
            low_range=tuple(d["low_range"]),
            width_range=tuple(d["width_range"]),
            nodes={int(k): dict(v) for k, v in d.get("nodes", {}).items()},
        )


@dataclass(eq=False)
class Concept:
    """Everything needed to turn the graph into values at one point in time."""

    graph: CausalGraph
    params: ConceptParams
    temporal: TemporalParams
    root_dists: dict[int, RootDistribution]
    mappers: dict[int, object]
    class_permutation: tuple[int, ...] | None

    @property
    def task(self) -> str:
        return self.params.task

    @property
    def n_classes(self) -> int | None:
        if self.task == "regression":
            return None
        return self.mappers[self.graph.target].n_classes

    @property
    def target_fns(self) -> dict[int, TargetFunction]:
        out = {}
        for node, m in self.mappers.items():
            fn = getattr(m, "fitted_target", None)
            if fn is not None:
                out[node] = fn
        return out

    def mapper_kind(self, node: int) -> str:
        return self.mappers[node].kind

    def is_categorical(self, node: int) -> bool:
        return (
            node in self.mappers and self.mappers[node].kind in CATEGORICAL_KINDS
        )

    @property
    def continuous_nodes(self) -> tuple[int, ...]:
        """Nodes that carry AR noise: roots plus continuous-mapped inners."""
        out = list(self.graph.roots)
        for node in self.graph.topo_order:
            if node in self.mappers and self.mappers[node].kind in CONTINUOUS_KINDS:
                out.append(node)
        return tuple(sorted(out))

    def noise_scale(self, node: int) -> float:
        """Per-node AR innovation multiplier, in the node's own output units."""
        if self.graph.is_root(node):
            return self.root_dists[node].std()
        return float(self.mappers[node].out_scale)

    def initial_state(self) -> TemporalState:
        return TemporalState.initial(self.root_dists, self.continuous_nodes)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "params": self.params.to_dict(),
            "temporal": self.temporal.to_dict(),
            "root_dists": {
                str(n): d.to_dict() for n, d in sorted(self.root_dists.items())
            },
            "mappers": {str(n): m.to_dict() for n, m in sorted(self.mappers.items())},
            "class_permutation": None
            if self.class_permutation is None
            else list(self.class_permutation),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Concept":
        return cls(
            graph=CausalGraph.from_dict(d["graph"]),
            params=ConceptParams.from_dict(d["params"]),
            temporal=TemporalParams.from_dict(d["temporal"]),
            root_dists={
                int(n): RootDistribution.from_dict(v)
                for n, v in d["root_dists"].items()
            },
            mappers={int(n): mapper_from_dict(v) for n, v in d["mappers"].items()},
            class_permutation=None
            if d["class_permutation"] is None
            else tuple(int(c) for c in d["class_permutation"]),
        )

    def copy(self) -> "Concept":
        return Concept.from_dict(self.to_dict())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Concept):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class ConceptSnapshot:
    """Deep serialized copy of a concept plus the temporal state at capture.

    Restoring applies the concept only; the captured state is recorded for
    run files and inspection but deliberately not fed back into a stream.
    """

    concept: dict
    state: dict

    def to_json(self) -> str:
        return json.dumps({"concept": self.concept, "state": self.state}, sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "ConceptSnapshot":
        d = json.loads(s)
        return cls(concept=d["concept"], state=d["state"])


def snapshot_concept(concept: Concept, state: TemporalState) -> ConceptSnapshot:
    # round-tripping through JSON guarantees the snapshot shares nothing
    # mutable with the live concept
    return ConceptSnapshot(
        concept=json.loads(json.dumps(concept.to_dict())),
        state=json.loads(json.dumps(state.to_dict())),
    )


def restore_concept(snap: ConceptSnapshot) -> Concept:
    return Concept.from_dict(snap.concept)


def deterministic_label(concept: Concept, node_values: Mapping[int, float]) -> int:
    """Noise-free label for explicit target-parent values.

    Applies the target mapper, then the concept's class permutation.  Values
    for every parent of the target must be supplied.
    """

    if concept.task != "classification":
        raise ValueError("deterministic labels exist only for classification")
    target = concept.graph.target
    parents = concept.graph.parents[target]
    try:
        vec = np.asarray([float(node_values[p]) for p in parents])
    except KeyError as missing:
        raise ValueError(f"missing value for target parent {missing}") from None
    raw = concept.mappers[target].predict(vec)
    return int(concept.class_permutation[raw])


# ---------------------------------------------------------------------------
# initialization


def _draw_root_dist(params: ConceptParams, pin: dict, rng) -> RootDistribution:
    kind = pin.get("dist")
    if kind is None:
        kind = ("normal", "uniform")[int(rng.integers(2))]
    if "dist_params" in pin:
        p1, p2 = (float(v) for v in pin["dist_params"])
        return RootDistribution(kind, p1, p2)
    if kind == "normal":
        mean = float(rng.uniform(*params.mean_range))
        var = float(rng.uniform(*params.variance_range))
        return RootDistribution("normal", mean, var)
    if kind == "uniform":
        low = float(rng.uniform(*params.low_range))
        width = float(rng.uniform(*params.width_range))
        return RootDistribution("uniform", low, low + width)
    raise ValueError(f"unknown distribution kind {kind!r}")


def _categorical_menu(n_classes: int) -> tuple[str, ...]:
    menu = ("prototype", "gaussian-prototype", "random-rbf")
    return menu + ("hyperplane",) if n_classes == 2 else menu


def _resolve_inner_kind(
    node: int, target: int, params: ConceptParams, pin: dict, rng
) -> tuple[str, int | None]:
    """Returns (mapper kind, n_classes or None) for an inner node."""

    pinned = pin.get("mapper")
    if node == target:
        if params.task == "classification":
            ncls = params.n_classes
            if pinned is not None:
                if pinned not in CATEGORICAL_KINDS:
                    raise ValueError(
                        f"target {node} pinned to {pinned!r}; classification "
                        "requires a categorical mapper"
                    )
                return pinned, ncls
            menu = _categorical_menu(ncls)
            return menu[int(rng.integers(len(menu)))], ncls
        if pinned is not None:
            if pinned not in CONTINUOUS_KINDS:
                raise ValueError(
                    f"target {node} pinned to {pinned!r}; regression requires "
                    "a continuous mapper"
                )
            return pinned, None
        return _LEARNED_KINDS[int(rng.integers(len(_LEARNED_KINDS)))], None
    if pinned is not None:
        if pinned in CATEGORICAL_KINDS:
            ncls = int(pin.get("n_classes", 0)) or int(
                rng.integers(
                    params.feature_classes_range[0],
                    params.feature_classes_range[1] + 1,
                )
            )
            if pinned == "hyperplane" and ncls != 2:
                raise ValueError("hyperplane feature nodes must be binary")
            return pinned, ncls
        if pinned in CONTINUOUS_KINDS:
            return pinned, None
        raise ValueError(f"unknown mapper kind {pinned!r} pinned on node {node}")
    if rng.random() < params.p_categorical:
        ncls = int(
            rng.integers(
                params.feature_classes_range[0], params.feature_classes_range[1] + 1
            )
        )
        menu = _categorical_menu(ncls)
        return menu[int(rng.integers(len(menu)))], ncls
    return CONTINUOUS_KINDS[int(rng.integers(len(CONTINUOUS_KINDS)))], None


def _fit_inner_node(
    concept_mappers: dict,
    node: int,
    kind: str,
    ncls: int | None,
    P: np.ndarray,
    params: ConceptParams,
    temporal: TemporalParams,
    pin: dict,
    rng,
) -> np.ndarray:
    """Create the mapper for ``node`` and return its warmup column."""

    if kind in CATEGORICAL_KINDS:
        stats = ParentStats.from_samples(P)
        distance = pin.get("distance")
        if kind == "prototype" and distance is None:
            distance = ("euclidean", "manhattan")[int(rng.integers(2))]
        mapper = init_categorical_mapper(
            kind,
            ncls,
            stats,
            rng,
            n_centroids_range=params.centroids_per_class,
            distance=distance or "euclidean",
        )
        concept_mappers[node] = mapper
        return mapper.predict(P).astype(float)

    if kind == "random-mlp":
        mapper = init_random_mlp(P.shape[1], rng)
        mean = P.mean(axis=0)
        scale = P.std(axis=0)
        mapper.in_mean = mean
        mapper.in_scale = np.where(scale > 0, scale, 1.0)
        preds = mapper.predict(P)
        mapper.out_mean = float(preds.mean())
        out_scale = float(preds.std())
        mapper.out_scale = out_scale if out_scale > 0 else 1.0
    else:
        fn_kind = pin.get("target_fn")
        if fn_kind is None:
            fn_kind = TARGET_FN_KINDS[int(rng.integers(len(TARGET_FN_KINDS)))]
        elif fn_kind not in TARGET_FN_KINDS:
            raise ValueError(f"unknown target function {fn_kind!r} on node {node}")
        fn = draw_target_function(fn_kind, P.shape[1], rng)
        mapper = fit_continuous_mapper(kind, P, fn, rng, eps_scale=params.eps_scale)
        preds = mapper.predict(P)
    concept_mappers[node] = mapper
    noise = simulate_ar_noise(len(P), temporal, rng, sigma_scale=mapper.out_scale)
    return preds + noise


def _init_once(
    graph: CausalGraph, params: ConceptParams, temporal: TemporalParams, rng
) -> Concept:
    n_fit = params.fit_samples
    warm = np.empty((n_fit, graph.n_nodes))
    root_dists: dict[int, RootDistribution] = {}
    mappers: dict[int, object] = {}

    for node in graph.topo_order:
        pin = params.nodes.get(node, {})
        if graph.is_root(node):
            dist = _draw_root_dist(params, pin, rng)
            root_dists[node] = dist
            warm[:, node] = simulate_root_values(n_fit, dist, temporal, rng)
            continue
        P = warm[:, graph.parents[node]]
        kind, ncls = _resolve_inner_kind(node, graph.target, params, pin, rng)
        warm[:, node] = _fit_inner_node(
            mappers, node, kind, ncls, P, params, temporal, pin, rng
        )

    permutation = (
        tuple(range(params.n_classes)) if params.task == "classification" else None
    )
    return Concept(
        graph=graph,
        params=params,
        temporal=temporal,
        root_dists=root_dists,
        mappers=mappers,
        class_permutation=permutation,
    )


def init_concept(
    graph: CausalGraph,
    params: ConceptParams,
    rng: np.random.Generator,
    temporal: TemporalParams | None = None,
) -> Concept:
    """Initialize a concept; one retry with a fresh substream on fit failure."""

    temporal = temporal if temporal is not None else TemporalParams()
    seeds = rng.integers(0, 2**63, size=2, dtype=np.uint64)
    try:
        return _init_once(graph, params, temporal, np.random.default_rng(int(seeds[0])))
    except ValueError:
        return _init_once(graph, params, temporal, np.random.default_rng(int(seeds[1])))


def simulate_concept_samples(
    concept: Concept,
    n: int,
    rng: np.random.Generator,
    upto: int | None = None,
) -> np.ndarray:
    """Fresh ancestor simulation with the concept's current parameters.

    Walks the same warmup process used at fit time.  If ``upto`` is given,
    columns after that node's topological position are left empty (drift
    refits only need the ancestors of one node).
    """

    out = np.empty((n, concept.graph.n_nodes))
    for node in concept.graph.topo_order:
        if concept.graph.is_root(node):
            out[:, node] = simulate_root_values(
                n, concept.root_dists[node], concept.temporal, rng
            )
        else:
            mapper = concept.mappers[node]
            P = out[:, concept.graph.parents[node]]
            if mapper.kind in CATEGORICAL_KINDS:
                out[:, node] = mapper.predict(P).astype(float)
            else:
                noise = simulate_ar_noise(
                    n, concept.temporal, rng, sigma_scale=mapper.out_scale
                )
                out[:, node] = mapper.predict(P) + noise
        if upto is not None and node == upto:
            break
    return out
