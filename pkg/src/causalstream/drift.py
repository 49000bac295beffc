"""Concept drift events, intervention policies, and their application.

A shift event carries one or more actions applied atomically: the paper-style
schedules pair e.g. a centroid move with a target-function change in a single
event.  Event windows ``[t_start, t_start + duration)`` never overlap.

Rates: ``abrupt`` events apply instantly (duration 1).  ``gradual`` events
keep the old and new concept alive over the window and pick, per instance,
which one generates it (linear ramp).  ``incremental`` events interpolate
numeric parameters toward the abrupt endpoint in equal fractions per step,
landing exactly on the endpoint; an sgd-linear target-function change instead
takes one partial-fit step per instance on a sample from the new function.
``recurrent`` events restore an earlier concept snapshot, never its temporal
state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .concept import (
    Concept,
    ConceptSnapshot,
    restore_concept,
    simulate_concept_samples,
)
from .mappers import (
    ParentStats,
    RootDistribution,
    TargetFunction,
    draw_target_function,
    eval_target_function,
    fit_continuous_mapper,
)

__all__ = [
    "MECHANISMS",
    "SHIFT_KINDS",
    "SHIFT_RATES",
    "ShiftAction",
    "ShiftSpec",
    "DriftSchedule",
    "InterventionPolicy",
    "apply_abrupt",
    "apply_recurrent",
    "begin_gradual",
    "gradual_selector",
    "begin_incremental",
    "incremental_step",
    "IncrementalPlan",
    "draw_interventions",
    "draw_missing",
    "validate_schedule_against",
]

MECHANISMS = (
    "refit-new-target-fn",
    "reinit-random-mlp",
    "move-prototypes",
    "change-distance",
    "rotate-hyperplane",
    "swap-classes",
    "root-params",
)
SHIFT_KINDS = ("distributional", "covariate", "severe", "local", "recurrent")
SHIFT_RATES = ("abrupt", "gradual", "incremental")

_DISTRIBUTIONAL_MECHS = (
    "refit-new-target-fn",
    "reinit-random-mlp",
    "move-prototypes",
    "change-distance",
    "rotate-hyperplane",
)
# mechanisms an incremental window can advance one step at a time
_INCREMENTAL_MECHS = (
    "root-params",
    "move-prototypes",
    "rotate-hyperplane",
    "reinit-random-mlp",
    "refit-new-target-fn",
)


@dataclass(frozen=True)
class ShiftAction:
    mechanism: str
    node: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.mechanism == "swap-classes":
            if self.node is not None:
                raise ValueError("swap-classes acts on the label, not a node")
        elif self.node is None:
            raise ValueError(f"{self.mechanism} needs a node")

    def to_dict(self) -> dict:
        return {"mechanism": self.mechanism, "node": self.node, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftAction":
        return cls(
            mechanism=d["mechanism"],
            node=d.get("node"),
            params=dict(d.get("params", {})),
        )


@dataclass(frozen=True)
class ShiftSpec:
    kind: str
    rate: str
    t_start: int
    duration: int = 1
    actions: tuple[ShiftAction, ...] = ()
    snapshot_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in SHIFT_KINDS:
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.rate not in SHIFT_RATES:
            raise ValueError(f"unknown shift rate {self.rate!r}")
        if self.t_start < 0:
            raise ValueError("t_start must be non-negative")
        if self.duration < 1:
            raise ValueError("duration must be at least 1")
        if (self.rate == "abrupt") != (self.duration == 1):
            raise ValueError("abrupt events have duration 1, and only they do")
        if self.kind == "recurrent":
            if self.snapshot_id is None:
                raise ValueError("recurrent shift needs a snapshot id")
            if self.actions:
                raise ValueError("recurrent shift takes no actions")
            if self.rate != "abrupt":
                raise ValueError("recurrent shifts are abrupt")
            return
        if self.snapshot_id is not None:
            raise ValueError("snapshot id is only for recurrent shifts")
        if not self.actions:
            raise ValueError("shift needs at least one action")
        mechs = [a.mechanism for a in self.actions]
        if self.kind in ("covariate", "local"):
            if any(m != "root-params" for m in mechs):
                raise ValueError(f"{self.kind} shift uses root-params only")
            if self.kind == "local" and len(self.actions) != 1:
                raise ValueError("local shift changes exactly one node")
        elif self.kind == "severe":
            if mechs != ["swap-classes"]:
                raise ValueError("severe shift is exactly one swap-classes action")
        else:  # distributional
            bad = [m for m in mechs if m not in _DISTRIBUTIONAL_MECHS]
            if bad:
                raise ValueError(
                    f"distributional shift cannot use {bad[0]!r}"
                )
        if self.rate == "incremental":
            bad = [m for m in mechs if m not in _INCREMENTAL_MECHS]
            if bad:
                raise ValueError(f"{bad[0]!r} cannot be applied incrementally")

    @property
    def t_end(self) -> int:
        return self.t_start + self.duration

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rate": self.rate,
            "t_start": self.t_start,
            "duration": self.duration,
            "actions": [a.to_dict() for a in self.actions],
            "snapshot_id": self.snapshot_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftSpec":
        return cls(
            kind=d["kind"],
            rate=d["rate"],
            t_start=int(d["t_start"]),
            duration=int(d.get("duration", 1)),
            actions=tuple(ShiftAction.from_dict(a) for a in d.get("actions", [])),
            snapshot_id=d.get("snapshot_id"),
        )


@dataclass(frozen=True)
class DriftSchedule:
    events: tuple[ShiftSpec, ...] = ()

    def __post_init__(self) -> None:
        starts = [e.t_start for e in self.events]
        if starts != sorted(starts):
            raise ValueError("events must be sorted by t_start")
        for a, b in zip(self.events, self.events[1:]):
            if a.t_end > b.t_start:
                raise ValueError(
                    f"event windows overlap: [{a.t_start},{a.t_end}) and "
                    f"[{b.t_start},{b.t_end})"
                )

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def to_dict(self) -> dict:
        return {"events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, d: dict) -> "DriftSchedule":
        return cls(events=tuple(ShiftSpec.from_dict(e) for e in d.get("events", [])))


@dataclass(frozen=True)
class InterventionPolicy:
    """Per-instance chances of forced node values and masked emissions."""

    p_intervene: float = 0.0
    p_missing: float = 0.0
    count_range: tuple[int, int] = (1, 3)
    include_target: bool = False
    values: dict[int, dict] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_intervene <= 1.0:
            raise ValueError("p_intervene must lie in [0, 1]")
        if not 0.0 <= self.p_missing <= 1.0:
            raise ValueError("p_missing must lie in [0, 1]")
        lo, hi = self.count_range
        if not 1 <= lo <= hi <= 3:
            raise ValueError("count range must lie within [1, 3]")

    def to_dict(self) -> dict:
        return {
            "p_intervene": self.p_intervene,
            "p_missing": self.p_missing,
            "count_range": list(self.count_range),
            "include_target": self.include_target,
            "values": {str(k): dict(v) for k, v in sorted(self.values.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InterventionPolicy":
        return cls(
            p_intervene=float(d.get("p_intervene", 0.0)),
            p_missing=float(d.get("p_missing", 0.0)),
            count_range=tuple(d.get("count_range", (1, 3))),
            include_target=bool(d.get("include_target", False)),
            values={int(k): dict(v) for k, v in d.get("values", {}).items()},
        )


# ---------------------------------------------------------------------------
# action application


def _parent_matrix(concept: Concept, node: int, rng) -> np.ndarray:
    """Fresh ancestor sample of ``node``'s parents under the current concept."""

    parents = concept.graph.parents[node]
    pos = {n: i for i, n in enumerate(concept.graph.topo_order)}
    upto = max(parents, key=lambda p: pos[p])
    sim = simulate_concept_samples(concept, concept.params.fit_samples, rng, upto=upto)
    return sim[:, parents]


def _shift_root_dist(
    dist: RootDistribution, params: dict, concept: Concept, rng
) -> RootDistribution:
    if params.get("redraw"):
        cp = concept.params
        if dist.kind == "normal":
            return RootDistribution(
                "normal",
                float(rng.uniform(*cp.mean_range)),
                float(rng.uniform(*cp.variance_range)),
            )
        low = float(rng.uniform(*cp.low_range))
        return RootDistribution("uniform", low, low + float(rng.uniform(*cp.width_range)))
    p1, p2 = dist.p1, dist.p2
    if "shift_std" in params:
        delta = float(params["shift_std"]) * dist.std()
        if dist.kind == "normal":
            p1 += delta
        else:
            p1 += delta
            p2 += delta
    if "scale_factor" in params:
        f = float(params["scale_factor"])
        if f <= 0:
            raise ValueError("scale_factor must be positive")
        if dist.kind == "normal":
            p2 *= f * f
        else:
            c = (p1 + p2) / 2.0
            half = (p2 - p1) / 2.0 * f
            p1, p2 = c - half, c + half
    if dist.kind == "normal":
        p1 = float(params.get("mean", p1))
        p2 = float(params.get("variance", p2))
    else:
        p1 = float(params.get("low", p1))
        p2 = float(params.get("high", p2))
    return RootDistribution(dist.kind, p1, p2)


def _draw_new_target_fn(concept: Concept, node: int, params: dict, rng) -> str:
    current = concept.mappers[node].fitted_target
    kind = params.get("target_fn")
    if kind is None:
        from .mappers import TARGET_FN_KINDS

        menu = [k for k in TARGET_FN_KINDS if current is None or k != current.kind]
        kind = menu[int(rng.integers(len(menu)))]
    return kind


def _orthogonal_unit(w: np.ndarray, rng) -> np.ndarray:
    if w.shape[0] == 1:
        return np.zeros(1)
    for _ in range(8):
        v = rng.normal(size=w.shape[0])
        v = v - (v @ w) / (w @ w) * w
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm
    raise ValueError("could not draw a direction orthogonal to the hyperplane")


def _apply_action(concept: Concept, action: ShiftAction, rng) -> None:
    """Apply one action in place.  Draw order is fixed per mechanism."""

    mech = action.mechanism
    if mech == "swap-classes":
        if concept.task != "classification":
            raise ValueError("swap-classes requires a classification concept")
        n = concept.n_classes
        c1 = action.params.get("c1")
        c2 = action.params.get("c2")
        if c1 is None or c2 is None:
            pair = rng.choice(n, size=2, replace=False)
            c1, c2 = int(pair[0]), int(pair[1])
        c1, c2 = int(c1), int(c2)
        if c1 == c2 or not (0 <= c1 < n and 0 <= c2 < n):
            raise ValueError(f"cannot swap classes {c1} and {c2} of {n}")
        swap = {c1: c2, c2: c1}
        concept.class_permutation = tuple(
            swap.get(v, v) for v in concept.class_permutation
        )
        return

    node = action.node
    if node is None or not 0 <= node < concept.graph.n_nodes:
        raise ValueError(f"shift action names unknown node {node}")

    if mech == "root-params":
        if not concept.graph.is_root(node):
            raise ValueError(f"root-params targets a root node, {node} is not one")
        concept.root_dists[node] = _shift_root_dist(
            concept.root_dists[node], action.params, concept, rng
        )
        return

    mapper = concept.mappers.get(node)
    if mapper is None:
        raise ValueError(f"node {node} has no mapper")

    if mech == "refit-new-target-fn":
        if mapper.kind not in ("learned-mlp", "regression-tree", "sgd-linear"):
            raise ValueError(
                f"refit-new-target-fn needs a fitted continuous mapper, node {node} "
                f"is {mapper.kind}"
            )
        fn_kind = _draw_new_target_fn(concept, node, action.params, rng)
        P = _parent_matrix(concept, node, rng)
        fn = draw_target_function(fn_kind, P.shape[1], rng)
        concept.mappers[node] = fit_continuous_mapper(
            mapper.kind, P, fn, rng, eps_scale=concept.params.eps_scale
        )
    elif mech == "reinit-random-mlp":
        if mapper.kind != "random-mlp":
            raise ValueError(f"node {node} is {mapper.kind}, not random-mlp")
        mapper.reinit(rng)
    elif mech == "move-prototypes":
        if not hasattr(mapper, "move_centroids"):
            raise ValueError(f"node {node} ({mapper.kind}) has no centroids to move")
        P = _parent_matrix(concept, node, rng)
        mapper.move_centroids(rng, ParentStats.from_samples(P))
    elif mech == "change-distance":
        if mapper.kind != "prototype":
            raise ValueError("change-distance applies to prototype mappers")
        new = action.params.get("distance")
        if new is None:
            new = "manhattan" if mapper.distance == "euclidean" else "euclidean"
        if new not in ("euclidean", "manhattan"):
            raise ValueError(f"unknown distance {new!r}")
        mapper.distance = new
    elif mech == "rotate-hyperplane":
        if mapper.kind != "hyperplane":
            raise ValueError("rotate-hyperplane applies to hyperplane mappers")
        angle = action.params.get("angle_deg")
        if angle is None:
            angle = float(rng.uniform(30.0, 150.0))
        u = _orthogonal_unit(mapper.w, rng)
        mapper.rotate(np.deg2rad(float(angle)), u)
    else:  # pragma: no cover - mechanisms are validated upstream
        raise ValueError(mech)


def apply_abrupt(concept: Concept, spec: ShiftSpec, rng) -> Concept:
    """Apply all actions of an event to a copy of the concept."""

    out = concept.copy()
    for action in spec.actions:
        _apply_action(out, action, rng)
    return out


def apply_recurrent(concept: Concept, snap: ConceptSnapshot) -> Concept:
    """Bring back a snapshotted concept; temporal state is left alone."""

    return restore_concept(snap)


def begin_gradual(concept: Concept, spec: ShiftSpec, rng) -> Concept:
    """Build the fully-shifted endpoint concept for a gradual window."""

    return apply_abrupt(concept, spec, rng)


def gradual_selector(t: int, spec: ShiftSpec, rng) -> bool:
    """True when instance ``t`` should come from the new concept.

    Inside the window the probability ramps linearly: (t - t_start) / duration.
    """

    if t < spec.t_start:
        return False
    if t >= spec.t_end:
        return True
    p = (t - spec.t_start) / spec.duration
    return bool(rng.random() < p)


# ---------------------------------------------------------------------------
# incremental plans


class _Interpolator:
    """Linearly walks one parameter set from start to endpoint."""

    def __init__(self, getter, setter, start, end):
        self._get = getter
        self._set = setter
        self.start = start
        self.end = end

    def step(self, concept: Concept, frac: float, rng) -> None:
        self._set(
            concept,
            [s + frac * (e - s) for s, e in zip(self.start, self.end)]
            if isinstance(self.start, list)
            else self.start + frac * (self.end - self.start),
        )


class _SgdRefit:
    """One partial-fit step per instance toward a new target function."""

    def __init__(self, node: int, fn: TargetFunction):
        self.node = node
        self.fn = fn

    def step(self, concept: Concept, frac: float, rng) -> None:
        mapper = concept.mappers[self.node]
        z = rng.normal(size=mapper.n_inputs)
        y = float(eval_target_function(self.fn, z))
        mapper.partial_fit(z, y)
        if frac >= 1.0:
            mapper.fitted_target = self.fn


class _HyperplaneRotation:
    def __init__(self, node: int, w0: np.ndarray, angle_rad: float, u: np.ndarray):
        self.node = node
        self.w0 = w0
        self.angle = angle_rad
        self.u = u

    def step(self, concept: Concept, frac: float, rng) -> None:
        mapper = concept.mappers[self.node]
        a = frac * self.angle
        if mapper.n_inputs == 1:
            mapper.w = self.w0 * np.cos(a)
        else:
            norm = float(np.linalg.norm(self.w0))
            mapper.w = np.cos(a) * self.w0 + np.sin(a) * norm * self.u
        mapper.b = -float(mapper.w @ mapper.stats.center)


@dataclass
class IncrementalPlan:
    spec: ShiftSpec
    steppers: list

    def step(self, concept: Concept, step_index: int, rng) -> None:
        """Advance to position ``(step_index + 1) / duration`` of the window."""
        frac = (step_index + 1) / self.spec.duration
        for s in self.steppers:
            s.step(concept, frac, rng)


def begin_incremental(concept: Concept, spec: ShiftSpec, rng) -> IncrementalPlan:
    """Freeze start/end parameters for every action of an incremental event.

    Endpoint draws (new distribution parameters, centroid positions, rotation
    angle, fresh weights, new target function) all happen here, before the
    first step.
    """

    steppers = []
    for action in spec.actions:
        mech = action.mechanism
        node = action.node
        if mech == "root-params":
            if not concept.graph.is_root(node):
                raise ValueError(f"root-params targets a root node, {node} is not one")
            start = concept.root_dists[node]
            end = _shift_root_dist(start, action.params, concept, rng)
            if end.kind != start.kind:
                raise ValueError("incremental root-params cannot change the family")

            def setter(c, vals, node=node, kind=start.kind):
                c.root_dists[node] = RootDistribution(kind, float(vals[0]), float(vals[1]))

            steppers.append(
                _Interpolator(None, setter, [start.p1, start.p2], [end.p1, end.p2])
            )
        elif mech == "move-prototypes":
            mapper = concept.mappers[node]
            if not hasattr(mapper, "move_centroids"):
                raise ValueError(f"node {node} ({mapper.kind}) has no centroids to move")
            P = _parent_matrix(concept, node, rng)
            stats = ParentStats.from_samples(P)
            start = mapper.centroids.copy()
            end = rng.uniform(
                np.asarray(stats.mins), np.asarray(stats.maxs), size=start.shape
            )

            def setter(c, vals, node=node, stats=stats):
                m = c.mappers[node]
                m.centroids = np.asarray(vals)
                m.stats = stats

            steppers.append(_Interpolator(None, setter, start, end))
        elif mech == "rotate-hyperplane":
            mapper = concept.mappers[node]
            if mapper.kind != "hyperplane":
                raise ValueError("rotate-hyperplane applies to hyperplane mappers")
            angle = action.params.get("angle_deg")
            if angle is None:
                angle = float(rng.uniform(30.0, 150.0))
            u = _orthogonal_unit(mapper.w, rng)
            steppers.append(
                _HyperplaneRotation(node, mapper.w.copy(), np.deg2rad(float(angle)), u)
            )
        elif mech == "reinit-random-mlp":
            mapper = concept.mappers[node]
            if mapper.kind != "random-mlp":
                raise ValueError(f"node {node} is {mapper.kind}, not random-mlp")
            scratch = concept.copy()
            scratch.mappers[node].reinit(rng)
            end_m = scratch.mappers[node]
            start = [mapper.W1.copy(), mapper.b1.copy(), mapper.w2.copy(), np.float64(mapper.b2)]
            end = [end_m.W1, end_m.b1, end_m.w2, np.float64(end_m.b2)]

            def setter(c, vals, node=node):
                m = c.mappers[node]
                m.W1, m.b1, m.w2 = vals[0], vals[1], vals[2]
                m.b2 = float(vals[3])

            steppers.append(_Interpolator(None, setter, start, end))
        elif mech == "refit-new-target-fn":
            mapper = concept.mappers[node]
            if mapper.kind != "sgd-linear":
                raise ValueError(
                    "incremental target-function changes need an sgd-linear mapper; "
                    f"node {node} is {mapper.kind}"
                )
            fn_kind = _draw_new_target_fn(concept, node, action.params, rng)
            fn = draw_target_function(fn_kind, mapper.n_inputs, rng)
            mapper.reset_partial_schedule()
            steppers.append(_SgdRefit(node, fn))
        else:
            raise ValueError(f"{mech!r} cannot be applied incrementally")
    return IncrementalPlan(spec=spec, steppers=steppers)


def incremental_step(concept: Concept, plan: IncrementalPlan, step_index: int, rng) -> None:
    plan.step(concept, step_index, rng)


# ---------------------------------------------------------------------------
# interventions and missing masks


def draw_interventions(
    policy: InterventionPolicy,
    eligible: tuple[int, ...],
    value_specs: dict[int, tuple],
    rng,
) -> dict[int, float | int]:
    """Draw the intervened nodes and their forced values for one instance.

    The probability gate always consumes exactly one draw so toggling the
    policy never shifts other substreams.  Forced values ignore parents by
    construction: they come from the per-node policy distribution.
    """

    gate = rng.random()
    if gate >= policy.p_intervene or not eligible:
        return {}
    lo, hi = policy.count_range
    k = min(int(rng.integers(lo, hi + 1)), len(eligible))
    idx = rng.choice(len(eligible), size=k, replace=False)
    nodes = sorted(eligible[int(i)] for i in idx)
    out: dict[int, float | int] = {}
    for node in nodes:
        spec = value_specs[node]
        if spec[0] == "normal":
            out[node] = float(rng.normal(spec[1], spec[2]))
        elif spec[0] == "uniform":
            out[node] = float(rng.uniform(spec[1], spec[2]))
        elif spec[0] == "classes":
            out[node] = int(rng.integers(spec[1]))
        else:
            raise ValueError(f"unknown forced-value spec {spec!r}")
    return out


def draw_missing(
    policy: InterventionPolicy, feature_nodes: tuple[int, ...], rng
) -> tuple[int, ...]:
    """Draw the emitted-feature nodes masked for one instance."""

    gate = rng.random()
    if gate >= policy.p_missing or not feature_nodes:
        return ()
    lo, hi = policy.count_range
    k = min(int(rng.integers(lo, hi + 1)), len(feature_nodes))
    idx = rng.choice(len(feature_nodes), size=k, replace=False)
    return tuple(sorted(feature_nodes[int(i)] for i in idx))


def validate_schedule_against(schedule: DriftSchedule, concept: Concept) -> None:
    """Check every event's actions against the concept's node kinds."""

    for event in schedule:
        if event.kind == "recurrent":
            continue
        for action in event.actions:
            mech, node = action.mechanism, action.node
            if mech == "swap-classes":
                if concept.task != "classification":
                    raise ValueError("swap-classes requires classification")
                continue
            if node is None or node >= concept.graph.n_nodes or node < 0:
                raise ValueError(f"shift action names unknown node {node}")
            if mech == "root-params":
                if not concept.graph.is_root(node):
                    raise ValueError(
                        f"root-params targets a root node, {node} is not one"
                    )
                continue
            if concept.graph.is_root(node):
                raise ValueError(f"{mech} cannot target root node {node}")
            kind = concept.mappers[node].kind
            if mech == "refit-new-target-fn":
                ok = kind in ("learned-mlp", "regression-tree", "sgd-linear")
                if ok and event.rate == "incremental":
                    ok = kind == "sgd-linear"
            elif mech == "reinit-random-mlp":
                ok = kind == "random-mlp"
            elif mech == "move-prototypes":
                ok = kind in ("prototype", "gaussian-prototype", "random-rbf")
            elif mech == "change-distance":
                ok = kind == "prototype"
            elif mech == "rotate-hyperplane":
                ok = kind == "hyperplane"
            else:  # pragma: no cover
                ok = False
            if not ok:
                raise ValueError(
                    f"mechanism {mech!r} does not apply to node {node} ({kind})"
                )
