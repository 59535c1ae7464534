"""Per-layer assignment of (possibly replicated) head copies to GPU groups.

Replicating a head splits its load evenly across its copies (adjusted weight
w_i / r_i), and copies of one head must sit on distinct GPUs. For each layer
the optimizer scans every replication scheme within budget, solves the
grouping search for each, and keeps the assignment with the smallest load
spread. Ties prefer fewer total copies, then the first grouping in canonical
search order, so results are fully deterministic.

brute_force_best re-derives the same optimum by unpruned enumeration and
exists as the test oracle for the fast path; do not reroute it through the
kernel.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from . import _kernel
from ._kernel.reference import DEFAULT_NODE_BUDGET
from .errors import InfeasibleError, ParseError, ValidationError
from .profiles import ModelProfile
from .schemes import (
    DEFAULT_SCHEME_CAP,
    EnumerationConfig,
    ReplicationScheme,
    enumerate_schemes,
)

BRUTE_FORCE_MAX_COPIES = 12


@dataclass(frozen=True)
class HeadCopy:
    """One copy of a head; replica_count is the head's total copy count."""

    head_id: int
    replica_count: int

    def __post_init__(self):
        if self.head_id < 0:
            raise ValidationError(f"head_id must be nonnegative, got {self.head_id}")
        if self.replica_count < 1:
            raise ValidationError(
                f"replica_count must be positive, got {self.replica_count}"
            )


@dataclass(frozen=True)
class LayerAssignment:
    """Copies of one layer split into GPU groups, plus the achieved spread."""

    groups: tuple[tuple[HeadCopy, ...], ...]
    delta: float


@dataclass(frozen=True)
class AllocationPlan:
    """Per-layer assignments for a whole model under one search config."""

    tp: int
    ch_budget: int
    r_max: int
    layers: tuple[LayerAssignment, ...]


def adjusted_weights(scheme: ReplicationScheme, layer_weights: Sequence[float]) -> list[float]:
    """Per-copy load under a scheme: each of the r copies carries w / r.

    Copies are emitted in head order with replicas adjacent.
    """
    if len(scheme.replicas) != len(layer_weights):
        raise ValidationError(
            f"scheme covers {len(scheme.replicas)} heads, weights {len(layer_weights)}"
        )
    out: list[float] = []
    for r, w in zip(scheme.replicas, layer_weights):
        out.extend([w / r] * r)
    return out


def _canonical_copies(
    scheme: ReplicationScheme, layer_weights: Sequence[float]
) -> tuple[list[float], list[int]]:
    """Copies sorted heaviest-first (ties by head id).

    This order is shared by the search kernel and the brute-force oracle; it
    defines both the exploration order and the deterministic tie-break.
    """
    copies: list[tuple[float, int]] = []
    for head, (r, w) in enumerate(zip(scheme.replicas, layer_weights)):
        adj = w / r
        copies.extend([(adj, head)] * r)
    copies.sort(key=lambda c: (-c[0], c[1]))
    return [c[0] for c in copies], [c[1] for c in copies]


def split_into_groups(
    copies: Sequence[HeadCopy], tp: int, *, equal_split: bool = True
) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every distinct split of copies into tp GPU groups, exactly once.

    Yields tuples of index groups (indices into `copies`), groups ordered by
    first member. Groups are unlabeled and copies of one head are
    interchangeable, so symmetric variants collapse to a single grouping. No
    group may hold two copies of the same head; with equal_split every group
    holds len(copies)/tp copies, otherwise groups just have to be nonempty.
    """
    m = len(copies)
    if tp < 1:
        raise ValidationError(f"tp must be >= 1, got {tp}")
    if equal_split and m % tp != 0:
        raise InfeasibleError(f"{m} copies cannot split into {tp} equal groups")
    if not equal_split and m < tp:
        raise InfeasibleError(f"{m} copies cannot cover {tp} nonempty groups")
    multiplicity: dict[int, int] = {}
    for c in copies:
        multiplicity[c.head_id] = multiplicity.get(c.head_id, 0) + 1
    over = [h for h, cnt in multiplicity.items() if cnt > tp]
    if over:
        raise InfeasibleError(
            f"head {over[0]} has {multiplicity[over[0]]} copies but only {tp} GPUs"
        )

    k = m // tp
    heads = [c.head_id for c in copies]
    groups: list[list[int]] = [[] for _ in range(tp)]
    last_group = {h: -1 for h in multiplicity}
    seen: set[tuple[tuple[int, ...], ...]] = set()

    def content_key(opened: int) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(tuple(sorted(heads[i] for i in g)) for g in groups[:opened]))

    def rec(t: int, opened: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        if t == m:
            if opened < tp:
                return
            key = content_key(opened)
            if key in seen:
                return
            seen.add(key)
            yield tuple(tuple(g) for g in groups)
            return
        h = heads[t]
        start = last_group[h] + 1
        limit = opened if opened < tp else tp - 1
        for j in range(start, limit + 1):
            if equal_split:
                if j < opened and len(groups[j]) >= k:
                    continue
            else:
                opened_next = opened + 1 if j == opened else opened
                if m - t - 1 < tp - opened_next:
                    continue
            groups[j].append(t)
            prev = last_group[h]
            last_group[h] = j
            yield from rec(t + 1, opened + 1 if j == opened else opened)
            groups[j].pop()
            last_group[h] = prev

    yield from rec(0, 0)


def imbalance(
    grouping: Sequence[Sequence[int]], copy_weights: Sequence[float]
) -> float:
    """Max minus min summed group weight.

    Group sums fold heaviest-first so the value matches the search kernels
    bit for bit on the same grouping.
    """
    sums = []
    for group in grouping:
        vals = sorted((copy_weights[i] for i in group), reverse=True)
        s = 0.0
        for v in vals:
            s += v
        sums.append(s)
    return max(sums) - min(sums)


def _ordered_schemes(n: int, cfg: EnumerationConfig, tp: int, equal_split: bool,
                     max_schemes: int) -> list[ReplicationScheme]:
    eff = EnumerationConfig(
        ch_budget=cfg.ch_budget,
        r_max=cfg.r_max,
        require_divisible=equal_split,
        tp=tp,
    )
    schemes = enumerate_schemes(n, eff, max_schemes)
    # fewer copies win ties, so visit schemes in that priority order
    schemes.sort(key=lambda s: (s.total_copies, s.replicas))
    return schemes


def _build_assignment(
    scheme: ReplicationScheme, heads_c: Sequence[int], assign: Sequence[int],
    tp: int, delta: float,
) -> LayerAssignment:
    raw: list[list[int]] = [[] for _ in range(tp)]
    for copy_idx, j in enumerate(assign):
        raw[j].append(heads_c[copy_idx])
    groups = tuple(
        tuple(HeadCopy(h, scheme.replicas[h]) for h in sorted(g))
        for g in sorted(raw, key=lambda g: tuple(sorted(g)))
    )
    return LayerAssignment(groups=groups, delta=delta)


def _sha_hint(
    weights_c: Sequence[float], heads_c: Sequence[int], n: int, tp: int
) -> tuple[float, list[int]]:
    """Static contiguous split expressed in canonical copy order.

    Seeds the replication-free scheme's search so the result can never come
    out worse than the static baseline, even when the node budget truncates.
    """
    k_heads = n // tp
    raw = [h // k_heads for h in heads_c]
    relabel: dict[int, int] = {}
    rgs = []
    for j in raw:
        if j not in relabel:
            relabel[j] = len(relabel)
        rgs.append(relabel[j])
    grouping: list[list[int]] = [[] for _ in range(tp)]
    for idx, j in enumerate(rgs):
        grouping[j].append(idx)
    return imbalance(grouping, weights_c), rgs


def select_best(
    layer_weights: Sequence[float],
    tp: int,
    cfg: EnumerationConfig,
    *,
    equal_split: bool = True,
    max_schemes: int = DEFAULT_SCHEME_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> LayerAssignment:
    """Minimum-spread assignment over all schemes and groupings for one layer.

    Exact whenever every per-scheme search completes within node_budget
    (always the case for small layers); on exhaustion the deterministic best
    incumbent is kept instead.
    """
    n = len(layer_weights)
    if n < 1:
        raise ValidationError("layer has no heads")
    if tp < 1:
        raise ValidationError(f"tp must be >= 1, got {tp}")
    solve = _kernel.solve_equal_split if equal_split else _kernel.solve_free_split

    best: tuple[float, ReplicationScheme, list[int], list[int]] | None = None
    for scheme in _ordered_schemes(n, cfg, tp, equal_split, max_schemes):
        if max(scheme.replicas) > tp:
            continue
        weights_c, heads_c = _canonical_copies(scheme, layer_weights)
        hint = None
        if equal_split and scheme.extra_copies == 0 and n % tp == 0:
            hint = _sha_hint(weights_c, heads_c, n, tp)
        cutoff = float("inf") if best is None else best[0]
        res, _ = solve(weights_c, heads_c, tp, cutoff, node_budget, hint)
        if res is not None:
            delta, assign = res
            best = (delta, scheme, assign, heads_c)
    if best is None:
        raise InfeasibleError(
            f"no feasible assignment of {n} heads to {tp} GPUs "
            f"(ch_budget={cfg.ch_budget}, r_max={cfg.r_max})"
        )
    delta, scheme, assign, heads_c = best
    return _build_assignment(scheme, heads_c, assign, tp, delta)


def brute_force_best(
    layer_weights: Sequence[float],
    tp: int,
    cfg: EnumerationConfig,
    *,
    equal_split: bool = True,
    max_copies: int = BRUTE_FORCE_MAX_COPIES,
) -> LayerAssignment:
    """Oracle twin of select_best: exhaustive, unpruned, same tie-breaking.

    Guarded to small instances; raises ValidationError beyond max_copies.
    """
    n = len(layer_weights)
    if n < 1:
        raise ValidationError("layer has no heads")
    schemes = _ordered_schemes(n, cfg, tp, equal_split, DEFAULT_SCHEME_CAP)
    if schemes and schemes[-1].total_copies > max_copies:
        raise ValidationError(
            f"instance too large for brute force: {schemes[-1].total_copies} "
            f"copies > {max_copies}"
        )
    best: tuple[float, ReplicationScheme, tuple[int, ...], list[int]] | None = None
    for scheme in schemes:
        if max(scheme.replicas) > tp:
            continue
        weights_c, heads_c = _canonical_copies(scheme, layer_weights)
        hc = [HeadCopy(h, scheme.replicas[h]) for h in heads_c]
        for grouping in split_into_groups(hc, tp, equal_split=equal_split):
            d = imbalance(grouping, weights_c)
            if best is None or d < best[0]:
                assign = [0] * len(heads_c)
                for j, group in enumerate(grouping):
                    for idx in group:
                        assign[idx] = j
                best = (d, scheme, tuple(assign), heads_c)
    if best is None:
        raise InfeasibleError(
            f"no feasible assignment of {n} heads to {tp} GPUs "
            f"(ch_budget={cfg.ch_budget}, r_max={cfg.r_max})"
        )
    d, scheme, assign, heads_c = best
    return _build_assignment(scheme, heads_c, assign, tp, d)


def sha_plan(profile: ModelProfile, tp: int) -> AllocationPlan:
    """Static baseline: heads in index order, contiguous equal blocks, no copies."""
    n = profile.heads_per_layer
    if n % tp != 0:
        raise InfeasibleError(f"{n} heads not divisible by tp={tp}")
    k = n // tp
    layers = []
    for weights in profile.weights:
        grouping = [tuple(range(j * k, (j + 1) * k)) for j in range(tp)]
        delta = imbalance(grouping, weights)
        groups = tuple(
            tuple(HeadCopy(h, 1) for h in block) for block in grouping
        )
        layers.append(LayerAssignment(groups=groups, delta=delta))
    return AllocationPlan(tp=tp, ch_budget=0, r_max=1, layers=tuple(layers))


def _optimize_layer(args) -> LayerAssignment:
    weights, tp, cfg, equal_split, max_schemes, node_budget = args
    return select_best(
        weights,
        tp,
        cfg,
        equal_split=equal_split,
        max_schemes=max_schemes,
        node_budget=node_budget,
    )


def optimize_plan(
    profile: ModelProfile,
    tp: int,
    cfg: EnumerationConfig,
    *,
    equal_split: bool = True,
    workers: int = 1,
    max_schemes: int = DEFAULT_SCHEME_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> AllocationPlan:
    """select_best applied to every layer independently.

    Layers are independent, so workers > 1 fans them out to a process pool;
    results keep layer order either way.
    """
    jobs = [
        (weights, tp, cfg, equal_split, max_schemes, node_budget)
        for weights in profile.weights
    ]
    layers: list[LayerAssignment] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_optimize_layer, job) for job in jobs]
            for i, fut in enumerate(futures):
                try:
                    layers.append(fut.result())
                except InfeasibleError as exc:
                    raise InfeasibleError(f"layer {i}: {exc}") from exc
    else:
        for i, job in enumerate(jobs):
            try:
                layers.append(_optimize_layer(job))
            except InfeasibleError as exc:
                raise InfeasibleError(f"layer {i}: {exc}") from exc
    return AllocationPlan(
        tp=tp, ch_budget=cfg.ch_budget, r_max=cfg.r_max, layers=tuple(layers)
    )


def layer_group_loads(assignment: LayerAssignment, layer_weights: Sequence[float]) -> list[float]:
    """Adjusted load per GPU group for one layer."""
    loads = []
    for group in assignment.groups:
        s = 0.0
        for copy in group:
            s += layer_weights[copy.head_id] / copy.replica_count
        loads.append(s)
    return loads


def gpu_loads(plan: AllocationPlan, profile: ModelProfile) -> list[float]:
    """Total adjusted load per GPU across layers (group position = GPU index)."""
    _check_plan_dims(plan, profile)
    totals = [0.0] * plan.tp
    for assignment, weights in zip(plan.layers, profile.weights):
        for j, load in enumerate(layer_group_loads(assignment, weights)):
            totals[j] += load
    return totals


def objective_value(plan: AllocationPlan, profile: ModelProfile) -> float:
    """Bottleneck total adjusted load across all layers."""
    return max(gpu_loads(plan, profile))


def efficiency(plan: AllocationPlan, profile: ModelProfile) -> float:
    """Mean per-GPU load relative to the bottleneck GPU; 1.0 means balanced."""
    loads = gpu_loads(plan, profile)
    peak = max(loads)
    if peak <= 0.0:
        raise ValidationError("all GPU loads are zero")
    return sum(load / peak for load in loads) / len(loads)


def _check_plan_dims(plan: AllocationPlan, profile: ModelProfile) -> None:
    if len(plan.layers) != profile.num_layers:
        raise ValidationError(
            f"plan has {len(plan.layers)} layers, profile {profile.num_layers}"
        )
    for i, assignment in enumerate(plan.layers):
        if len(assignment.groups) != plan.tp:
            raise ValidationError(
                f"layer {i}: {len(assignment.groups)} groups, expected {plan.tp}"
            )
        for group in assignment.groups:
            for copy in group:
                if copy.head_id >= profile.heads_per_layer:
                    raise ValidationError(
                        f"layer {i}: head {copy.head_id} outside profile range"
                    )


def validate_assignment(
    assignment: LayerAssignment, n: int, tp: int, *, equal_split: bool = True
) -> None:
    """Structural invariants of one layer assignment; raises ValidationError."""
    if len(assignment.groups) != tp:
        raise ValidationError(f"expected {tp} groups, got {len(assignment.groups)}")
    occurrences: dict[int, int] = {}
    declared: dict[int, int] = {}
    sizes = []
    for g, group in enumerate(assignment.groups):
        seen_heads = set()
        sizes.append(len(group))
        for copy in group:
            if copy.head_id in seen_heads:
                raise ValidationError(
                    f"head {copy.head_id} appears twice in group {g}"
                )
            seen_heads.add(copy.head_id)
            occurrences[copy.head_id] = occurrences.get(copy.head_id, 0) + 1
            prev = declared.setdefault(copy.head_id, copy.replica_count)
            if prev != copy.replica_count:
                raise ValidationError(
                    f"head {copy.head_id} has inconsistent replica counts"
                )
    for h in range(n):
        if occurrences.get(h, 0) < 1:
            raise ValidationError(f"head {h} has no GPU assignment")
        if occurrences[h] != declared[h]:
            raise ValidationError(
                f"head {h} occurs {occurrences[h]} times but declares "
                f"{declared[h]} replicas"
            )
    if equal_split and len(set(sizes)) > 1:
        raise ValidationError(f"unequal group sizes {sizes}")


def save_plan(plan: AllocationPlan, path) -> None:
    data = {
        "tp": plan.tp,
        "ch_budget": plan.ch_budget,
        "r_max": plan.r_max,
        "layers": [
            {
                "groups": [
                    [{"head": c.head_id, "replicas": c.replica_count} for c in group]
                    for group in assignment.groups
                ],
                "delta": assignment.delta,
            }
            for assignment in plan.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_plan(path) -> AllocationPlan:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid plan JSON: {exc}") from exc
    try:
        layers = tuple(
            LayerAssignment(
                groups=tuple(
                    tuple(HeadCopy(c["head"], c["replicas"]) for c in group)
                    for group in layer["groups"]
                ),
                delta=float(layer["delta"]),
            )
            for layer in data["layers"]
        )
        plan = AllocationPlan(
            tp=int(data["tp"]),
            ch_budget=int(data["ch_budget"]),
            r_max=int(data["r_max"]),
            layers=layers,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed plan structure: {exc}") from exc
    n = max(
        (c.head_id + 1 for la in plan.layers for g in la.groups for c in g),
        default=0,
    )
    for i, assignment in enumerate(plan.layers):
        try:
            validate_assignment(assignment, n, plan.tp, equal_split=False)
        except ValidationError as exc:
            raise ValidationError(f"{path}: layer {i}: {exc}") from exc
    return plan
