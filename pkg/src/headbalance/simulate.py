"""Synchronous decode simulation under an allocation plan.

Each decode step walks the layers in order; a layer costs the bottleneck
GPU's compute time (every other GPU waits) plus one allreduce. Reported
times split into three model-defined components:

  idle_time  - mean over GPUs of (layer span - own compute), i.e. time spent
               waiting on the bottleneck;
  cache_time - the KV-dependent share (c2 + c3*B) * C of the bottleneck GPU,
               a model convention since real systems cannot isolate it;
  comm_time  - allreduce plus any configured replication overhead.

The baseline-vs-improved decomposition subtracts these per component; its
total is defined as the component sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .allocate import AllocationPlan, layer_group_loads
from .errors import SimulationError, ValidationError
from .latency import LatencyModel, predict_comm, predict_compute
from .profiles import ModelProfile

CACHE_TIME_CONVENTION = "bottleneck KV term (c2 + c3*B) * max group load; model-defined"


@dataclass(frozen=True)
class SimulationConfig:
    """Decode workload shape; replication_overhead adds comm seconds per
    extra head copy per layer step."""

    batch: int
    decode_steps: int
    tp: int
    replication_overhead: float = 0.0

    def __post_init__(self):
        if self.batch < 1 or self.decode_steps < 1 or self.tp < 1:
            raise ValidationError("batch, decode_steps and tp must be positive")
        if self.replication_overhead < 0:
            raise ValidationError("replication_overhead must be nonnegative")


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate timings of one simulated decode run."""

    total_latency: float
    per_gpu_compute: tuple[float, ...]
    per_gpu_busy_rate: tuple[float, ...]
    mean_busy_rate: float
    throughput: float
    comm_time: float
    idle_time: float
    cache_time: float
    batch: int
    decode_steps: int
    tp: int
    model: LatencyModel


@dataclass(frozen=True)
class LatencyDecomposition:
    """Per-component latency reduction of an improved run vs a baseline."""

    d_idle: float
    d_cache: float
    d_comm: float
    d_total: float


@dataclass(frozen=True)
class StrategyResult:
    name: str
    plan: AllocationPlan
    report: SimulationReport
    throughput_gain: float
    decomposition: LatencyDecomposition


@dataclass(frozen=True)
class ComparisonReport:
    results: tuple[StrategyResult, ...]

    def by_name(self, name: str) -> StrategyResult:
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)


def simulate(
    profile: ModelProfile,
    plan: AllocationPlan,
    model: LatencyModel,
    cfg: SimulationConfig,
) -> SimulationReport:
    """Deterministic per-layer decode walk; all steps are identical because
    the plan and profile are static."""
    if plan.tp != cfg.tp:
        raise SimulationError(f"plan tp={plan.tp} does not match config tp={cfg.tp}")
    if len(plan.layers) != profile.num_layers:
        raise SimulationError(
            f"plan has {len(plan.layers)} layers, profile {profile.num_layers}"
        )

    batch = cfg.batch
    span_total = 0.0
    comm_per_step = 0.0
    idle_per_step = 0.0
    cache_per_step = 0.0
    compute_totals = [0.0] * cfg.tp
    kv_rate = model.c2 + model.c3 * batch

    for assignment, weights in zip(plan.layers, profile.weights):
        loads = layer_group_loads(assignment, weights)
        if len(loads) != cfg.tp:
            raise SimulationError(
                f"assignment has {len(loads)} groups, expected {cfg.tp}"
            )
        computes = [predict_compute(model, batch, load) for load in loads]
        span = max(computes)
        span_total += span
        for j, value in enumerate(computes):
            compute_totals[j] += value
        idle_per_step += span - sum(computes) / cfg.tp
        cache_per_step += kv_rate * max(loads)
        extra_copies = sum(len(g) for g in assignment.groups) - profile.heads_per_layer
        comm_per_step += predict_comm(model, cfg.tp, batch)
        comm_per_step += cfg.replication_overhead * extra_copies

    steps = cfg.decode_steps
    total_latency = steps * (span_total + comm_per_step)
    if total_latency <= 0.0:
        raise SimulationError("zero total latency; model has no cost terms")
    per_gpu_compute = tuple(steps * value for value in compute_totals)
    per_gpu_busy = tuple(value / total_latency for value in per_gpu_compute)
    mean_busy = sum(per_gpu_busy) / cfg.tp
    return SimulationReport(
        total_latency=total_latency,
        per_gpu_compute=per_gpu_compute,
        per_gpu_busy_rate=per_gpu_busy,
        mean_busy_rate=mean_busy,
        throughput=batch * steps / total_latency,
        comm_time=steps * comm_per_step,
        idle_time=steps * idle_per_step,
        cache_time=steps * cache_per_step,
        batch=batch,
        decode_steps=steps,
        tp=cfg.tp,
        model=model,
    )


def decompose(
    baseline: SimulationReport, improved: SimulationReport
) -> LatencyDecomposition:
    """Component-wise reduction baseline - improved; d_total is their sum."""
    if (baseline.batch, baseline.decode_steps, baseline.tp) != (
        improved.batch,
        improved.decode_steps,
        improved.tp,
    ):
        raise SimulationError("reports come from different simulation configs")
    if baseline.model != improved.model:
        raise SimulationError("reports come from different latency models")
    d_idle = baseline.idle_time - improved.idle_time
    d_cache = baseline.cache_time - improved.cache_time
    d_comm = baseline.comm_time - improved.comm_time
    return LatencyDecomposition(
        d_idle=d_idle,
        d_cache=d_cache,
        d_comm=d_comm,
        d_total=d_idle + d_cache + d_comm,
    )


def compare(
    profile: ModelProfile,
    tp: int,
    cfg,
    model: LatencyModel,
    simcfg: SimulationConfig,
    *,
    workers: int = 1,
    node_budget: int | None = None,
) -> ComparisonReport:
    """Run the static baseline, the search without replication, and the
    search with replication, all against the same profile and model."""
    from ._kernel.reference import DEFAULT_NODE_BUDGET
    from .allocate import optimize_plan, sha_plan
    from .schemes import EnumerationConfig

    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget
    base_plan = sha_plan(profile, tp)
    nodp_cfg = EnumerationConfig(ch_budget=0, r_max=1, require_divisible=True, tp=tp)
    nodp_plan = optimize_plan(profile, tp, nodp_cfg, workers=workers, node_budget=budget)
    dp_cfg = EnumerationConfig(
        ch_budget=cfg.ch_budget, r_max=cfg.r_max, require_divisible=True, tp=tp
    )
    dp_plan = optimize_plan(profile, tp, dp_cfg, workers=workers, node_budget=budget)

    base_report = simulate(profile, base_plan, model, simcfg)
    results = []
    for name, plan in (("sha", base_plan), ("nodp", nodp_plan), ("dp", dp_plan)):
        report = base_report if plan is base_plan else simulate(profile, plan, model, simcfg)
        results.append(
            StrategyResult(
                name=name,
                plan=plan,
                report=report,
                throughput_gain=report.throughput / base_report.throughput,
                decomposition=decompose(base_report, report),
            )
        )
    return ComparisonReport(results=tuple(results))


def report_to_dict(report: SimulationReport) -> dict:
    return {
        "total_latency": report.total_latency,
        "per_gpu_compute": list(report.per_gpu_compute),
        "per_gpu_busy_rate": list(report.per_gpu_busy_rate),
        "mean_busy_rate": report.mean_busy_rate,
        "throughput": report.throughput,
        "comm_time": report.comm_time,
        "idle_time": report.idle_time,
        "cache_time": report.cache_time,
        "batch": report.batch,
        "decode_steps": report.decode_steps,
        "tp": report.tp,
    }


def comparison_to_dict(comparison: ComparisonReport) -> dict:
    return {
        "conventions": {"cache_time": CACHE_TIME_CONVENTION},
        "strategies": [
            {
                "name": r.name,
                "throughput_gain": r.throughput_gain,
                "report": report_to_dict(r.report),
                "decomposition": {
                    "d_idle": r.decomposition.d_idle,
                    "d_cache": r.decomposition.d_cache,
                    "d_comm": r.decomposition.d_comm,
                    "d_total": r.decomposition.d_total,
                },
                "per_layer_delta": [a.delta for a in r.plan.layers],
            }
            for r in comparison.results
        ],
    }


def save_comparison(comparison: ComparisonReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(comparison_to_dict(comparison), fh, indent=2)
        fh.write("\n")


def save_gpu_table(comparison: ComparisonReport, path) -> None:
    """Plot-ready delimited table: one row per strategy and GPU."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("strategy,gpu,compute_time,busy_rate\n")
        for result in comparison.results:
            report = result.report
            for j in range(report.tp):
                fh.write(
                    f"{result.name},{j},{report.per_gpu_compute[j]!r},"
                    f"{report.per_gpu_busy_rate[j]!r}\n"
                )
