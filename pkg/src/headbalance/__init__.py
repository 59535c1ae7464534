"""Balancer and simulator for uneven per-head KV-cache loads under tensor
parallelism: enumerate head-replication schemes, pick the per-layer
head-to-GPU assignment with the smallest load spread, and predict latency,
busy rate and throughput under a calibrated memory-bound latency model."""

__version__ = "0.1.0"

from ._kernel import backend as kernel_backend
from .allocate import (
    AllocationPlan,
    HeadCopy,
    LayerAssignment,
    adjusted_weights,
    brute_force_best,
    efficiency,
    gpu_loads,
    imbalance,
    load_plan,
    objective_value,
    optimize_plan,
    save_plan,
    select_best,
    sha_plan,
    split_into_groups,
)
from .errors import (
    CalibrationError,
    HeadBalanceError,
    InfeasibleError,
    ParseError,
    SearchSpaceError,
    SimulationError,
    ValidationError,
)
from .latency import (
    CalibrationResult,
    LatencyModel,
    MeasurementSample,
    calibrate,
    load_model,
    load_samples,
    predict_comm,
    predict_compute,
    save_model,
)
from .profiles import (
    ModelProfile,
    SyntheticSpec,
    cosine_similarity,
    generate_profile,
    load_profile,
    profile_similarity,
    save_profile,
)
from .schemes import (
    EnumerationConfig,
    ReplicationScheme,
    count_schemes,
    enumerate_schemes,
)
from .simulate import (
    ComparisonReport,
    LatencyDecomposition,
    SimulationConfig,
    SimulationReport,
    compare,
    decompose,
    save_comparison,
    simulate,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "AllocationPlan",
    "HeadCopy",
    "LayerAssignment",
    "adjusted_weights",
    "brute_force_best",
    "efficiency",
    "gpu_loads",
    "imbalance",
    "load_plan",
    "objective_value",
    "optimize_plan",
    "save_plan",
    "select_best",
    "sha_plan",
    "split_into_groups",
    "CalibrationError",
    "HeadBalanceError",
    "InfeasibleError",
    "ParseError",
    "SearchSpaceError",
    "SimulationError",
    "ValidationError",
    "CalibrationResult",
    "LatencyModel",
    "MeasurementSample",
    "calibrate",
    "load_model",
    "load_samples",
    "predict_comm",
    "predict_compute",
    "save_model",
    "ModelProfile",
    "SyntheticSpec",
    "cosine_similarity",
    "generate_profile",
    "load_profile",
    "profile_similarity",
    "save_profile",
    "EnumerationConfig",
    "ReplicationScheme",
    "count_schemes",
    "enumerate_schemes",
    "ComparisonReport",
    "LatencyDecomposition",
    "SimulationConfig",
    "SimulationReport",
    "compare",
    "decompose",
    "save_comparison",
    "simulate",
]
