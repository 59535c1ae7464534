"""Memory-bound decode latency law and its least-squares calibration.

Per-token decode latency on one GPU is modeled as

    latency = c0 + c1*B + c2*C + c3*B*C

for batch size B and resident KV load C. The bilinear term makes the batch
slope grow with the KV budget (and vice versa), which a sum of two
independent lines cannot express. Communication is a ring allreduce with a
fixed per-sync term plus an inverse-bandwidth term.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CalibrationError, ParseError, ValidationError

_MODEL_KEYS = (
    "c0",
    "c1",
    "c2",
    "c3",
    "comm_alpha",
    "comm_beta",
    "bytes_per_activation",
)

_CLAMP = 1e-12


@dataclass(frozen=True)
class LatencyModel:
    """Calibrated latency coefficients, all in seconds-based units."""

    c0: float
    c1: float
    c2: float
    c3: float
    comm_alpha: float = 0.0
    comm_beta: float = 0.0
    bytes_per_activation: float = 1.0

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3", "comm_alpha", "comm_beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {value}")
        if not self.bytes_per_activation > 0:
            raise ValidationError(
                f"bytes_per_activation must be positive, got {self.bytes_per_activation}"
            )


@dataclass(frozen=True)
class MeasurementSample:
    """One latency measurement at a given batch size and KV load."""

    batch: int
    kv_load: float
    latency: float

    def __post_init__(self):
        if self.batch < 1:
            raise ValidationError(f"batch must be >= 1, got {self.batch}")
        if self.kv_load < 0:
            raise ValidationError(f"kv_load must be nonnegative, got {self.kv_load}")
        if not self.latency > 0:
            raise ValidationError(f"latency must be positive, got {self.latency}")


@dataclass(frozen=True)
class CalibrationResult:
    model: LatencyModel
    residual_rms: float
    num_samples: int


def predict_compute(model: LatencyModel, batch: int, kv_load: float) -> float:
    """Per-token compute latency of one GPU holding kv_load KV entries."""
    if batch < 1:
        raise ValidationError(f"batch must be >= 1, got {batch}")
    if kv_load < 0:
        raise ValidationError(f"kv_load must be nonnegative, got {kv_load}")
    return model.c0 + model.c1 * batch + model.c2 * kv_load + model.c3 * batch * kv_load


def predict_comm(model: LatencyModel, tp: int, batch: int) -> float:
    """Per-layer allreduce cost; zero when there is nothing to sync."""
    if tp < 1:
        raise ValidationError(f"tp must be >= 1, got {tp}")
    if tp == 1:
        return 0.0
    payload = batch * model.bytes_per_activation
    return 2.0 * (tp - 1) / tp * payload * model.comm_beta + model.comm_alpha


def calibrate(
    samples: Sequence[MeasurementSample],
    *,
    comm_alpha: float = 0.0,
    comm_beta: float = 0.0,
    bytes_per_activation: float = 1.0,
) -> CalibrationResult:
    """Ordinary least squares on features (1, B, C, B*C).

    Needs at least 4 samples spanning 2 distinct batch sizes and 2 distinct
    KV loads. Tiny negative coefficients (fit noise) clamp to zero; genuinely
    negative fits are rejected since the latency law is nondecreasing.
    """
    if len(samples) < 4:
        raise CalibrationError(f"need at least 4 samples, got {len(samples)}")
    batches = {s.batch for s in samples}
    loads = {s.kv_load for s in samples}
    if len(batches) < 2:
        raise CalibrationError("samples cover only one batch size")
    if len(loads) < 2:
        raise CalibrationError("samples cover only one kv_load value")

    design = np.array(
        [[1.0, s.batch, s.kv_load, s.batch * s.kv_load] for s in samples],
        dtype=np.float64,
    )
    target = np.array([s.latency for s in samples], dtype=np.float64)
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 4:
        raise CalibrationError(
            f"design matrix rank {rank} < 4; vary batch and kv_load jointly"
        )
    fitted = []
    for name, value in zip(("c0", "c1", "c2", "c3"), coef):
        v = float(value)
        if -_CLAMP < v < 0.0:
            v = 0.0
        if v < 0.0:
            raise CalibrationError(f"fitted {name} = {v:.3e} is negative")
        fitted.append(v)
    residual = target - design @ coef
    rms = float(np.sqrt(np.mean(residual**2)))
    model = LatencyModel(
        *fitted,
        comm_alpha=comm_alpha,
        comm_beta=comm_beta,
        bytes_per_activation=bytes_per_activation,
    )
    return CalibrationResult(model=model, residual_rms=rms, num_samples=len(samples))


def save_model(model: LatencyModel, path) -> None:
    data = {key: getattr(model, key) for key in _MODEL_KEYS}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_model(path) -> LatencyModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid model JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - set(_MODEL_KEYS))
    if unknown:
        raise ValidationError(f"{path}: unknown keys {unknown}")
    missing = sorted(set(_MODEL_KEYS) - set(data))
    if missing:
        raise ValidationError(f"{path}: missing keys {missing}")
    values = {}
    for key in _MODEL_KEYS:
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{path}: {key} must be a number")
        values[key] = float(v)
    return LatencyModel(**values)


def load_samples(path) -> list[MeasurementSample]:
    """Calibration samples from delimited text with header batch,kv_load,latency."""
    samples = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "batch",
            "kv_load",
            "latency",
        ]:
            raise ParseError(
                f"{path}: expected header 'batch,kv_load,latency', got {reader.fieldnames}"
            )
        for line, row in enumerate(reader, start=2):
            try:
                samples.append(
                    MeasurementSample(
                        batch=int(row["batch"]),
                        kv_load=float(row["kv_load"]),
                        latency=float(row["latency"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{line}: bad sample row: {exc}") from exc
    return samples
