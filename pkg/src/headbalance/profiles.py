"""Per-head KV workload profiles: data model, file IO, synthetic generators,
and the cosine similarity metric used to compare allocation patterns.

A profile holds one nonnegative weight per (layer, head): the retained-KV
load that head contributes during decode. Weights are reals because profiles
are typically averages over many requests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParseError, ValidationError

_PROFILE_KEYS = ("model_name", "kv_budget", "num_layers", "heads_per_layer", "weights")

DISTRIBUTIONS = ("uniform", "zipf", "dirichlet")


@dataclass(frozen=True)
class ModelProfile:
    """Per-layer, per-head workload weights sampled under one KV budget."""

    model_name: str
    kv_budget: int
    num_layers: int
    heads_per_layer: int
    weights: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.kv_budget < 0:
            raise ValidationError(f"kv_budget must be nonnegative, got {self.kv_budget}")
        if self.num_layers < 1:
            raise ValidationError(f"num_layers must be positive, got {self.num_layers}")
        if self.heads_per_layer < 1:
            raise ValidationError(
                f"heads_per_layer must be positive, got {self.heads_per_layer}"
            )
        if len(self.weights) != self.num_layers:
            raise ValidationError(
                f"expected {self.num_layers} weight rows, got {len(self.weights)}"
            )
        for i, row in enumerate(self.weights):
            if len(row) != self.heads_per_layer:
                raise ValidationError(
                    f"ragged rows: layer {i} has {len(row)} heads, "
                    f"expected {self.heads_per_layer}"
                )
            positive = False
            for j, w in enumerate(row):
                if not math.isfinite(w):
                    raise ValidationError(f"non-finite weight at layer {i}, head {j}")
                if w < 0:
                    raise ValidationError(f"negative weight at layer {i}, head {j}")
                if w > 0:
                    positive = True
            if not positive:
                raise ValidationError(f"layer {i} has no positive weight")

    def layer(self, index: int) -> tuple[float, ...]:
        return self.weights[index]

    def flatten(self) -> list[float]:
        """All weights in layer-major order (layer 0 heads first)."""
        return [w for row in self.weights for w in row]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic synthetic profile.

    distribution: "uniform", "zipf" (param = exponent s > 0, head ranks are
    permuted per layer) or "dirichlet" (param = concentration alpha > 0).
    Weights of each layer sum to total_budget_per_layer.
    """

    distribution: str
    param: float | None = None
    total_budget_per_layer: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValidationError(
                f"unknown distribution {self.distribution!r}, "
                f"expected one of {DISTRIBUTIONS}"
            )
        if self.distribution == "zipf" and (self.param is None or self.param <= 0):
            raise ValidationError(f"zipf exponent must be > 0, got {self.param}")
        if self.distribution == "dirichlet" and (self.param is None or self.param <= 0):
            raise ValidationError(f"dirichlet alpha must be > 0, got {self.param}")
        if self.total_budget_per_layer <= 0:
            raise ValidationError(
                f"total_budget_per_layer must be positive, got {self.total_budget_per_layer}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 unsigned bits")


def generate_profile(
    spec: SyntheticSpec, num_layers: int, heads_per_layer: int
) -> ModelProfile:
    """Deterministic synthetic profile: same spec and dims give identical output."""
    if num_layers < 1 or heads_per_layer < 1:
        raise ValidationError("num_layers and heads_per_layer must be positive")
    n = heads_per_layer
    budget = spec.total_budget_per_layer
    rng = np.random.default_rng(spec.seed)

    rows = []
    for _ in range(num_layers):
        if spec.distribution == "uniform":
            row = [budget / n] * n
        elif spec.distribution == "zipf":
            base = np.arange(1, n + 1, dtype=np.float64) ** (-spec.param)
            perm = rng.permutation(n)
            vals = base[perm]
            row = (vals / vals.sum() * budget).tolist()
        else:
            vals = rng.dirichlet(np.full(n, spec.param))
            row = (vals * budget).tolist()
        rows.append(tuple(float(w) for w in row))

    # nominal per-head budget the profile stands in for
    kv_budget = int(round(budget / n))
    return ModelProfile(
        model_name=f"synthetic-{spec.distribution}",
        kv_budget=kv_budget,
        num_layers=num_layers,
        heads_per_layer=heads_per_layer,
        weights=tuple(rows),
    )


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine of two weight vectors, clamped to [-1, 1]."""
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValidationError("empty vectors")
    dot = 0.0
    na = 0.0
    nb = 0.0
    for x, y in zip(a, b):
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        raise ValidationError("zero-norm input")
    value = dot / math.sqrt(na) / math.sqrt(nb)
    return max(-1.0, min(1.0, value))


def profile_similarity(a: ModelProfile, b: ModelProfile) -> float:
    """Cosine similarity of two whole-model profiles (layer-major flattening)."""
    return cosine_similarity(a.flatten(), b.flatten())


def save_profile(profile: ModelProfile, path) -> None:
    """Write the profile file format; numbers keep full round-trip precision."""
    data = {
        "model_name": profile.model_name,
        "kv_budget": profile.kv_budget,
        "num_layers": profile.num_layers,
        "heads_per_layer": profile.heads_per_layer,
        "weights": [list(row) for row in profile.weights],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_profile(path) -> ModelProfile:
    """Read and validate a profile file. Unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid profile JSON: {exc}") from exc

    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - set(_PROFILE_KEYS))
    if unknown:
        raise ValidationError(f"{path}: unknown keys {unknown}")
    missing = sorted(set(_PROFILE_KEYS) - set(data))
    if missing:
        raise ValidationError(f"{path}: missing keys {missing}")
    if not isinstance(data["model_name"], str):
        raise ValidationError(f"{path}: model_name must be a string")
    for key in ("kv_budget", "num_layers", "heads_per_layer"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise ValidationError(f"{path}: {key} must be an integer")
    rows = data["weights"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValidationError(f"{path}: weights must be an array of arrays")
    weights = []
    for i, row in enumerate(rows):
        out = []
        for j, w in enumerate(row):
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise ValidationError(f"{path}: weight at layer {i}, head {j} is not a number")
            out.append(float(w))
        weights.append(tuple(out))

    return ModelProfile(
        model_name=data["model_name"],
        kv_budget=data["kv_budget"],
        num_layers=data["num_layers"],
        heads_per_layer=data["heads_per_layer"],
        weights=tuple(weights),
    )
