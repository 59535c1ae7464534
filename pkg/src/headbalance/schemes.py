"""Enumeration of head-replication schemes for one layer.

A scheme assigns each of the n heads a replication factor r_i >= 1; the
search space is every vector with per-head factor at most r_max and at most
ch_budget extra copies in total. Enumeration is a recursive backtracking over
heads: each head either keeps a single copy or takes 2..cap copies, with the
cap driven jointly by r_max and the remaining copy budget.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SearchSpaceError, ValidationError

DEFAULT_SCHEME_CAP = 1_000_000


@dataclass(frozen=True)
class ReplicationScheme:
    """Total copy count per head; all ones means no replication."""

    replicas: tuple[int, ...]

    def __post_init__(self):
        if not self.replicas:
            raise ValidationError("scheme must cover at least one head")
        if any(r < 1 for r in self.replicas):
            raise ValidationError("every head needs at least one copy")

    @property
    def total_copies(self) -> int:
        return sum(self.replicas)

    @property
    def extra_copies(self) -> int:
        return self.total_copies - len(self.replicas)


@dataclass(frozen=True)
class EnumerationConfig:
    """Limits of the replication search space.

    ch_budget: maximum total extra copies per layer.
    r_max: per-head cap on the replication factor.
    require_divisible: keep only schemes whose total copy count is divisible
    by tp (needed for equal-cardinality GPU groups).
    """

    ch_budget: int
    r_max: int = 1
    require_divisible: bool = False
    tp: int = 1

    def __post_init__(self):
        if self.ch_budget < 0:
            raise ValidationError(f"ch_budget must be nonnegative, got {self.ch_budget}")
        if self.r_max < 1:
            raise ValidationError(f"r_max must be >= 1, got {self.r_max}")
        if self.tp < 1:
            raise ValidationError(f"tp must be >= 1, got {self.tp}")


def enumerate_schemes(
    n: int, cfg: EnumerationConfig, max_schemes: int = DEFAULT_SCHEME_CAP
) -> list[ReplicationScheme]:
    """All valid replica vectors for n heads, in lexicographic order.

    Raises SearchSpaceError when more than max_schemes schemes would be
    emitted.
    """
    if n < 1:
        raise ValidationError(f"head count must be positive, got {n}")
    out: list[ReplicationScheme] = []
    vec = [1] * n

    def backtrack(index: int, budget_left: int) -> None:
        if index == n:
            if cfg.require_divisible and sum(vec) % cfg.tp != 0:
                return
            if len(out) >= max_schemes:
                raise SearchSpaceError(
                    f"more than {max_schemes} schemes for n={n}, "
                    f"ch_budget={cfg.ch_budget}, r_max={cfg.r_max}"
                )
            out.append(ReplicationScheme(tuple(vec)))
            return
        # single copy, then multiple copies up to the joint cap
        cap = min(cfg.r_max, budget_left + 1)
        for r in range(1, cap + 1):
            vec[index] = r
            backtrack(index + 1, budget_left - (r - 1))
        vec[index] = 1

    backtrack(0, cfg.ch_budget)
    return out


def count_schemes(n: int, cfg: EnumerationConfig) -> int:
    """|enumerate_schemes(n, cfg)| without materializing the set.

    Dynamic program over the number of extra copies: ways[e] counts vectors
    whose extras sum to exactly e with each head adding 0..r_max-1 extras.
    """
    if n < 1:
        raise ValidationError(f"head count must be positive, got {n}")
    max_extra = min(cfg.ch_budget, n * (cfg.r_max - 1))
    ways = [0] * (max_extra + 1)
    ways[0] = 1
    per_head = cfg.r_max - 1
    for _ in range(n):
        nxt = [0] * (max_extra + 1)
        for e, count in enumerate(ways):
            if count == 0:
                continue
            for d in range(0, min(per_head, max_extra - e) + 1):
                nxt[e + d] += count
        ways = nxt
    total = 0
    for e, count in enumerate(ways):
        if cfg.require_divisible and (n + e) % cfg.tp != 0:
            continue
        total += count
    return total
