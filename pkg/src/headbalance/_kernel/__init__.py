"""Search-kernel backend selection.

The grouping search dominates optimizer runtime, so it has two
implementations: a compiled Cython extension (_fastpath) and a pure-Python
reference. The compiled one is picked at import time when present; set
HEADBALANCE_KERNEL=python to force the reference, or HEADBALANCE_KERNEL=compiled
to fail loudly when the extension is missing. Both return identical results
for identical inputs.
"""

import os

from . import reference

_impl = reference
_backend = "python"

_force = os.environ.get("HEADBALANCE_KERNEL", "").strip().lower()
if _force in {"", "auto", "compiled", "c", "ext"}:
    try:
        from . import _fastpath

        _impl = _fastpath
        _backend = "compiled"
    except ImportError:
        if _force in {"compiled", "c", "ext"}:
            raise
elif _force not in {"python", "py", "pure", "reference"}:
    raise ValueError(f"unrecognized HEADBALANCE_KERNEL value: {_force!r}")


def backend() -> str:
    """Name of the active kernel backend ("compiled" or "python")."""
    return _backend


def implementations() -> dict:
    """All importable kernel implementations, for parity tests and benchmarks."""
    impls = {"python": reference}
    try:
        from . import _fastpath

        impls["compiled"] = _fastpath
    except ImportError:
        pass
    return impls


def solve_equal_split(weights, heads, tp, cutoff,
                      node_budget=reference.DEFAULT_NODE_BUDGET, hint=None):
    return _impl.solve_equal_split(weights, heads, tp, cutoff, node_budget, hint)


def solve_free_split(weights, heads, tp, cutoff,
                     node_budget=reference.DEFAULT_NODE_BUDGET, hint=None):
    # relaxed mode is experimental and stays on the reference path
    return reference.solve_free_split(weights, heads, tp, cutoff, node_budget, hint)
