# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of reference.solve_equal_split.

Same search, same bounds, same float operations in the same order, same node
accounting; results must be bit-identical to the pure-Python kernel (the
extension is built with -ffp-contract=off so no fused multiply-adds sneak
in). Any change here must land in reference.py too, and vice versa.
"""

from libc.math cimport fabs
from libc.stdlib cimport free, malloc

DEFAULT_NODE_BUDGET = 200_000

cdef double _GUARD = 1e-12


cdef inline double _pad(double x) noexcept:
    return _GUARD * (1.0 + fabs(x))


cdef struct Search:
    int m
    int k
    int tp
    double avg_up
    double avg_dn
    double seed
    double best_delta
    bint has_best
    long long nodes
    long long node_budget
    double* weights
    int* heads
    double* prefix
    int* same_after
    double* sums
    int* counts
    int* last_group
    int* assign
    int* best_assign


cdef bint _dfs(Search* st, int t, int opened) noexcept:
    """Returns False when the node budget is exhausted."""
    cdef int j, j2, avail, cnt, start, limit, fill, trailing, h
    cdef double s, hi, lo, ub_min, lb_max, lb, w, base, forced, branch_lb, delta
    cdef bint alive

    if st.nodes >= st.node_budget:
        return False
    st.nodes += 1
    if t == st.m:
        hi = st.sums[0]
        lo = st.sums[0]
        for j in range(1, st.tp):
            s = st.sums[j]
            if s > hi:
                hi = s
            elif s < lo:
                lo = s
        delta = hi - lo
        if delta < st.best_delta and delta <= st.seed:
            st.best_delta = delta
            st.has_best = True
            for j in range(st.m):
                st.best_assign[j] = st.assign[j]
        return True

    # lower bound on the spread of any completion of this node
    ub_min = st.avg_up
    lb_max = st.avg_dn
    for j in range(st.tp):
        if j < opened:
            s = st.sums[j]
            fill = st.k - st.counts[j]
        else:
            s = 0.0
            fill = st.k
        hi = s + (st.prefix[t + fill] - st.prefix[t])
        hi += _pad(hi)
        if hi < ub_min:
            ub_min = hi
        lo = s + (st.prefix[st.m] - st.prefix[st.m - fill])
        lo -= _pad(lo)
        if lo > lb_max:
            lb_max = lo
        if j >= opened:
            break  # unopened groups are interchangeable
    lb = lb_max - ub_min
    if lb >= st.best_delta or lb > st.seed:
        return True

    w = st.weights[t]
    h = st.heads[t]
    trailing = st.same_after[t]
    start = st.last_group[h] + 1
    limit = opened if opened < st.tp else st.tp - 1
    for j in range(start, limit + 1):
        if j < opened:
            cnt = st.counts[j]
            if cnt >= st.k:
                continue
            base = st.sums[j]
        else:
            cnt = 0
            base = 0.0
        if trailing:
            avail = 0
            for j2 in range(j + 1, st.tp):
                if j2 >= opened or st.counts[j2] < st.k:
                    avail += 1
            if trailing > avail:
                continue
        # whichever group takes this copy must also absorb k-cnt-1 more
        fill = st.k - cnt - 1
        forced = base + w + (st.prefix[st.m] - st.prefix[st.m - fill])
        forced -= _pad(forced)
        branch_lb = forced - ub_min
        if branch_lb >= st.best_delta or branch_lb > st.seed:
            continue
        st.sums[j] = base + w
        st.counts[j] = cnt + 1
        st.last_group[h] = j
        st.assign[t] = j
        alive = _dfs(st, t + 1, opened + 1 if j == opened else opened)
        st.sums[j] = base
        st.counts[j] = cnt
        st.last_group[h] = start - 1
        if not alive:
            return False
    return True


def solve_equal_split(weights, heads, tp, cutoff,
                      node_budget=DEFAULT_NODE_BUDGET, hint=None):
    """See reference.solve_equal_split; identical contract and results."""
    cdef int m = len(weights)
    cdef int k = m // tp
    cdef int n_heads = 0
    cdef int i, j
    cdef double acc, avg, greedy_delta
    cdef Search st
    cdef bint greedy_ok

    st.m = m
    st.k = k
    st.tp = tp
    st.weights = <double*> malloc(m * sizeof(double))
    st.heads = <int*> malloc(m * sizeof(int))
    st.prefix = <double*> malloc((m + 1) * sizeof(double))
    st.same_after = <int*> malloc(m * sizeof(int))
    st.sums = <double*> malloc(tp * sizeof(double))
    st.counts = <int*> malloc(tp * sizeof(int))
    st.assign = <int*> malloc(m * sizeof(int))
    st.best_assign = <int*> malloc(m * sizeof(int))
    st.last_group = NULL

    try:
        for i in range(m):
            st.weights[i] = weights[i]
            st.heads[i] = heads[i]
            if st.heads[i] + 1 > n_heads:
                n_heads = st.heads[i] + 1
        st.last_group = <int*> malloc(n_heads * sizeof(int))

        st.prefix[0] = 0.0
        acc = 0.0
        for i in range(m):
            acc += st.weights[i]
            st.prefix[i + 1] = acc
        avg = st.prefix[m] / tp
        st.avg_up = avg + _pad(avg)
        st.avg_dn = avg - _pad(avg)

        for i in range(m):
            st.same_after[i] = 0
        for i in range(m - 2, -1, -1):
            if st.heads[i + 1] == st.heads[i]:
                st.same_after[i] = st.same_after[i + 1] + 1

        greedy_delta, greedy_assign, greedy_ok = _greedy(
            st.weights, st.heads, m, tp, k, n_heads
        )

        st.seed = float("inf")
        if greedy_ok and greedy_delta < st.seed:
            st.seed = greedy_delta
        if hint is not None and hint[0] < st.seed:
            st.seed = hint[0]

        for j in range(tp):
            st.sums[j] = 0.0
            st.counts[j] = 0
        for i in range(n_heads):
            st.last_group[i] = -1
        st.best_delta = cutoff
        st.has_best = False
        st.nodes = 0
        st.node_budget = node_budget

        _dfs(&st, 0, 0)

        # precedence on equal spreads: in-order find, then hint, then greedy
        result = None
        if st.has_best:
            result = (st.best_delta, [st.best_assign[i] for i in range(m)])
        if hint is not None and hint[0] < cutoff:
            if result is None or hint[0] < result[0]:
                result = (hint[0], list(hint[1]))
        if greedy_ok and greedy_delta < cutoff:
            if result is None or greedy_delta < result[0]:
                result = (greedy_delta, greedy_assign)
        return result, st.nodes
    finally:
        free(st.weights)
        free(st.heads)
        free(st.prefix)
        free(st.same_after)
        free(st.sums)
        free(st.counts)
        free(st.assign)
        free(st.best_assign)
        if st.last_group != NULL:
            free(st.last_group)


cdef _greedy(double* weights, int* heads, int m, int tp, int k, int n_heads):
    """Mirror of reference._greedy; returns (delta, rgs list, ok)."""
    cdef double* sums = <double*> malloc(tp * sizeof(double))
    cdef int* counts = <int*> malloc(tp * sizeof(int))
    cdef char* members = <char*> malloc(tp * n_heads * sizeof(char))
    cdef int* assign = <int*> malloc(m * sizeof(int))
    cdef int* relabel = <int*> malloc(tp * sizeof(int))
    cdef int t, j, best, h, next_label
    cdef double w, hi, lo
    try:
        for j in range(tp):
            sums[j] = 0.0
            counts[j] = 0
            relabel[j] = -1
        for j in range(tp * n_heads):
            members[j] = 0
        for t in range(m):
            w = weights[t]
            h = heads[t]
            best = -1
            for j in range(tp):
                if counts[j] >= k or members[j * n_heads + h]:
                    continue
                if best < 0 or sums[j] < sums[best]:
                    best = j
            if best < 0:
                return 0.0, None, False
            sums[best] += w
            counts[best] += 1
            members[best * n_heads + h] = 1
            assign[t] = best
        next_label = 0
        rgs = []
        for t in range(m):
            j = assign[t]
            if relabel[j] < 0:
                relabel[j] = next_label
                next_label += 1
            rgs.append(relabel[j])
        hi = sums[0]
        lo = sums[0]
        for j in range(1, tp):
            if sums[j] > hi:
                hi = sums[j]
            elif sums[j] < lo:
                lo = sums[j]
        return hi - lo, rgs, True
    finally:
        free(sums)
        free(counts)
        free(members)
        free(assign)
        free(relabel)
