"""Pure-Python kernel for the per-scheme grouping search.

Given the copies of one layer under one replication scheme, find the
assignment of copies to tp equal-size GPU groups that minimizes the spread
(max group load - min group load). The search is a depth-first branch and
bound:

  * copies arrive heaviest-first (ties by head id, so copies of one head are
    adjacent and carry equal adjusted weight);
  * group labels are symmetric, so a copy may only open the next unused
    group (restricted-growth order);
  * copies of the same head must land in strictly increasing group indices,
    which both enforces the one-copy-per-GPU rule and collapses permutations
    of identical copies;
  * a node is cut when a lower bound on its best reachable spread cannot
    beat the incumbent.

Bounds combine the running group sums with prefix sums of the descending
weight vector: a group's final load is at most its current sum plus the
largest unplaced weights, at least its current sum plus the smallest ones,
the final max/min brackets the mean, and whichever group takes the next copy
must absorb it plus enough small copies to fill up. Tiny relative guards
keep float rounding in the bound arithmetic from cutting an optimal leaf.

Exactness and budget: balanced partitioning is NP-hard and near-balanceable
instances make optimality proofs blow up, so the search counts nodes against
a deterministic budget. Within budget the result is exact (minimum spread,
ties to the first grouping in this depth-first order). On exhaustion the
best incumbent found so far is returned - still deterministic, never worse
than the greedy placement or the caller's hint. The compiled kernel
(_fastpath) implements the identical search and must return bit-identical
results including node counts; keep the two in sync.
"""

from __future__ import annotations

DEFAULT_NODE_BUDGET = 200_000

_GUARD = 1e-12
_INF = float("inf")


def _pad(x: float) -> float:
    return _GUARD * (1.0 + abs(x))


def _greedy(weights, heads, tp, k):
    """Lowest-loaded-group-first placement; (spread, rgs assignment) or None.

    Seeds the branch-and-bound cut and serves as the fallback incumbent when
    the node budget runs out before the search finds anything better.
    """
    sums = [0.0] * tp
    counts = [0] * tp
    members = [set() for _ in range(tp)]
    assign = [0] * len(weights)
    for t, (w, h) in enumerate(zip(weights, heads)):
        best = -1
        for j in range(tp):
            if counts[j] >= k or h in members[j]:
                continue
            if best < 0 or sums[j] < sums[best]:
                best = j
        if best < 0:
            return None
        sums[best] += w
        counts[best] += 1
        members[best].add(h)
        assign[t] = best
    # relabel groups by first use so the assignment is a restricted-growth string
    relabel = {}
    rgs = []
    for j in assign:
        if j not in relabel:
            relabel[j] = len(relabel)
        rgs.append(relabel[j])
    return max(sums) - min(sums), rgs


def solve_equal_split(
    weights,
    heads,
    tp,
    cutoff,
    node_budget: int = DEFAULT_NODE_BUDGET,
    hint=None,
):
    """Best equal-cardinality grouping with spread strictly below cutoff.

    weights: adjusted load per copy, descending (ties by head id).
    heads: owning head id per copy.
    hint: optional (spread, rgs assignment) of a known grouping for this
    copy multiset (e.g. the static baseline); tightens pruning and caps the
    result from above.

    Returns ((spread, assignment), nodes_used); the first element is None
    when no grouping below cutoff was found. assignment[i] is the group of
    copy i in restricted-growth form. Caller guarantees len(weights) % tp == 0
    and per-head multiplicity <= tp.
    """
    m = len(weights)
    k = m // tp

    prefix = [0.0] * (m + 1)
    acc = 0.0
    for i in range(m):
        acc += weights[i]
        prefix[i + 1] = acc
    avg = prefix[m] / tp
    avg_up = avg + _pad(avg)
    avg_dn = avg - _pad(avg)

    n_heads = 0
    for h in heads:
        if h + 1 > n_heads:
            n_heads = h + 1

    # copies of one head are adjacent: trailing copies of the same head
    same_after = [0] * m
    for t in range(m - 2, -1, -1):
        if heads[t + 1] == heads[t]:
            same_after[t] = same_after[t + 1] + 1

    greedy = _greedy(weights, heads, tp, k)
    seed = _INF
    if greedy is not None and greedy[0] < seed:
        seed = greedy[0]
    if hint is not None and hint[0] < seed:
        seed = hint[0]

    sums = [0.0] * tp
    counts = [0] * tp
    last_group = [-1] * n_heads
    assign = [0] * m
    best_delta = cutoff
    best_assign = None
    nodes = 0

    def dfs(t: int, opened: int) -> bool:
        """Returns False when the node budget is exhausted."""
        nonlocal best_delta, best_assign, nodes
        if nodes >= node_budget:
            return False
        nodes += 1
        if t == m:
            hi = lo = sums[0]
            for j in range(1, tp):
                s = sums[j]
                if s > hi:
                    hi = s
                elif s < lo:
                    lo = s
            delta = hi - lo
            if delta < best_delta and delta <= seed:
                best_delta = delta
                best_assign = assign.copy()
            return True

        # lower bound on the spread of any completion of this node
        ub_min = avg_up
        lb_max = avg_dn
        for j in range(tp):
            if j < opened:
                s = sums[j]
                need = k - counts[j]
            else:
                s = 0.0
                need = k
            hi = s + (prefix[t + need] - prefix[t])
            hi += _pad(hi)
            if hi < ub_min:
                ub_min = hi
            lo = s + (prefix[m] - prefix[m - need])
            lo -= _pad(lo)
            if lo > lb_max:
                lb_max = lo
            if j >= opened:
                break  # unopened groups are interchangeable
        lb = lb_max - ub_min
        if lb >= best_delta or lb > seed:
            return True

        w = weights[t]
        h = heads[t]
        trailing = same_after[t]
        start = last_group[h] + 1
        limit = opened if opened < tp else tp - 1
        for j in range(start, limit + 1):
            if j < opened:
                cnt = counts[j]
                if cnt >= k:
                    continue
                base = sums[j]
            else:
                cnt = 0
                base = 0.0
            if trailing:
                avail = 0
                for j2 in range(j + 1, tp):
                    if j2 >= opened or counts[j2] < k:
                        avail += 1
                if trailing > avail:
                    continue
            # whichever group takes this copy must also absorb k-cnt-1 more
            fill = k - cnt - 1
            forced = base + w + (prefix[m] - prefix[m - fill])
            forced -= _pad(forced)
            branch_lb = forced - ub_min
            if branch_lb >= best_delta or branch_lb > seed:
                continue
            sums[j] = base + w
            counts[j] = cnt + 1
            last_group[h] = j
            assign[t] = j
            alive = dfs(t + 1, opened + 1 if j == opened else opened)
            sums[j] = base
            counts[j] = cnt
            last_group[h] = start - 1
            if not alive:
                return False
        return True

    dfs(0, 0)

    # precedence on equal spreads: in-order find, then hint, then greedy
    result = None
    if best_assign is not None:
        result = (best_delta, best_assign)
    if hint is not None and hint[0] < cutoff:
        if result is None or hint[0] < result[0]:
            result = (hint[0], list(hint[1]))
    if greedy is not None and greedy[0] < cutoff:
        if result is None or greedy[0] < result[0]:
            result = greedy
    return result, nodes


def solve_free_split(weights, heads, tp, cutoff,
                     node_budget: int = DEFAULT_NODE_BUDGET, hint=None):
    """Relaxed variant: groups need not share a cardinality, only be nonempty.

    Same ordering, tie-break and budget contract as solve_equal_split; exists
    for experimentation, with mean-bracket bounds only.
    """
    m = len(weights)
    if m < tp:
        return None, 0

    total = 0.0
    for w in weights:
        total += w
    avg = total / tp
    avg_up = avg + _pad(avg)
    avg_dn = avg - _pad(avg)

    n_heads = 0
    for h in heads:
        if h + 1 > n_heads:
            n_heads = h + 1
    same_after = [0] * m
    for t in range(m - 2, -1, -1):
        if heads[t + 1] == heads[t]:
            same_after[t] = same_after[t + 1] + 1

    seed = _INF if hint is None else hint[0]

    sums = [0.0] * tp
    last_group = [-1] * n_heads
    assign = [0] * m
    best_delta = cutoff
    best_assign = None
    nodes = 0

    def dfs(t: int, opened: int) -> bool:
        nonlocal best_delta, best_assign, nodes
        if nodes >= node_budget:
            return False
        nodes += 1
        if t == m:
            if opened < tp:
                return True
            hi = lo = sums[0]
            for j in range(1, tp):
                s = sums[j]
                if s > hi:
                    hi = s
                elif s < lo:
                    lo = s
            delta = hi - lo
            if delta < best_delta and delta <= seed:
                best_delta = delta
                best_assign = assign.copy()
            return True

        if m - t < tp - opened:
            return True
        cur_max = 0.0
        for j in range(opened):
            if sums[j] > cur_max:
                cur_max = sums[j]
        lb_max = cur_max if cur_max > avg_dn else avg_dn
        lb = lb_max - avg_up
        if lb >= best_delta or lb > seed:
            return True

        w = weights[t]
        h = heads[t]
        trailing = same_after[t]
        start = last_group[h] + 1
        limit = opened if opened < tp else tp - 1
        for j in range(start, limit + 1):
            if trailing > tp - 1 - j:
                continue
            opened_next = opened + 1 if j == opened else opened
            if m - t - 1 < tp - opened_next:
                continue
            new_sum = sums[j] + w
            branch_lb = new_sum - _pad(new_sum) - avg_up
            if branch_lb >= best_delta or branch_lb > seed:
                continue
            old_sum = sums[j]
            sums[j] = new_sum
            last_group[h] = j
            assign[t] = j
            alive = dfs(t + 1, opened_next)
            sums[j] = old_sum
            last_group[h] = start - 1
            if not alive:
                return False
        return True

    dfs(0, 0)

    result = None
    if best_assign is not None:
        result = (best_delta, best_assign)
    if hint is not None and hint[0] < cutoff:
        if result is None or hint[0] < result[0]:
            result = (hint[0], list(hint[1]))
    return result, nodes
