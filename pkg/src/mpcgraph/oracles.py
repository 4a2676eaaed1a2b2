"""Single-machine reference algorithms and exhaustive brute-force optima.

The local-ratio bookkeeping classes here (`CoverReduction`,
`MatchingReduction`) are shared with the cluster algorithms: the central
machine of each distributed run drives exactly this state, which is what
makes the stack-replay cross-checks exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .exactmath import harmonic
from .instances import (
    Colouring,
    Cover,
    Graph,
    Matching,
    SetCoverInstance,
    TooLarge,
    Uncoverable,
    _vertex_capacities,
    make_matching,
)


class CoverReduction:
    """Residual set weights under local-ratio element processing."""

    def __init__(self, weights: Sequence[Fraction]):
        self.residual = list(weights)
        self.zeroed: list[int] = []

    def process_element(self, covering: Sequence[int]) -> tuple[int, ...]:
        """Apply one local-ratio step for an element with covering sets T_j.

        No-op unless every covering set still has positive residual; returns
        the set indices newly driven to zero (ascending).
        """
        eps = None
        for i in covering:
            r = self.residual[i]
            if r == 0:
                return ()
            if eps is None or r < eps:
                eps = r
        newly = []
        for i in covering:
            self.residual[i] -= eps
            if self.residual[i] == 0:
                newly.append(i)
        return tuple(sorted(newly))


class MatchingReduction:
    """Per-vertex accumulators phi and the push stack of local ratio.

    The modified weight of a never-pushed edge {u, v} is exactly
    ``w - phi[u] - phi[v]``.  With capacities the reduction splits as
    ``phi[u] += gain/b(u)``; a pushed edge is dead by fiat.
    """

    def __init__(self, n: int, caps: Sequence[int] | None = None, epsilon: Fraction = Fraction(0)):
        self.phi = [0] * n
        self.caps = list(caps) if caps is not None else None
        self.epsilon = Fraction(epsilon)
        self.stack: list[tuple[int, int, int, Fraction]] = []
        self.pushed: set[int] = set()

    def gain(self, u: int, v: int, w) -> Fraction:
        return w - self.phi[u] - self.phi[v]

    def alive(self, eid: int, u: int, v: int, w) -> bool:
        if eid in self.pushed:
            return False
        if self.caps is None:
            return self.gain(u, v, w) > 0
        return w > (1 + self.epsilon) * (self.phi[u] + self.phi[v])

    def push(self, eid: int, u: int, v: int, w) -> None:
        g = self.gain(u, v, w)
        if g <= 0:
            raise ValueError("pushing an edge with non-positive modified weight")
        if self.caps is None:
            self.phi[u] += g
            self.phi[v] += g
        else:
            self.phi[u] += Fraction(g, self.caps[u])
            self.phi[v] += Fraction(g, self.caps[v])
        self.stack.append((eid, u, v, g))
        self.pushed.add(eid)

    def unwind(self, n: int) -> list[int]:
        """LIFO unwind, adding each edge iff both endpoints have spare load."""
        caps = self.caps if self.caps is not None else [1] * n
        loads = [0] * n
        picked = []
        for eid, u, v, _ in reversed(self.stack):
            if loads[u] < caps[u] and loads[v] < caps[v]:
                picked.append(eid)
                loads[u] += 1
                loads[v] += 1
        return picked


def lr_set_cover_seq(instance: SetCoverInstance, element_order: Iterable[int] | None = None) -> Cover:
    """Sequential local ratio for weighted set cover (f-approximation).

    Scans elements in the given order (default ascending); for each element
    whose covering sets all have positive residual, subtracts the minimum
    covering residual from all of them.  Returns the zero-residual sets.
    """
    instance.check_coverable()
    if element_order is None:
        element_order = range(instance.m)
    red = CoverReduction(instance.weights)
    for j in element_order:
        red.process_element(instance.dual[j])
    zero = tuple(i for i, r in enumerate(red.residual) if r == 0)
    return Cover(set_ids=zero)


def lr_matching_seq(graph: Graph, edge_order: Iterable[int] | None = None) -> Matching:
    """Sequential local ratio for max-weight matching (2-approximation).

    Pushes each edge of the order whose modified weight is strictly
    positive, then unwinds the stack greedily.  With a complete order the
    result is at least half the optimum, for every order.
    """
    if edge_order is None:
        edge_order = range(graph.m)
    red = MatchingReduction(graph.n)
    for eid in edge_order:
        u, v, w = graph.edges[eid]
        if red.alive(eid, u, v, w):
            red.push(eid, u, v, w)
    return make_matching(graph, red.unwind(graph.n))


def lr_bmatching_seq(
    graph: Graph, b, epsilon, edge_order: Iterable[int] | None = None
) -> Matching:
    """Sequential epsilon-adjusted local ratio for max-weight b-matching.

    An edge stays alive while w > (1+eps)(phi(u)+phi(v)); a pick adds
    gain/b(u) and gain/b(v) to the endpoint accumulators.  The unwind
    respects the per-vertex capacities.
    """
    caps = _vertex_capacities(graph.n, b)
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if edge_order is None:
        edge_order = range(graph.m)
    red = MatchingReduction(graph.n, caps, epsilon)
    for eid in edge_order:
        u, v, w = graph.edges[eid]
        if red.alive(eid, u, v, w):
            red.push(eid, u, v, w)
    return make_matching(graph, red.unwind(graph.n), caps)


def eps_greedy_set_cover_seq(instance: SetCoverInstance, epsilon) -> Cover:
    """Greedy set cover accepting any (1+eps)-near-best cost ratio.

    Repeatedly adds the lowest-indexed set whose uncovered-per-weight ratio
    is within (1+eps) of the best.  Gives a (1+eps)H_Delta approximation.
    """
    instance.check_coverable()
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    uncovered = [set(s) for s in instance.sets]
    covered: set[int] = set()
    chosen: list[int] = []
    while len(covered) < instance.m:
        best = Fraction(0)
        for i in range(instance.n):
            r = Fraction(len(uncovered[i]), 1) / instance.weights[i]
            if r > best:
                best = r
        threshold = best / (1 + epsilon)
        pick = None
        for i in range(instance.n):
            if Fraction(len(uncovered[i]), 1) / instance.weights[i] >= threshold:
                pick = i
                break
        newly = uncovered[pick]
        covered |= newly
        chosen.append(pick)
        for i in range(instance.n):
            if uncovered[i]:
                uncovered[i] -= newly
    return Cover(set_ids=tuple(sorted(chosen)))


def eps_greedy_bound(instance: SetCoverInstance, epsilon) -> Fraction:
    """(1+eps) * H_Delta, the guarantee of the epsilon-greedy algorithm."""
    return (1 + Fraction(epsilon)) * harmonic(instance.max_set_size)


def greedy_vertex_colouring_seq(graph: Graph) -> Colouring:
    """First-fit colouring in vertex-id order; uses at most Delta+1 colours."""
    colours = [0] * graph.n
    for v in range(graph.n):
        taken = {colours[u] for u in graph.neighbours(v) if colours[u]}
        c = 1
        while c in taken:
            c += 1
        colours[v] = c
    return Colouring(kind="vertex", groups=(0,) * graph.n, colours=tuple(colours))


def misra_gries_edge_colouring_seq(graph: Graph) -> Colouring:
    """Misra-Gries fan/rotation edge colouring with at most Delta+1 colours.

    Deterministic: edges are processed in id order, fans extend with the
    lowest feasible colour, and the recolouring vertex is the earliest
    valid fan position.
    """
    n, m = graph.n, graph.m
    palette = graph.max_degree + 1
    colour = [0] * m
    used: list[dict[int, int]] = [dict() for _ in range(n)]

    def other(eid: int, x: int) -> int:
        u, v = graph.endpoints(eid)
        return v if x == u else u

    def set_colour(eid: int, c: int) -> None:
        u, v = graph.endpoints(eid)
        old = colour[eid]
        if old:
            del used[u][old]
            del used[v][old]
        colour[eid] = c
        if c:
            used[u][c] = eid
            used[v][c] = eid

    def free_colour(v: int) -> int:
        for c in range(1, palette + 1):
            if c not in used[v]:
                return c
        raise AssertionError("no free colour within Delta+1 palette")

    def invert_cd_path(x: int, c: int, d: int) -> None:
        path = []
        v, want = x, d
        while True:
            e = used[v].get(want)
            if e is None:
                break
            path.append((e, want))
            v = other(e, v)
            want = c if want == d else d
        for e, _ in path:
            set_colour(e, 0)
        for e, had in path:
            set_colour(e, c if had == d else d)

    def prefix_is_fan(x: int, fan: list[tuple[int, int]], j: int) -> bool:
        for i in range(1, j + 1):
            if colour[fan[i][0]] in used[fan[i - 1][1]]:
                return False
        return True

    for e0 in range(m):
        x, f = graph.endpoints(e0)
        fan = [(e0, f)]
        members = {f}
        while True:
            tip = fan[-1][1]
            ext = None
            for c in range(1, palette + 1):
                if c in used[tip]:
                    continue
                ew = used[x].get(c)
                if ew is None:
                    continue
                wv = other(ew, x)
                if wv in members:
                    continue
                ext = (ew, wv)
                break
            if ext is None:
                break
            fan.append(ext)
            members.add(ext[1])
        c = free_colour(x)
        d = free_colour(fan[-1][1])
        if d in used[x]:
            invert_cd_path(x, c, d)
        pick = None
        for j in range(len(fan)):
            if d in used[fan[j][1]]:
                continue
            if prefix_is_fan(x, fan, j):
                pick = j
                break
        assert pick is not None, "Misra-Gries invariant: a valid fan position exists"
        for i in range(pick):
            shifted = colour[fan[i + 1][0]]
            set_colour(fan[i + 1][0], 0)
            set_colour(fan[i][0], shifted)
        assert d not in used[x]
        set_colour(fan[pick][0], d)

    return Colouring(kind="edge", groups=(0,) * m, colours=tuple(colour))


# ---------------------------------------------------------------------------
# Exhaustive optima

BRUTE_FORCE_CAP = 22


def brute_force_min_cover(instance: SetCoverInstance) -> tuple[Fraction, tuple[int, ...]]:
    """Exact minimum-weight cover by pruned exhaustive enumeration."""
    if instance.n > BRUTE_FORCE_CAP:
        raise TooLarge(f"{instance.n} sets exceeds brute-force cap {BRUTE_FORCE_CAP}")
    instance.check_coverable()
    full = (1 << instance.m) - 1
    masks = []
    for elems in instance.sets:
        mask = 0
        for j in elems:
            mask |= 1 << j
        masks.append(mask)
    # Suffix coverage: what the sets from index i onward can still cover.
    suffix = [0] * (instance.n + 1)
    for i in range(instance.n - 1, -1, -1):
        suffix[i] = suffix[i + 1] | masks[i]
    best_w: list = [None]
    best_ids: list = [()]

    def rec(i: int, covered: int, weight: Fraction, chosen: tuple):
        if covered == full:
            if best_w[0] is None or weight < best_w[0]:
                best_w[0] = weight
                best_ids[0] = chosen
            return
        if i == instance.n or (covered | suffix[i]) != full:
            return
        if best_w[0] is not None and weight >= best_w[0]:
            return
        rec(i + 1, covered | masks[i], weight + instance.weights[i], chosen + (i,))
        rec(i + 1, covered, weight, chosen)

    rec(0, 0, Fraction(0), ())
    if best_w[0] is None:
        raise Uncoverable("no feasible cover")
    return best_w[0], best_ids[0]


def brute_force_max_matching(graph: Graph, b=None) -> tuple[Fraction, tuple[int, ...]]:
    """Exact maximum-weight (b-)matching by exhaustive enumeration."""
    if graph.m > BRUTE_FORCE_CAP:
        raise TooLarge(f"{graph.m} edges exceeds brute-force cap {BRUTE_FORCE_CAP}")
    caps = _vertex_capacities(graph.n, b)
    suffix = [Fraction(0)] * (graph.m + 1)
    for i in range(graph.m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + graph.edges[i][2]
    best_w = [Fraction(0)]
    best_ids: list = [()]
    loads = [0] * graph.n

    def rec(i: int, weight: Fraction, chosen: tuple):
        if weight > best_w[0]:
            best_w[0] = weight
            best_ids[0] = chosen
        if i == graph.m or weight + suffix[i] <= best_w[0]:
            return
        u, v, w = graph.edges[i]
        if loads[u] < caps[u] and loads[v] < caps[v]:
            loads[u] += 1
            loads[v] += 1
            rec(i + 1, weight + w, chosen + (i,))
            loads[u] -= 1
            loads[v] -= 1
        rec(i + 1, weight, chosen)

    rec(0, Fraction(0), ())
    return best_w[0], best_ids[0]


def brute_force(kind: str, instance, b=None) -> tuple[Fraction, tuple[int, ...]]:
    """Exact optimum value and witness for small instances.

    Kinds: "setcover" (min cover), "matching" (max matching),
    "bmatching" (max b-matching with capacities b).
    """
    if kind == "setcover":
        return brute_force_min_cover(instance)
    if kind == "matching":
        return brute_force_max_matching(instance)
    if kind == "bmatching":
        return brute_force_max_matching(instance, b)
    raise ValueError(f"unknown brute-force kind {kind!r}")


# ---------------------------------------------------------------------------
# Direct predicates for MIS / clique outputs


def is_independent_set(graph: Graph, vertices: Iterable[int]) -> bool:
    vs = set(vertices)
    return all(not (u in vs and v in vs) for u, v, _ in graph.edges)


def is_maximal_independent_set(graph: Graph, vertices: Iterable[int]) -> bool:
    vs = set(vertices)
    if not is_independent_set(graph, vs):
        return False
    for v in range(graph.n):
        if v in vs:
            continue
        if not any(u in vs for u in graph.neighbours(v)):
            return False
    return True


def is_clique(graph: Graph, vertices: Iterable[int]) -> bool:
    vs = sorted(set(vertices))
    return all(graph.has_edge(u, v) for i, u in enumerate(vs) for v in vs[i + 1 :])


def is_maximal_clique(graph: Graph, vertices: Iterable[int]) -> bool:
    vs = set(vertices)
    if not is_clique(graph, vs):
        return False
    for v in range(graph.n):
        if v in vs:
            continue
        if all(graph.has_edge(u, v) for u in vs):
            return False
    return True


def greedy_mis_seq(graph: Graph, vertices: Iterable[int] | None = None) -> list[int]:
    """Lowest-id-first maximal independent set on an induced subgraph."""
    pool = sorted(set(range(graph.n)) if vertices is None else set(vertices))
    pool_set = set(pool)
    picked: list[int] = []
    blocked: set[int] = set()
    for v in pool:
        if v in blocked:
            continue
        picked.append(v)
        blocked.add(v)
        for u in graph.neighbours(v):
            if u in pool_set:
                blocked.add(u)
    return picked
