"""(1+o(1))Delta vertex and edge colouring by random partition.

Vertices (or edges) assign themselves uniformly to kappa = ceil(
n^((c-mu)/2)) groups.  Per-group induced sizes are folded up the tree and
any group exceeding the edge cap (13 n^(1+mu) by default, exposed as
config) fails the run for an engine retry.  Each group ships its induced
subgraph to a group-central machine, which colours it greedily (vertex
mode) or with Misra-Gries (edge mode); the final colour of an item is the
pair (group id, within-group colour).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .engine import Cluster, ClusterConfig, Payload, RunResult, WhpFailure, run_with_retries
from .exactmath import as_fraction, ipow_ceil, ipow_floor
from .instances import Colouring, Graph, make_graph
from .oracles import misra_gries_edge_colouring_seq

EDGE_CAP_FACTOR = 13


def colour_config(graph: Graph, mu="1/5", c=None, seed: int = 0, **overrides) -> ClusterConfig:
    mu = as_fraction(mu)
    n = max(2, graph.n)
    if c is None:
        c = _derive_c(graph)
    else:
        c = as_fraction(c)
    eta = overrides.pop("eta", None) or ipow_floor(n, 1 + mu)
    machine_count = overrides.pop("machine_count", None) or max(1, -(-max(1, graph.m) // max(1, eta)))
    k = overrides.get("budget_multiplier", 8)
    cap = EDGE_CAP_FACTOR * ipow_floor(n, 1 + mu)
    resident = 8 * ((graph.n + 2 * graph.m) // machine_count + 1)
    budget = overrides.pop("memory_budget_words", None) or k * eta + 4 * cap + resident + 4 * graph.n
    fanout = overrides.pop("fanout", None) or max(2, ipow_ceil(n, mu))
    return ClusterConfig(
        n=n,
        mu=mu,
        c=c,
        eta=eta,
        machine_count=machine_count,
        memory_budget_words=budget,
        fanout=fanout,
        seed=seed,
        **overrides,
    )


def _derive_c(graph: Graph) -> Fraction:
    if graph.n < 2 or graph.m == 0:
        return Fraction(0)
    c = math.log(graph.m) / math.log(graph.n) - 1.0
    return Fraction(str(round(max(0.0, c), 6)))


def default_kappa(config: ClusterConfig) -> int:
    c = config.c if config.c is not None else Fraction(0)
    if c <= config.mu:
        return 1
    return max(1, ipow_ceil(config.n, (c - config.mu) / 2))


def vertex_colouring(
    graph: Graph, config: ClusterConfig | None = None, kappa: int | None = None, edge_cap: int | None = None, **kw
) -> RunResult:
    """Proper vertex colouring with at most kappa*(max_i Delta_i + 1)
    colours, w.h.p. (1 + n^(-mu/2) sqrt(6 ln n) + n^(-mu)) * Delta."""
    cfg = config or colour_config(graph, **kw)
    k = kappa or default_kappa(cfg)
    cap = edge_cap if edge_cap is not None else EDGE_CAP_FACTOR * ipow_floor(cfg.n, 1 + cfg.mu)
    return run_with_retries(cfg, lambda cluster: _vertex_attempt(graph, k, cap, cluster))


def _vertex_attempt(graph: Graph, kappa: int, cap: int, cluster: Cluster):
    m_count = cluster.config.machine_count
    for mid in range(m_count):
        own = {v: graph.neighbours(v) for v in range(mid, graph.n, m_count)}
        cluster.preload(mid, "adj", Payload(own, sum(1 + len(t) for t in own.values())))

    def assign_step(mid, store, inbox, rng):
        own = store["adj"].value
        groups = {v: rng.randrange(kappa) for v in sorted(own)}
        out = []
        for v in sorted(own):
            for u in own[v]:
                out.append((u % m_count, "grp", (u, v, groups[v])))
        return {**store, "groups": Payload(groups, 2 * len(groups))}, out

    cluster.run_round(assign_step, label="colour:assign")

    def build_step(mid, store, inbox, rng):
        own = store["adj"].value
        groups = store["groups"].value
        nbr_groups: dict[int, dict] = {v: {} for v in own}
        for _, key, (v, u, gu) in inbox:
            if key == "grp":
                nbr_groups[v][u] = gu
        same = {
            v: tuple(u for u in own[v] if nbr_groups[v].get(u) == groups[v])
            for v in own
        }
        counts = [0] * kappa
        for v, nbrs in same.items():
            counts[groups[v]] += sum(1 for u in nbrs if v < u)
        size = sum(1 + len(t) for t in same.values())
        return {**store, "same": Payload(same, size), "gcounts": tuple(counts)}, []

    cluster.run_round(build_step, label="colour:build")
    counts, _ = cluster.aggregate(
        "gcounts", lambda a, b: tuple(x + y for x, y in zip(a, b)), label="colour:counts"
    )
    for i, cnt in enumerate(counts):
        if cnt > cap:
            reason = f"group {i} has {cnt} edges > cap {cap}"
            cluster.mark_failure(reason)
            raise WhpFailure(reason)

    def ship_step(mid, store, inbox, rng):
        own = store["adj"].value
        groups = store["groups"].value
        same = store["same"].value
        out = []
        for v in sorted(own):
            g = groups[v]
            out.append((g % m_count, "sub", (g, v, same[v])))
        return store, out

    cluster.run_round(ship_step, label="colour:ship")

    def colour_step(mid, store, inbox, rng):
        subs: dict[int, dict] = {}
        for _, key, (g, v, nbrs) in inbox:
            if key == "sub":
                subs.setdefault(g, {})[v] = nbrs
        assignment: dict[int, tuple[int, int]] = {}
        deltas: dict[int, int] = {}
        for g in sorted(subs):
            local = subs[g]
            deltas[g] = max((len(nbrs) for nbrs in local.values()), default=0)
            colour: dict[int, int] = {}
            for v in sorted(local):
                taken = {colour[u] for u in local[v] if u in colour}
                ci = 1
                while ci in taken:
                    ci += 1
                colour[v] = ci
            for v, ci in colour.items():
                assignment[v] = (g, ci)
        size = 3 * len(assignment)
        return {**store, "coloured": Payload(assignment, size), "gdelta": deltas}, []

    cluster.run_round(colour_step, label="colour:greedy")

    merged: dict[int, tuple[int, int]] = {}
    deltas: dict[int, int] = {}
    for store in cluster.stores:
        if "coloured" in store:
            merged.update(store["coloured"].value)
        for g, d in store.get("gdelta", {}).items():
            deltas[g] = max(deltas.get(g, 0), d)
    groups = tuple(merged[v][0] for v in range(graph.n))
    colours = tuple(merged[v][1] for v in range(graph.n))
    result = Colouring(kind="vertex", groups=groups, colours=colours)
    max_delta = max(deltas.values(), default=0)
    bound = kappa * (max_delta + 1)
    assert result.colour_count <= bound, "colour count exceeded kappa*(max Delta_i + 1)"
    extras = {
        "kappa": kappa,
        "group_deltas": [deltas.get(g, 0) for g in range(kappa)],
        "group_edges": list(counts),
        "count_bound": bound,
    }
    return result, 1, extras


def edge_colouring(
    graph: Graph, config: ClusterConfig | None = None, kappa: int | None = None, edge_cap: int | None = None, **kw
) -> RunResult:
    """Proper edge colouring: random edge partition, Misra-Gries per group,
    colour = (group id, within-group colour)."""
    cfg = config or colour_config(graph, **kw)
    k = kappa or default_kappa(cfg)
    cap = edge_cap if edge_cap is not None else EDGE_CAP_FACTOR * ipow_floor(cfg.n, 1 + cfg.mu)
    return run_with_retries(cfg, lambda cluster: _edge_attempt(graph, k, cap, cluster))


def _edge_attempt(graph: Graph, kappa: int, cap: int, cluster: Cluster):
    m_count = cluster.config.machine_count
    for mid in range(m_count):
        own = tuple(
            (eid, graph.edges[eid][0], graph.edges[eid][1])
            for eid in range(mid, graph.m, m_count)
        )
        cluster.preload(mid, "edges", Payload(own, 3 * len(own)))

    def assign_step(mid, store, inbox, rng):
        own = store["edges"].value
        groups = {eid: rng.randrange(kappa) for eid, _, _ in own}
        counts = [0] * kappa
        for g in groups.values():
            counts[g] += 1
        return {**store, "groups": Payload(groups, 2 * len(groups)), "gcounts": tuple(counts)}, []

    cluster.run_round(assign_step, label="ecolour:assign")
    counts, _ = cluster.aggregate(
        "gcounts", lambda a, b: tuple(x + y for x, y in zip(a, b)), label="ecolour:counts"
    )
    for i, cnt in enumerate(counts):
        if cnt > cap:
            reason = f"edge group {i} has {cnt} edges > cap {cap}"
            cluster.mark_failure(reason)
            raise WhpFailure(reason)

    def ship_step(mid, store, inbox, rng):
        own = store["edges"].value
        groups = store["groups"].value
        out = [(groups[eid] % m_count, "sub", (groups[eid], eid, u, v)) for eid, u, v in own]
        return store, out

    cluster.run_round(ship_step, label="ecolour:ship")

    def colour_step(mid, store, inbox, rng):
        subs: dict[int, list] = {}
        for _, key, (g, eid, u, v) in inbox:
            if key == "sub":
                subs.setdefault(g, []).append((eid, u, v))
        assignment: dict[int, tuple[int, int]] = {}
        deltas: dict[int, int] = {}
        for g in sorted(subs):
            triples = sorted(subs[g])
            verts = sorted({x for _, u, v in triples for x in (u, v)})
            remap = {x: i for i, x in enumerate(verts)}
            sub = make_graph(len(verts), [(remap[u], remap[v], 1) for _, u, v in triples])
            deltas[g] = sub.max_degree
            seq = misra_gries_edge_colouring_seq(sub)
            for local_eid, (eid, _, _) in enumerate(triples):
                assignment[eid] = (g, seq.colours[local_eid])
        return {**store, "coloured": Payload(assignment, 3 * len(assignment)), "gdelta": deltas}, []

    cluster.run_round(colour_step, label="ecolour:mg")

    merged: dict[int, tuple[int, int]] = {}
    deltas: dict[int, int] = {}
    for store in cluster.stores:
        if "coloured" in store:
            merged.update(store["coloured"].value)
        for g, d in store.get("gdelta", {}).items():
            deltas[g] = max(deltas.get(g, 0), d)
    groups = tuple(merged[e][0] for e in range(graph.m))
    colours = tuple(merged[e][1] for e in range(graph.m))
    result = Colouring(kind="edge", groups=groups, colours=colours)
    max_delta = max(deltas.values(), default=0)
    bound = kappa * (max_delta + 1)
    assert result.colour_count <= bound, "colour count exceeded kappa*(max Delta_i + 1)"
    extras = {
        "kappa": kappa,
        "group_deltas": [deltas.get(g, 0) for g in range(kappa)],
        "group_edges": list(counts),
        "count_bound": bound,
    }
    return result, 1, extras


def whp_colour_bound(n: int, mu: Fraction, max_degree: int) -> float:
    """Numeric value of (1 + n^(-mu/2) sqrt(6 ln n) + n^(-mu)) * Delta."""
    if n < 2:
        return float(max_degree + 1)
    fmu = float(Fraction(mu))
    return (1 + n ** (-fmu / 2) * math.sqrt(6 * math.log(n)) + n ** (-fmu)) * max_degree
