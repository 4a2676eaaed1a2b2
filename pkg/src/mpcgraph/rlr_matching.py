"""Randomized local ratio for max-weight matching and b-matching.

Edges are sharded across machines; each alive edge self-samples with
p = min(eta/|E_i|, 1) (or ships wholesale once |E_i| < 4*eta).  The central
machine keeps the phi accumulators and the push stack, sweeps vertices in
ascending id picking the heaviest sampled edge by current modified weight,
and sends the phi deltas and pushed ids back so edges can recompute their
alive bit.  |E_{i+1}| is folded and rebroadcast through the tree, and the
final unwind is its own charged round.

Weights are rescaled once to a common integer denominator so the whole
reduction chain runs in exact integer arithmetic; b-matching keeps
fractions because the reduction divides by b(v).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .engine import (
    Cluster,
    ClusterConfig,
    Payload,
    RunResult,
    WhpFailure,
    run_with_retries,
)
from .exactmath import as_fraction, ipow_ceil, ipow_floor
from .instances import Graph, _vertex_capacities, make_matching
from .oracles import MatchingReduction

EDGE_WORDS = 4  # (eid, u, v, w) message record


def match_config(graph: Graph, mu="1/5", seed: int = 0, **overrides) -> ClusterConfig:
    """Cluster regime for edge-sharded matching: eta edges per machine,
    budget scaled for 4-word edge records plus resident phi and stack."""
    mu = as_fraction(mu)
    n = max(2, graph.n)
    eta = overrides.pop("eta", None) or ipow_floor(n, 1 + mu)
    machine_count = overrides.pop("machine_count", None) or max(1, -(-graph.m // max(1, eta)))
    k = overrides.get("budget_multiplier", 8)
    budget = overrides.pop("memory_budget_words", None)
    if budget is None:
        if overrides.get("strict_mpc"):
            budget = max(1, k * -(-(EDGE_WORDS * graph.m) // machine_count)) + 4 * graph.n
        else:
            budget = k * (4 * EDGE_WORDS + 2) * eta + 4 * graph.n + 4 * graph.m
    fanout = overrides.pop("fanout", None) or max(2, ipow_ceil(n, mu))
    return ClusterConfig(
        n=n,
        mu=mu,
        c=overrides.pop("c", None),
        eta=eta,
        machine_count=machine_count,
        memory_budget_words=budget,
        fanout=fanout,
        seed=seed,
        **overrides,
    )


def _scaled_weights(graph: Graph) -> tuple[list[int], int]:
    scale = 1
    for _, _, w in graph.edges:
        scale = scale * w.denominator // math.gcd(scale, w.denominator)
    return [int(w * scale) for _, _, w in graph.edges], scale


def approx_max_matching(graph: Graph, config: ClusterConfig | None = None, **kw) -> RunResult:
    """2-approximate maximum weight matching on the simulated cluster.

    Deterministically at least half the brute-force optimum; iteration
    count is O(c/mu) for eta = n^(1+mu) and O(log n) for eta = n, w.h.p.
    """
    cfg = config or match_config(graph, **kw)
    intw, _ = _scaled_weights(graph)
    return run_with_retries(cfg, lambda cluster: _matching_attempt(graph, intw, cluster))


def _matching_attempt(graph: Graph, intw: list[int], cluster: Cluster):
    cfg = cluster.config
    m_count = cfg.machine_count
    eta = cfg.eta
    full_at = 4 * eta
    fail_at = 8 * eta
    n = graph.n

    records = [(eid, u, v, intw[eid]) for eid, (u, v, _) in enumerate(graph.edges)]
    for mid in range(m_count):
        shard = tuple(records[eid] for eid in range(mid, graph.m, m_count))
        cluster.preload(mid, "edges", Payload(shard, EDGE_WORDS * len(shard)))
        alive = frozenset(r[0] for r in shard)
        cluster.preload(mid, "alive", Payload(alive, len(alive)))
        cluster.preload(mid, "phi", Payload({}, 0))
        cluster.preload(mid, "esize", graph.m)
    cluster.preload(0, "stack", Payload((), 0))

    e_size = graph.m
    iterations = 0
    e_series = [e_size]
    delta_series = [_alive_max_degree(cluster, n)]
    push_order: list[int] = []

    while e_size > 0:
        iterations += 1
        if iterations > 10_000:
            raise AssertionError("matching iteration guard tripped")
        full = e_size < full_at
        p = 1.0 if full else min(1.0, eta / e_size)

        def sample_step(mid, store, inbox, rng, p=p, full=full):
            alive = store["alive"].value
            picked = []
            for rec in store["edges"].value:
                if rec[0] in alive and (full or rng.random() < p):
                    picked.append(rec)
            return store, ([(0, "Ev", picked)] if picked else [])

        cluster.run_round(sample_step, label=f"match[{iterations}]:sample")

        def central_step(mid, store, inbox, rng):
            if mid != 0:
                return store, []
            sampled = []
            for _, key, value in inbox:
                if key == "Ev":
                    sampled.extend(value)
            sampled.sort()
            if 2 * len(sampled) > fail_at:
                return {**store, "failed": f"sum|E'_v|={2 * len(sampled)} > {fail_at}"}, []
            stack = store["stack"].value
            red = MatchingReduction(n)
            for eid, u, v, g in stack:
                red.stack.append((eid, u, v, g))
                red.pushed.add(eid)
                red.phi[u] += g
                red.phi[v] += g
            by_vertex: dict[int, list] = {}
            for rec in sampled:
                by_vertex.setdefault(rec[1], []).append(rec)
                by_vertex.setdefault(rec[2], []).append(rec)
            pushes = []
            for v in sorted(by_vertex):
                best = None
                best_key = None
                for eid, a, b2, w in by_vertex[v]:
                    if eid in red.pushed:
                        continue
                    g = w - red.phi[a] - red.phi[b2]
                    if g > 0 and (best_key is None or (g, -eid) > best_key):
                        best_key = (g, -eid)
                        best = (eid, a, b2, w)
                if best is not None:
                    red.push(*best)
                    pushes.append(best[0])
            changed = sorted({x for eid in pushes for x in graph.endpoints(eid)})
            phi_delta = tuple((v, red.phi[v]) for v in changed)
            new_stack = tuple(red.stack)
            out = [
                (d, "upd", (phi_delta, tuple(pushes)))
                for d in range(m_count)
            ]
            return {
                **store,
                "stack": Payload(new_stack, 4 * len(new_stack)),
                "pushes": tuple(pushes),
            }, out

        cluster.run_round(central_step, label=f"match[{iterations}]:central")
        central = cluster.stores[0]
        if "failed" in central:
            cluster.mark_failure(central["failed"])
            raise WhpFailure(central["failed"])
        push_order.extend(central["pushes"])

        def apply_step(mid, store, inbox, rng):
            phi_delta, pushes = (), ()
            for _, key, value in inbox:
                if key == "upd":
                    phi_delta, pushes = value
            phi = store["phi"].value
            if phi_delta:
                phi = {**phi, **dict(phi_delta)}
            dead = set(pushes)
            alive = store["alive"].value
            new_alive = []
            for eid, u, v, w in store["edges"].value:
                if eid in alive and eid not in dead:
                    if w - phi.get(u, 0) - phi.get(v, 0) > 0:
                        new_alive.append(eid)
            alive = frozenset(new_alive)
            return {
                **store,
                "phi": Payload(phi, 2 * len(phi)),
                "alive": Payload(alive, len(alive)),
                "esize": len(alive),
            }, []

        cluster.run_round(apply_step, label=f"match[{iterations}]:apply")
        e_size, _ = cluster.aggregate_and_broadcast("esize", lambda a, b: a + b, label=f"match[{iterations}]:count")
        e_series.append(e_size)
        delta_series.append(_alive_max_degree(cluster, n))

    def unwind_step(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        red = MatchingReduction(n)
        for eid, u, v, g in store["stack"].value:
            red.stack.append((eid, u, v, g))
        ids = tuple(sorted(red.unwind(n)))
        return {**store, "matching": ids}, []

    cluster.run_round(unwind_step, label="match:unwind")
    ids = cluster.stores[0]["matching"]
    matching = make_matching(graph, ids)
    extras = {
        "e_series": e_series,
        "delta_series": delta_series,
        "push_order": push_order,
    }
    return matching, iterations, extras


def _alive_max_degree(cluster: Cluster, n: int) -> int:
    # Instrumentation only (driver-side degree bookkeeping); not charged.
    deg = [0] * n
    for store in cluster.stores:
        alive = store["alive"].value
        for eid, u, v, _ in store["edges"].value:
            if eid in alive:
                deg[u] += 1
                deg[v] += 1
    return max(deg, default=0)


# ---------------------------------------------------------------------------
# b-matching


def bmatch_config(graph: Graph, b, epsilon, mu="1/5", seed: int = 0, **overrides) -> ClusterConfig:
    mu = as_fraction(mu)
    n = max(2, graph.n)
    eta = overrides.pop("eta", None) or ipow_floor(n, 1 + mu)
    machine_count = overrides.pop("machine_count", None) or max(1, -(-graph.m // max(1, eta)))
    caps = _vertex_capacities(graph.n, b)
    delta = Fraction(epsilon) / (1 + Fraction(epsilon))
    pushes = max(1, math.ceil(max(caps, default=1) * math.log(1 / float(delta))))
    k = overrides.get("budget_multiplier", 8)
    budget = overrides.pop("memory_budget_words", None) or k * 10 * pushes * eta + 6 * graph.m + 4 * graph.n
    fanout = overrides.pop("fanout", None) or max(2, ipow_ceil(n, mu))
    return ClusterConfig(
        n=n,
        mu=mu,
        c=overrides.pop("c", None),
        eta=eta,
        machine_count=machine_count,
        memory_budget_words=budget,
        fanout=fanout,
        seed=seed,
        **overrides,
    )


def approx_b_matching(graph: Graph, b, epsilon, config: ClusterConfig | None = None, **kw) -> RunResult:
    """(3 - 2/max{2,b} + 2eps)-approximate maximum weight b-matching.

    Per iteration each vertex samples ceil(b(v) ln(1/delta) n^mu) incident
    alive edges without replacement (deduplicated at the central pass);
    the central machine pushes up to ceil(b(v) ln(1/delta)) alive edges per
    vertex in descending modified weight with the epsilon-adjusted
    reduction.  delta = eps/(1+eps).
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    cfg = config or bmatch_config(graph, b, epsilon, **kw)
    caps = _vertex_capacities(graph.n, b)
    return run_with_retries(cfg, lambda cluster: _bmatching_attempt(graph, caps, epsilon, cluster))


def _bmatching_attempt(graph: Graph, caps: list[int], epsilon: Fraction, cluster: Cluster):
    cfg = cluster.config
    m_count = cfg.machine_count
    eta = cfg.eta
    n = graph.n
    delta = epsilon / (1 + epsilon)
    ln_inv_delta = math.log(float(1 / delta))
    b_max = max(caps, default=1)
    full_at = 2 * b_max * ln_inv_delta * eta
    n_mu = float(ipow_ceil(max(2, n), cfg.mu))
    push_cap = [max(1, math.ceil(caps[v] * ln_inv_delta)) for v in range(n)]
    sample_cap = [max(1, math.ceil(caps[v] * ln_inv_delta * n_mu)) for v in range(n)]

    adj: dict[int, list] = {v: [] for v in range(n)}
    for eid, (u, v, w) in enumerate(graph.edges):
        adj[u].append((eid, u, v, w))
        adj[v].append((eid, u, v, w))
    for mid in range(m_count):
        own = {v: tuple(adj[v]) for v in range(mid, n, m_count)}
        size = sum(1 + 4 * len(lst) for lst in own.values())
        cluster.preload(mid, "adj", Payload(own, size))
        cluster.preload(mid, "phi", Payload({}, 0))
        cluster.preload(mid, "pushed", Payload(frozenset(), 0))
        cluster.preload(mid, "esize", graph.m)
    cluster.preload(0, "stack", Payload((), 0))

    e_size = graph.m
    iterations = 0
    e_series = [e_size]
    push_order: list[int] = []
    one_plus_eps = 1 + epsilon

    while e_size > 0:
        iterations += 1
        if iterations > 10_000:
            raise AssertionError("b-matching iteration guard tripped")
        full = e_size < full_at

        def sample_step(mid, store, inbox, rng, full=full):
            phi = store["phi"].value
            pushed = store["pushed"].value
            out = []
            for v, incident in sorted(store["adj"].value.items()):
                alive = [
                    rec
                    for rec in incident
                    if rec[0] not in pushed
                    and rec[3] > one_plus_eps * (phi.get(rec[1], 0) + phi.get(rec[2], 0))
                ]
                if not alive:
                    continue
                if full or len(alive) <= sample_cap[v]:
                    chosen = alive
                else:
                    chosen = rng.sample(alive, sample_cap[v])
                out.append((0, "Ev", (v, tuple(chosen))))
            return store, out

        cluster.run_round(sample_step, label=f"bmatch[{iterations}]:sample")

        def central_step(mid, store, inbox, rng):
            if mid != 0:
                return store, []
            red = MatchingReduction(n, caps, epsilon)
            for eid, u, v, g in store["stack"].value:
                red.stack.append((eid, u, v, g))
                red.pushed.add(eid)
                red.phi[u] += Fraction(g, caps[u])
                red.phi[v] += Fraction(g, caps[v])
            lists: dict[int, tuple] = {}
            for _, key, value in inbox:
                if key == "Ev":
                    lists[value[0]] = value[1]
            pushes = []
            for v in sorted(lists):
                count = 0
                candidates = list(lists[v])
                while count < push_cap[v]:
                    best = None
                    best_key = None
                    for eid, a, b2, w in candidates:
                        if not red.alive(eid, a, b2, w):
                            continue
                        g = red.gain(a, b2, w)
                        if best_key is None or (g, -eid) > best_key:
                            best_key = (g, -eid)
                            best = (eid, a, b2, w)
                    if best is None:
                        break
                    red.push(*best)
                    pushes.append(best[0])
                    count += 1
            changed = sorted({x for eid in pushes for x in graph.endpoints(eid)})
            phi_delta = tuple((v, red.phi[v]) for v in changed)
            new_stack = tuple(red.stack)
            out = [(d, "upd", (phi_delta, tuple(pushes))) for d in range(m_count)]
            return {
                **store,
                "stack": Payload(new_stack, 4 * len(new_stack)),
                "pushes": tuple(pushes),
            }, out

        cluster.run_round(central_step, label=f"bmatch[{iterations}]:central")
        push_order.extend(cluster.stores[0]["pushes"])

        def apply_step(mid, store, inbox, rng):
            phi_delta, pushes = (), ()
            for _, key, value in inbox:
                if key == "upd":
                    phi_delta, pushes = value
            phi = store["phi"].value
            if phi_delta:
                phi = {**phi, **dict(phi_delta)}
            pushed = store["pushed"].value | set(pushes)
            count = 0
            for v, incident in store["adj"].value.items():
                for eid, a, b2, w in incident:
                    if v == min(a, b2) and eid not in pushed:
                        if w > one_plus_eps * (phi.get(a, 0) + phi.get(b2, 0)):
                            count += 1
            return {
                **store,
                "phi": Payload(phi, 2 * len(phi)),
                "pushed": Payload(pushed, len(pushed)),
                "esize": count,
            }, []

        cluster.run_round(apply_step, label=f"bmatch[{iterations}]:apply")
        e_size, _ = cluster.aggregate_and_broadcast("esize", lambda a, b: a + b, label=f"bmatch[{iterations}]:count")
        e_series.append(e_size)

    def unwind_step(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        red = MatchingReduction(n, caps, epsilon)
        for eid, u, v, g in store["stack"].value:
            red.stack.append((eid, u, v, g))
        ids = tuple(sorted(red.unwind(n)))
        return {**store, "matching": ids}, []

    cluster.run_round(unwind_step, label="bmatch:unwind")
    ids = cluster.stores[0]["matching"]
    matching = make_matching(graph, ids, caps)
    extras = {"e_series": e_series, "push_order": push_order}
    return matching, iterations, extras
