"""Randomized local ratio f-approximation for weighted set cover.

Machines shard the ground set in its dual view (element j stores T_j and
an alive bit).  Each iteration samples alive elements with probability
p = min(1, 2*eta/|U_r|), ships the sample's T_j lists to the central
machine, runs the sequential local-ratio reduction there in ascending
element order, and broadcasts the newly zeroed sets so machines can drop
covered elements.  The alive count is aggregated and rebroadcast through
the same tree; all of those rounds are charged.
"""

from __future__ import annotations

from random import Random

from .engine import (
    Cluster,
    ClusterConfig,
    Payload,
    RunResult,
    WhpFailure,
    derive_seed,
    run_with_retries,
)
from .exactmath import ipow_ceil, ipow_floor
from .instances import Cover, Graph, SetCoverInstance, vertex_cover_encoding
from .oracles import CoverReduction


def sc_config(instance: SetCoverInstance, mu="1/5", seed: int = 0, **overrides) -> ClusterConfig:
    """Cluster regime for the dual-sharded set-cover engine.

    The scale parameter is the set count n; elements are sharded eta per
    machine, and the budget realizes the f*n^(1+mu) space bound with the
    configured constant multiplier.
    """
    eta = overrides.pop("eta", None)
    return _sc_config(instance.n, instance.m, instance.frequency, mu, seed, eta, **overrides)


def _sc_config(n, m, f, mu, seed, eta, **overrides):
    from .exactmath import as_fraction

    mu = as_fraction(mu)
    if eta is None:
        eta = ipow_floor(n, 1 + mu)
    machine_count = overrides.pop("machine_count", None) or max(1, -(-m // max(1, eta)))
    k = overrides.get("budget_multiplier", 8)
    budget = overrides.pop("memory_budget_words", None)
    if budget is None:
        if overrides.get("strict_mpc"):
            # MPC-strict: S = O(N/M) with N = the dual-view input size
            budget = max(1, k * -(-(m * (f + 1)) // machine_count))
        else:
            budget = k * (f + 2) * eta
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


def approx_sc_f(instance: SetCoverInstance, config: ClusterConfig | None = None, **kw) -> RunResult:
    """f-approximate minimum weight set cover on the simulated cluster.

    Fails an iteration (and retries the whole run) when the sample exceeds
    2*fail_multiplier*eta elements.  The returned cover equals the zero
    residual sets of a valid sequential local-ratio execution.
    """
    instance.check_coverable()
    cfg = config or sc_config(instance, **kw)
    return run_with_retries(cfg, lambda cluster: _sc_f_attempt(instance, cluster))


def _sc_f_attempt(instance: SetCoverInstance, cluster: Cluster):
    cfg = cluster.config
    m_count = cfg.machine_count
    eta = cfg.eta
    fail_at = 2 * cfg.fail_multiplier * eta

    shards = [[] for _ in range(m_count)]
    for j in range(instance.m):
        shards[j % m_count].append(j)
    for mid in range(m_count):
        table = {j: instance.dual[j] for j in shards[mid]}
        size = sum(1 + len(t) for t in table.values())
        cluster.preload(mid, "elems", Payload(table, size))
        cluster.preload(mid, "alive", Payload(frozenset(shards[mid]), len(shards[mid])))
        cluster.preload(mid, "usize", instance.m)
    cluster.preload(0, "residual", Payload(tuple(instance.weights), instance.n))
    cluster.preload(0, "cover", Payload((), 0))

    u_size = instance.m
    iterations = 0
    u_series = [u_size]
    p_series: list[float] = []
    push_order: list[int] = []

    while u_size > 0:
        iterations += 1
        if iterations > 10_000:
            raise AssertionError("set-cover iteration guard tripped")
        p = min(1.0, (2 * eta) / u_size)
        p_series.append(p)

        def sample_step(mid, store, inbox, rng, p=p):
            alive = store["alive"].value
            table = store["elems"].value
            if p >= 1.0:
                picked = sorted(alive)
            else:
                picked = sorted(j for j in alive if rng.random() < p)
            payload = [(j, table[j]) for j in picked]
            return store, ([(0, "sampled", payload)] if payload else [])

        cluster.run_round(sample_step, label=f"sc[{iterations}]:sample")

        def central_step(mid, store, inbox, rng):
            if mid != 0:
                return store, []
            pairs = []
            for _, key, value in inbox:
                if key == "sampled":
                    pairs.extend(value)
            pairs.sort()
            if len(pairs) > fail_at:
                return {**store, "failed": f"|U'|={len(pairs)} > {fail_at}"}, []
            red = CoverReduction(store["residual"].value)
            newly: list[int] = []
            for j, t in pairs:
                newly.extend(red.process_element(t))
            newly = sorted(set(newly))
            cover = store["cover"].value + tuple(newly)
            return {
                **store,
                "residual": Payload(tuple(red.residual), instance.n),
                "cover": Payload(cover, len(cover)),
                "c_new": tuple(newly),
                "sampled_order": tuple(j for j, _ in pairs),
            }, []

        cluster.run_round(central_step, label=f"sc[{iterations}]:central")
        central = cluster.stores[0]
        if "failed" in central:
            cluster.mark_failure(central["failed"])
            raise WhpFailure(central["failed"])
        c_new = central["c_new"]
        push_order.extend(central["sampled_order"])

        cluster.broadcast("c_new", c_new, label=f"sc[{iterations}]:bcast")

        def drop_step(mid, store, inbox, rng):
            delta = store["c_new"]
            if isinstance(delta, Payload):
                delta = delta.value
            alive = store["alive"].value
            table = store["elems"].value
            if delta:
                dset = set(delta)
                alive = frozenset(j for j in alive if dset.isdisjoint(table[j]))
            return {**store, "alive": Payload(alive, len(alive)), "usize": len(alive)}, []

        cluster.run_round(drop_step, label=f"sc[{iterations}]:drop")
        u_size, _ = cluster.aggregate_and_broadcast("usize", lambda a, b: a + b, label=f"sc[{iterations}]:count")
        u_series.append(u_size)

    cover = Cover(set_ids=tuple(sorted(cluster.stores[0]["cover"].value)))
    if not cover.covers(instance):
        raise AssertionError("terminated with uncovered elements")
    extras = {
        "u_series": u_series,
        "p_series": p_series,
        "element_order": push_order,
    }
    return cover, iterations, extras


def vc_config(graph: Graph, mu="1/5", seed: int = 0, **overrides) -> ClusterConfig:
    return _sc_config(graph.n, graph.m, 2, mu, seed, overrides.pop("eta", None), **overrides)


def vertex_cover_2approx(
    graph: Graph,
    vertex_weights=None,
    config: ClusterConfig | None = None,
    **kw,
) -> RunResult:
    """2-approximate minimum weight vertex cover (the f = 2 special case).

    Identical sampling and central steps, but the cover is distributed the
    cheap way: the central machine sends each newly zeroed vertex-set a
    single bit and the vertex forwards it to its incident edges.
    """
    instance = vertex_cover_encoding(graph, vertex_weights)
    cfg = config or vc_config(graph, **kw)
    return run_with_retries(cfg, lambda cluster: _vc_attempt(graph, instance, cluster))


def _vc_attempt(graph: Graph, instance: SetCoverInstance, cluster: Cluster):
    cfg = cluster.config
    m_count = cfg.machine_count
    eta = cfg.eta
    fail_at = 2 * cfg.fail_multiplier * eta
    place_rng = Random(derive_seed(cfg.seed, -1, 0))
    set_home = [place_rng.randrange(m_count) for _ in range(instance.n)]

    elem_home = [j % m_count for j in range(instance.m)]
    shards = [[] for _ in range(m_count)]
    for j in range(instance.m):
        shards[elem_home[j]].append(j)
    for mid in range(m_count):
        table = {j: instance.dual[j] for j in shards[mid]}
        size = sum(1 + len(t) for t in table.values())
        cluster.preload(mid, "elems", Payload(table, size))
        cluster.preload(mid, "alive", Payload(frozenset(shards[mid]), len(shards[mid])))
        cluster.preload(mid, "usize", instance.m)
        sets_here = {i: instance.sets[i] for i in range(instance.n) if set_home[i] == mid}
        cluster.preload(mid, "vsets", Payload(sets_here, sum(1 + len(s) for s in sets_here.values())))
    cluster.preload(0, "residual", Payload(tuple(instance.weights), instance.n))
    cluster.preload(0, "cover", Payload((), 0))

    u_size = instance.m
    iterations = 0
    u_series = [u_size]
    element_order: list[int] = []

    while u_size > 0:
        iterations += 1
        p = min(1.0, (2 * eta) / u_size)

        def sample_step(mid, store, inbox, rng, p=p):
            alive = store["alive"].value
            table = store["elems"].value
            if p >= 1.0:
                picked = sorted(alive)
            else:
                picked = sorted(j for j in alive if rng.random() < p)
            payload = [(j, table[j]) for j in picked]
            return store, ([(0, "sampled", payload)] if payload else [])

        cluster.run_round(sample_step, label=f"vc[{iterations}]:sample")

        def central_step(mid, store, inbox, rng):
            if mid != 0:
                return store, []
            pairs = []
            for _, key, value in inbox:
                if key == "sampled":
                    pairs.extend(value)
            pairs.sort()
            if len(pairs) > fail_at:
                return {**store, "failed": f"|U'|={len(pairs)} > {fail_at}"}, []
            red = CoverReduction(store["residual"].value)
            newly: list[int] = []
            for j, t in pairs:
                newly.extend(red.process_element(t))
            newly = sorted(set(newly))
            cover = store["cover"].value + tuple(newly)
            out = [(set_home[i], "in-cover", i) for i in newly]
            return {
                **store,
                "residual": Payload(tuple(red.residual), instance.n),
                "cover": Payload(cover, len(cover)),
                "sampled_order": tuple(j for j, _ in pairs),
            }, out

        cluster.run_round(central_step, label=f"vc[{iterations}]:central")
        central = cluster.stores[0]
        if "failed" in central:
            cluster.mark_failure(central["failed"])
            raise WhpFailure(central["failed"])
        element_order.extend(central["sampled_order"])

        def forward_step(mid, store, inbox, rng):
            vsets = store["vsets"].value
            out = []
            for _, key, i in inbox:
                if key == "in-cover":
                    for e in vsets[i]:
                        out.append((elem_home[e], "covered", e))
            return store, out

        cluster.run_round(forward_step, label=f"vc[{iterations}]:forward")

        def drop_step(mid, store, inbox, rng):
            dropped = {e for _, key, e in inbox if key == "covered"}
            alive = store["alive"].value
            if dropped:
                alive = frozenset(j for j in alive if j not in dropped)
            return {**store, "alive": Payload(alive, len(alive)), "usize": len(alive)}, []

        cluster.run_round(drop_step, label=f"vc[{iterations}]:drop")
        u_size, _ = cluster.aggregate_and_broadcast("usize", lambda a, b: a + b, label=f"vc[{iterations}]:count")
        u_series.append(u_size)

    cover = Cover(set_ids=tuple(sorted(cluster.stores[0]["cover"].value)))
    if not cover.covers(instance):
        raise AssertionError("terminated with uncovered edges")
    extras = {"u_series": u_series, "element_order": element_order}
    return cover, iterations, extras
