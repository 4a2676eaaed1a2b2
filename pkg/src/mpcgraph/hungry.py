"""Hungry-greedy maximal independent set and maximal clique.

Vertices are sharded with their adjacency lists; machines track each own
vertex's alive-neighbour set (so its alive degree), sample heavy vertices
into groups, and ship the winners' alive-neighbour lists to the central
machine, which adds a vertex per group when its degree still clears the
phase threshold.  Dead-vertex deltas flow back down the broadcast tree and
neighbour counters are repaired with a charged notify round plus a charged
apply round.

Group sampling draws the s smallest of i.i.d. uniform keys per group via
order statistics, which is exactly uniform-without-replacement within a
group and independent across groups.

The maximal clique variant runs the same logic against the lazily
materialized complement: machines keep the global active list (maintained
through the charged delta broadcasts, realizing the relabeling scheme) and
derive complement degrees and complement neighbour label lists on demand.
The complement is never materialized in full.
"""

from __future__ import annotations

from fractions import Fraction

from .engine import Cluster, ClusterConfig, Payload, RunResult, run_with_retries
from .exactmath import as_fraction, ipow_ceil, ipow_floor, pow_threshold
from .instances import Graph


def _order_stat_sample(rng, members: list, s: int) -> list:
    """(key, vertex) pairs for the s smallest of len(members) iid
    U(0,1) keys, owners uniform without replacement."""
    t = len(members)
    count = min(s, t)
    if count == 0:
        return []
    keys = []
    prev = 0.0
    for i in range(count):
        prev = 1.0 - (1.0 - prev) * (1.0 - rng.random()) ** (1.0 / (t - i))
        keys.append(prev)
    owners = rng.sample(members, count)
    return list(zip(keys, owners))


def hg_config(graph: Graph, mu="1/5", seed: int = 0, *, alpha_den: int = 2, **overrides) -> ClusterConfig:
    """Cluster regime for vertex-sharded hungry-greedy runs."""
    mu = as_fraction(mu)
    n = max(2, graph.n)
    eta = overrides.pop("eta", None) or ipow_floor(n, 1 + mu)
    machine_count = overrides.pop("machine_count", None) or max(1, -(-max(1, graph.m) // max(1, eta)))
    k = overrides.get("budget_multiplier", 8)
    alpha = mu / alpha_den if mu > 0 else Fraction(1, 2)
    classes = int(-(-Fraction(1) // alpha))
    resident = 6 * ((graph.n + 2 * graph.m) // machine_count + 1)
    budget = overrides.pop("memory_budget_words", None) or k * (classes + 2) * eta + resident + 4 * graph.n
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


def _preload_vertex_shards(graph: Graph, cluster: Cluster) -> None:
    m_count = cluster.config.machine_count
    for mid in range(m_count):
        own = {v: graph.neighbours(v) for v in range(mid, graph.n, m_count)}
        size = sum(1 + len(t) for t in own.values())
        cluster.preload(mid, "adj", Payload(own, size))
        anbrs = {v: frozenset(t) for v, t in own.items()}
        cluster.preload(mid, "anbrs", Payload(anbrs, size))
        alive = frozenset(own)
        cluster.preload(mid, "alive", Payload(alive, len(alive)))
        cluster.preload(mid, "vh", 0)


def _dead_update_rounds(cluster: Cluster, delta: tuple, thr: int, tag: str) -> None:
    """Broadcast the newly dead set, notify their alive neighbours, apply
    the degree decrements and recount the heavy set at threshold thr."""
    m_count = cluster.config.machine_count
    cluster.broadcast("dead_delta", delta, label=f"{tag}:dead")

    def notify_step(mid, store, inbox, rng):
        dd = store["dead_delta"]
        if isinstance(dd, Payload):
            dd = dd.value
        alive = store["alive"].value
        anbrs = store["anbrs"].value
        out = []
        local_dead = [w for w in dd if w in alive]
        for w in local_dead:
            for u in anbrs[w]:
                out.append((u % m_count, "deadnbr", (u, w)))
        if local_dead:
            alive = alive - frozenset(local_dead)
            anbrs = {v: s for v, s in anbrs.items() if v in alive}
            size = sum(1 + len(s) for s in anbrs.values())
            store = {
                **store,
                "alive": Payload(alive, len(alive)),
                "anbrs": Payload(anbrs, size),
            }
        return store, out

    cluster.run_round(notify_step, label=f"{tag}:notify")

    def apply_step(mid, store, inbox, rng, thr=thr):
        alive = store["alive"].value
        anbrs = store["anbrs"].value
        hits: dict[int, set] = {}
        for _, key, (u, w) in inbox:
            if key == "deadnbr" and u in alive:
                hits.setdefault(u, set()).add(w)
        if hits:
            anbrs = dict(anbrs)
            for u, gone in hits.items():
                anbrs[u] = anbrs[u] - gone
            size = sum(1 + len(s) for s in anbrs.values())
            store = {**store, "anbrs": Payload(anbrs, size)}
        vh = sum(1 for v in alive if len(anbrs[v]) >= thr)
        return {**store, "vh": vh}, []

    cluster.run_round(apply_step, label=f"{tag}:apply")


def _recount_round(cluster: Cluster, thr: int, tag: str) -> None:
    def recount_step(mid, store, inbox, rng, thr=thr):
        alive = store["alive"].value
        anbrs = store["anbrs"].value
        vh = sum(1 for v in alive if len(anbrs[v]) >= thr)
        return {**store, "vh": vh}, []

    cluster.run_round(recount_step, label=f"{tag}:recount")


def mis_simple(graph: Graph, config: ClusterConfig | None = None, **kw) -> RunResult:
    """Maximal independent set by phased heavy-vertex sampling (the simple
    O(1/mu^2)-round variant, phase exponent alpha = mu/2)."""
    cfg = config or hg_config(graph, alpha_den=2, **kw)
    return run_with_retries(cfg, lambda cluster: _mis_simple_attempt(graph, cluster))


def _mis_simple_attempt(graph: Graph, cluster: Cluster):
    cfg = cluster.config
    n = max(2, graph.n)
    mu = cfg.mu
    alpha = mu / 2 if mu > 0 else Fraction(1, 2)
    phases = int(-(-Fraction(1) // alpha))
    s_size = ipow_ceil(n, mu / 2) if mu > 0 else 1
    m_count = cfg.machine_count

    _preload_vertex_shards(graph, cluster)
    cluster.preload(0, "I", Payload((), 0))

    independent: list[int] = []
    dead: set[int] = set()
    passes = 0
    vh_series: list[tuple[int, int, int]] = []

    for phase in range(1, phases + 1):
        thr = pow_threshold(n, 1 - phase * alpha)
        groups = ipow_ceil(n, phase * alpha)
        cluster.broadcast("phase", phase, label=f"mis[{phase}]:phase")
        _recount_round(cluster, thr, f"mis[{phase}]")
        vh, _ = cluster.aggregate("vh", lambda a, b: a + b, label=f"mis[{phase}]:vh")

        while vh >= groups:
            passes += 1
            vh_before = vh

            def cand_step(mid, store, inbox, rng, thr=thr, groups=groups):
                alive = store["alive"].value
                anbrs = store["anbrs"].value
                heavy = sorted(v for v in alive if len(anbrs[v]) >= thr)
                out = []
                if heavy:
                    for j in range(groups):
                        cands = [
                            (key, v, tuple(sorted(anbrs[v])))
                            for key, v in _order_stat_sample(rng, heavy, s_size)
                        ]
                        if cands:
                            out.append((0, "cand", (j, cands)))
                return store, out

            cluster.run_round(cand_step, label=f"mis[{phase}]:cand")

            newly = _central_group_scan(cluster, dead, independent, thr, s_size, f"mis[{phase}]")
            _dead_update_rounds(cluster, newly, thr, f"mis[{phase}]")
            vh, _ = cluster.aggregate("vh", lambda a, b: a + b, label=f"mis[{phase}]:vh")
            vh_series.append((phase, vh_before, vh))

        _phase_end_pull(cluster, graph, dead, independent, thr, f"mis[{phase}]")
        _recount_round(cluster, thr, f"mis[{phase}]:post")
        vh, _ = cluster.aggregate("vh", lambda a, b: a + b, label=f"mis[{phase}]:vh2")
        assert vh == 0, "phase-end MIS left a heavy vertex alive"

    _final_sweep(cluster, dead, independent, "mis")
    extras = {"vh_series": vh_series, "passes": passes}
    return tuple(sorted(independent)), passes, extras


def _central_group_scan(cluster, dead, independent, thr, s_size, tag) -> tuple:
    """Run the central round that scans sampled groups in order and adds
    each group's first vertex whose current alive degree clears thr."""

    def central_step(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        groups: dict[int, list] = {}
        for _, key, value in inbox:
            if key == "cand":
                groups.setdefault(value[0], []).extend(value[1])
        added: list[int] = []
        newly_dead: list[int] = []
        dead_now = set(dead)
        for j in sorted(groups):
            cands = sorted(groups[j], key=lambda t: (t[0], t[1]))[:s_size]
            for _, v, nbrs in cands:
                if v in dead_now:
                    continue
                alive_nbrs = [u for u in nbrs if u not in dead_now]
                if len(alive_nbrs) >= thr:
                    added.append(v)
                    newly_dead.append(v)
                    newly_dead.extend(alive_nbrs)
                    dead_now.add(v)
                    dead_now.update(alive_nbrs)
                    break
        iset = store["I"].value + tuple(added)
        return {
            **store,
            "I": Payload(iset, len(iset)),
            "added": tuple(added),
            "newly_dead": tuple(sorted(set(newly_dead))),
        }, []

    cluster.run_round(central_step, label=f"{tag}:scan")
    central = cluster.stores[0]
    independent.extend(central["added"])
    newly = central["newly_dead"]
    dead.update(newly)
    return newly


def _phase_end_pull(cluster, graph, dead, independent, thr, tag) -> None:
    """Pull the (small) heavy set's alive subgraph to the central machine
    and extend I by a lowest-id-first greedy MIS on it."""

    def pull_step(mid, store, inbox, rng, thr=thr):
        alive = store["alive"].value
        anbrs = store["anbrs"].value
        heavy = [(v, tuple(sorted(anbrs[v]))) for v in sorted(alive) if len(anbrs[v]) >= thr]
        return store, ([(0, "pull", heavy)] if heavy else [])

    cluster.run_round(pull_step, label=f"{tag}:pull")

    def central_step(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        pulled = []
        for _, key, value in inbox:
            if key == "pull":
                pulled.extend(value)
        pulled.sort()
        dead_now = set(dead)
        added: list[int] = []
        newly_dead: list[int] = []
        for v, nbrs in pulled:
            if v in dead_now:
                continue
            alive_nbrs = [u for u in nbrs if u not in dead_now]
            added.append(v)
            newly_dead.append(v)
            newly_dead.extend(alive_nbrs)
            dead_now.add(v)
            dead_now.update(alive_nbrs)
        iset = store["I"].value + tuple(added)
        return {
            **store,
            "I": Payload(iset, len(iset)),
            "added": tuple(added),
            "newly_dead": tuple(sorted(set(newly_dead))),
        }, []

    cluster.run_round(central_step, label=f"{tag}:phase-mis")
    central = cluster.stores[0]
    independent.extend(central["added"])
    newly = central["newly_dead"]
    dead.update(newly)
    if newly:
        _dead_update_rounds(cluster, newly, thr, f"{tag}:phase-upd")


def _final_sweep(cluster, dead, independent, tag) -> None:
    """All still-alive vertices have alive degree zero; they all join I."""

    def sweep_step(mid, store, inbox, rng):
        alive = store["alive"].value
        anbrs = store["anbrs"].value
        left = tuple((v, len(anbrs[v])) for v in sorted(alive))
        return store, ([(0, "sweep", left)] if left else [])

    cluster.run_round(sweep_step, label=f"{tag}:sweep-ship")

    def central_step(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        left = []
        for _, key, value in inbox:
            if key == "sweep":
                left.extend(value)
        for v, deg in left:
            assert deg == 0, f"final sweep saw alive vertex {v} with degree {deg}"
        iset = store["I"].value + tuple(v for v, _ in sorted(left))
        return {**store, "I": Payload(iset, len(iset)), "added": tuple(v for v, _ in left)}, []

    cluster.run_round(central_step, label=f"{tag}:sweep")
    independent.extend(cluster.stores[0]["added"])


def mis_fast(graph: Graph, config: ClusterConfig | None = None, **kw) -> RunResult:
    """Maximal independent set with degree-class stratification (the
    O(c/mu)-round variant, alpha = mu/8)."""
    cfg = config or hg_config(graph, alpha_den=8, **kw)
    return run_with_retries(cfg, lambda cluster: _mis_fast_attempt(graph, cluster))


def _mis_fast_attempt(graph: Graph, cluster: Cluster):
    cfg = cluster.config
    n = max(2, graph.n)
    mu = cfg.mu
    alpha = mu / 8 if mu > 0 else Fraction(1, 8)
    classes = int(-(-Fraction(1) // alpha))
    s_size = ipow_ceil(n, mu / 2) if mu > 0 else 1
    m_count = cfg.machine_count
    edge_floor = ipow_floor(n, 1 + mu)
    class_lo = [pow_threshold(n, 1 - i * alpha) for i in range(classes + 2)]
    group_counts = [ipow_ceil(n, (i + 1) * alpha) for i in range(classes + 2)]

    _preload_vertex_shards(graph, cluster)
    cluster.preload(0, "I", Payload((), 0))

    independent: list[int] = []
    dead: set[int] = set()

    # Initially isolated vertices join I outright.
    def iso_step(mid, store, inbox, rng):
        isolated = tuple(v for v in sorted(store["alive"].value) if not store["anbrs"].value[v])
        return store, ([(0, "iso", isolated)] if isolated else [])

    cluster.run_round(iso_step, label="mis2:iso-ship")

    def iso_central(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        iso = []
        for _, key, value in inbox:
            if key == "iso":
                iso.extend(value)
        iset = store["I"].value + tuple(sorted(iso))
        return {**store, "I": Payload(iset, len(iset)), "added": tuple(sorted(iso))}, []

    cluster.run_round(iso_central, label="mis2:iso")
    iso_added = cluster.stores[0]["added"]
    independent.extend(iso_added)
    dead.update(iso_added)
    if iso_added:
        _dead_update_rounds(cluster, tuple(iso_added), 1, "mis2:iso-upd")

    def dsum_round():
        def dsum_step(mid, store, inbox, rng):
            alive = store["alive"].value
            anbrs = store["anbrs"].value
            return {**store, "dsum": sum(len(anbrs[v]) for v in alive)}, []

        cluster.run_round(dsum_step, label="mis2:dsum")
        total, _ = cluster.aggregate("dsum", lambda a, b: a + b, label="mis2:edges")
        return total // 2

    e_k = dsum_round()
    e_series = [e_k]
    iterations = 0

    while e_k >= edge_floor:
        iterations += 1

        def cand_step(mid, store, inbox, rng):
            alive = store["alive"].value
            anbrs = store["anbrs"].value
            by_class: dict[int, list] = {}
            for v in sorted(alive):
                d = len(anbrs[v])
                if d == 0:
                    continue
                for i in range(1, classes + 1):
                    if d >= class_lo[i]:
                        by_class.setdefault(i, []).append(v)
                        break
            out = []
            for i, members in sorted(by_class.items()):
                for j in range(group_counts[i]):
                    cands = [
                        (key, v, tuple(sorted(anbrs[v])))
                        for key, v in _order_stat_sample(rng, members, s_size)
                    ]
                    if cands:
                        out.append((0, "cand", ((i, j), cands)))
            return store, out

        cluster.run_round(cand_step, label=f"mis2[{iterations}]:cand")

        def central_step(mid, store, inbox, rng):
            if mid != 0:
                return store, []
            groups: dict[tuple, list] = {}
            for _, key, value in inbox:
                if key == "cand":
                    groups.setdefault(value[0], []).extend(value[1])
            added: list[int] = []
            newly_dead: list[int] = []
            dead_now = set(dead)
            for gid in sorted(groups):
                add_thr = pow_threshold(n, 1 - (gid[0] + 1) * alpha)
                cands = sorted(groups[gid], key=lambda t: (t[0], t[1]))[:s_size]
                for _, v, nbrs in cands:
                    if v in dead_now:
                        continue
                    alive_nbrs = [u for u in nbrs if u not in dead_now]
                    if len(alive_nbrs) >= add_thr:
                        added.append(v)
                        newly_dead.append(v)
                        newly_dead.extend(alive_nbrs)
                        dead_now.add(v)
                        dead_now.update(alive_nbrs)
                        break
            iset = store["I"].value + tuple(added)
            return {
                **store,
                "I": Payload(iset, len(iset)),
                "added": tuple(added),
                "newly_dead": tuple(sorted(set(newly_dead))),
            }, []

        cluster.run_round(central_step, label=f"mis2[{iterations}]:scan")
        central = cluster.stores[0]
        independent.extend(central["added"])
        newly = central["newly_dead"]
        dead.update(newly)
        _dead_update_rounds(cluster, newly, 1, f"mis2[{iterations}]")
        e_k = dsum_round()
        e_series.append(e_k)

    # Finale: the alive subgraph has < n^(1+mu) edges; greedy MIS centrally.
    _phase_end_pull(cluster, graph, dead, independent, 1, "mis2:finale")
    _final_sweep(cluster, dead, independent, "mis2")
    extras = {"e_series": e_series}
    return tuple(sorted(independent)), iterations, extras


# ---------------------------------------------------------------------------
# Maximal clique via the complement relabeling scheme


def relabel_active(active: set, n: int) -> tuple[dict, int]:
    """Permutation sigma mapping active vertices onto [1, k] (ascending id
    to ascending label) and inactive onto (k, n]."""
    act = sorted(v for v in active)
    inact = sorted(v for v in range(n) if v not in active)
    sigma = {v: i + 1 for i, v in enumerate(act)}
    k = len(act)
    sigma.update({v: k + 1 + i for i, v in enumerate(inact)})
    return sigma, k


def maximal_clique(graph: Graph, config: ClusterConfig | None = None, **kw) -> RunResult:
    """Maximal clique: the heavy-sampling MIS run on the lazily derived
    complement graph, using label lists against the global active set."""
    cfg = config or hg_config(graph, alpha_den=2, **kw)
    return run_with_retries(cfg, lambda cluster: _clique_attempt(graph, cluster))


def _clique_attempt(graph: Graph, cluster: Cluster):
    cfg = cluster.config
    n = max(2, graph.n)
    mu = cfg.mu
    alpha = mu / 2 if mu > 0 else Fraction(1, 2)
    phases = int(-(-Fraction(1) // alpha))
    s_size = ipow_ceil(n, mu / 2) if mu > 0 else 1
    m_count = cfg.machine_count

    all_active = tuple(range(graph.n))
    for mid in range(m_count):
        own = {v: frozenset(graph.neighbours(v)) for v in range(mid, graph.n, m_count)}
        size = sum(1 + len(t) for t in own.values())
        cluster.preload(mid, "adj", Payload(own, size))
        cluster.preload(mid, "actives", Payload(all_active, len(all_active)))
        cluster.preload(mid, "vh", 0)
    cluster.preload(0, "K", Payload((), 0))

    clique: list[int] = []
    active: set[int] = set(all_active)

    def comp_degree(own_adj, actives_set, v):
        return len(actives_set) - 1 - sum(1 for u in own_adj[v] if u in actives_set)

    def comp_labels(own_adj, actives_tuple, v):
        nbrs = own_adj[v]
        return tuple(
            lab + 1
            for lab, u in enumerate(actives_tuple)
            if u != v and u not in nbrs
        )

    def dead_rounds(delta: tuple, thr: int, tag: str):
        cluster.broadcast("dead_delta", delta, label=f"{tag}:dead")

        def apply_step(mid, store, inbox, rng, thr=thr):
            dd = store["dead_delta"]
            if isinstance(dd, Payload):
                dd = dd.value
            actives_t = store["actives"].value
            if dd:
                gone = set(dd)
                actives_t = tuple(v for v in actives_t if v not in gone)
            aset = set(actives_t)
            adj = store["adj"].value
            vh = sum(
                1
                for v in adj
                if v in aset and comp_degree(adj, aset, v) >= thr
            )
            return {
                **store,
                "actives": Payload(actives_t, len(actives_t)),
                "vh": vh,
            }, []

        cluster.run_round(apply_step, label=f"{tag}:apply")

    passes = 0
    for phase in range(1, phases + 1):
        thr = pow_threshold(n, 1 - phase * alpha)
        cluster.broadcast("phase", phase, label=f"clique[{phase}]:phase")
        dead_rounds((), thr, f"clique[{phase}]:recount")
        groups = ipow_ceil(n, phase * alpha)
        vh, _ = cluster.aggregate("vh", lambda a, b: a + b, label=f"clique[{phase}]:vh")

        while vh >= groups:
            passes += 1

            def cand_step(mid, store, inbox, rng, thr=thr, groups=groups):
                adj = store["adj"].value
                actives_t = store["actives"].value
                aset = set(actives_t)
                heavy = sorted(
                    v for v in adj if v in aset and comp_degree(adj, aset, v) >= thr
                )
                out = []
                if heavy:
                    for j in range(groups):
                        cands = [
                            (key, v, comp_labels(adj, actives_t, v))
                            for key, v in _order_stat_sample(rng, heavy, s_size)
                        ]
                        if cands:
                            out.append((0, "cand", (j, cands)))
                return store, out

            cluster.run_round(cand_step, label=f"clique[{phase}]:cand")

            snapshot = tuple(sorted(active))

            def central_step(mid, store, inbox, rng, snapshot=snapshot, thr=thr):
                if mid != 0:
                    return store, []
                groups_in: dict[int, list] = {}
                for _, key, value in inbox:
                    if key == "cand":
                        groups_in.setdefault(value[0], []).extend(value[1])
                added: list[int] = []
                newly_dead: list[int] = []
                active_now = set(snapshot)
                for j in sorted(groups_in):
                    cands = sorted(groups_in[j], key=lambda t: (t[0], t[1]))[:s_size]
                    for _, v, labels in cands:
                        if v not in active_now:
                            continue
                        comp_ids = [snapshot[lab - 1] for lab in labels]
                        alive_comp = [u for u in comp_ids if u in active_now]
                        if len(alive_comp) >= thr:
                            added.append(v)
                            newly_dead.append(v)
                            newly_dead.extend(alive_comp)
                            active_now.discard(v)
                            active_now.difference_update(alive_comp)
                            break
                kset = store["K"].value + tuple(added)
                return {
                    **store,
                    "K": Payload(kset, len(kset)),
                    "added": tuple(added),
                    "newly_dead": tuple(sorted(set(newly_dead))),
                }, []

            cluster.run_round(central_step, label=f"clique[{phase}]:scan")
            central = cluster.stores[0]
            clique.extend(central["added"])
            newly = central["newly_dead"]
            active.difference_update(newly)
            dead_rounds(newly, thr, f"clique[{phase}]")
            vh, _ = cluster.aggregate("vh", lambda a, b: a + b, label=f"clique[{phase}]:vh")

        # Phase end: pull the heavy complement subgraph, greedy complement-MIS.
        def pull_step(mid, store, inbox, rng, thr=thr):
            adj = store["adj"].value
            actives_t = store["actives"].value
            aset = set(actives_t)
            heavy = [
                (v, comp_labels(adj, actives_t, v))
                for v in sorted(adj)
                if v in aset and comp_degree(adj, aset, v) >= thr
            ]
            return store, ([(0, "pull", heavy)] if heavy else [])

        cluster.run_round(pull_step, label=f"clique[{phase}]:pull")
        snapshot = tuple(sorted(active))

        def pull_central(mid, store, inbox, rng, snapshot=snapshot):
            if mid != 0:
                return store, []
            pulled = []
            for _, key, value in inbox:
                if key == "pull":
                    pulled.extend(value)
            pulled.sort()
            active_now = set(snapshot)
            added: list[int] = []
            newly_dead: list[int] = []
            for v, labels in pulled:
                if v not in active_now:
                    continue
                comp_ids = [snapshot[lab - 1] for lab in labels]
                alive_comp = [u for u in comp_ids if u in active_now]
                added.append(v)
                newly_dead.append(v)
                newly_dead.extend(alive_comp)
                active_now.discard(v)
                active_now.difference_update(alive_comp)
            kset = store["K"].value + tuple(added)
            return {
                **store,
                "K": Payload(kset, len(kset)),
                "added": tuple(added),
                "newly_dead": tuple(sorted(set(newly_dead))),
            }, []

        cluster.run_round(pull_central, label=f"clique[{phase}]:phase-mis")
        central = cluster.stores[0]
        clique.extend(central["added"])
        newly = central["newly_dead"]
        active.difference_update(newly)
        if newly:
            dead_rounds(newly, thr, f"clique[{phase}]:post")

    # Final sweep: remaining actives are pairwise adjacent in G; all join K.
    def sweep_step(mid, store, inbox, rng):
        adj = store["adj"].value
        actives_t = store["actives"].value
        aset = set(actives_t)
        left = tuple(
            (v, comp_degree(adj, aset, v)) for v in sorted(adj) if v in aset
        )
        return store, ([(0, "sweep", left)] if left else [])

    cluster.run_round(sweep_step, label="clique:sweep-ship")

    def sweep_central(mid, store, inbox, rng):
        if mid != 0:
            return store, []
        left = []
        for _, key, value in inbox:
            if key == "sweep":
                left.extend(value)
        for v, d in left:
            assert d == 0, f"final sweep saw active vertex {v} with complement degree {d}"
        kset = store["K"].value + tuple(v for v, _ in sorted(left))
        return {**store, "K": Payload(kset, len(kset)), "added": tuple(v for v, _ in left)}, []

    cluster.run_round(sweep_central, label="clique:sweep")
    clique.extend(cluster.stores[0]["added"])
    extras = {"passes": passes}
    return tuple(sorted(clique)), passes, extras
