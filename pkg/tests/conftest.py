"""Shared helpers and session-scoped heavy runs reused across test files."""

from __future__ import annotations

from random import Random

import pytest

from mpcgraph.colouring import vertex_colouring
from mpcgraph.instances import generate_graph, make_graph


def random_graph(rng: Random, n: int, max_edges: int, w_lo: int = 1, w_hi: int = 10):
    """Uniform random simple graph with at most max_edges edges."""
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    m = rng.randint(0, min(max_edges, len(all_pairs)))
    pairs = rng.sample(all_pairs, m)
    return make_graph(n, [(u, v, rng.randint(w_lo, w_hi)) for u, v in pairs])


def random_nonempty_graph(rng: Random, n: int, max_edges: int, w_lo: int = 1, w_hi: int = 10):
    g = random_graph(rng, n, max_edges, w_lo, w_hi)
    while g.m == 0:
        g = random_graph(rng, n, max_edges, w_lo, w_hi)
    return g


@pytest.fixture(scope="session")
def colouring_4096_runs():
    """20 seeded vertex colourings at n = 4096, mu = 1/5, c = 2/5 (shared
    by the concentration invariant and the acceptance bound check)."""
    graph = generate_graph(4096, "2/5", (1, 1), seed=606)
    runs = []
    for seed in range(20):
        runs.append(vertex_colouring(graph, mu="1/5", c="2/5", seed=seed))
    return graph, runs
