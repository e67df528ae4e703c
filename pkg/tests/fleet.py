"""Random model generators shared by the property and acceptance tests."""

from __future__ import annotations

import random

from linident.graphs import DirectedGraph
from linident.model import CompartmentModel


def random_strongly_connected(rng: random.Random, n_max: int = 5) -> CompartmentModel:
    """A Hamiltonian cycle plus random chords, with random In/Out/Leak."""
    n = rng.randint(2, n_max)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    edges = {(order[t], order[(t + 1) % n]) for t in range(n)}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a != b and rng.random() < 0.3:
                edges.add((a, b))
    edges = sorted(edges)
    rng.shuffle(edges)

    def subset():
        s = {v for v in range(1, n + 1) if rng.random() < 0.4}
        return s or {rng.randint(1, n)}

    return CompartmentModel.build(n, edges, subset(), subset(), subset())


def fleet(size: int = 50, seed: int = 2024, n_max: int = 5) -> list[CompartmentModel]:
    rng = random.Random(seed)
    return [random_strongly_connected(rng, n_max) for _ in range(size)]


def random_isc_graph(rng: random.Random, n: int) -> DirectedGraph:
    """ISC w.r.t. 1 with |E| = 2|V|-2: each new vertex gets one edge in and
    one edge out from the vertices already placed, then 2..n are relabeled."""
    edges = []
    for v in range(2, n + 1):
        u = rng.randint(1, v - 1)
        w = rng.randint(1, v - 1)
        edges += [(u, v), (v, w)]
    perm = list(range(2, n + 1))
    rng.shuffle(perm)
    relabel = {1: 1, **{old: new for old, new in zip(range(2, n + 1), perm)}}
    return DirectedGraph(n, tuple((relabel[a], relabel[b]) for a, b in edges))
