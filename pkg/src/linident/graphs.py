"""Combinatorics on compartment graphs.

Vertices are 1-indexed.  Edges are ``(source, target)`` pairs; the edge
``j -> i`` carries the rate parameter ``a_ij``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .exact import ExactMatrix, exact_rank


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        if self.n < 1:
            raise GraphError("a graph needs at least one vertex")
        seen = set()
        for a, b in self.edges:
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise GraphError(f"edge {a}->{b} references a vertex outside 1..{self.n}")
            if a == b:
                raise GraphError(f"self-loop {a}->{a} is not allowed")
            if (a, b) in seen:
                raise GraphError(f"duplicate edge {a}->{b}")
            seen.add((a, b))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[a].append(b)
        return {v: tuple(sorted(ws)) for v, ws in out.items()}

    @cached_property
    def predecessors(self) -> dict[int, tuple[int, ...]]:
        inn: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            inn[b].append(a)
        return {v: tuple(sorted(ws)) for v, ws in inn.items()}

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edge_set

    def sorted(self) -> DirectedGraph:
        return DirectedGraph(self.n, tuple(sorted(self.edges)))


@dataclass(frozen=True)
class Cycle:
    """Simple directed cycle ``v0 -> v1 -> ... -> v0`` in canonical rotation."""

    vertices: tuple[int, ...]

    @classmethod
    def canonical(cls, verts: Sequence[int]) -> Cycle:
        k = verts.index(min(verts))
        return cls(tuple(verts[k:]) + tuple(verts[:k]))

    @property
    def length(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        v = self.vertices
        return tuple((v[t], v[(t + 1) % len(v)]) for t in range(len(v)))

    def monomial(self) -> dict[tuple[int, int], int]:
        """Exponent map of ``a^C``; the edge ``j -> i`` contributes ``a_ij``."""
        return {(i, j): 1 for j, i in self.edges}

    def indicator(self, g: DirectedGraph) -> list[int]:
        es = set(self.edges)
        return [1 if e in es else 0 for e in g.edges]


@dataclass(frozen=True)
class PathSet:
    source: int
    target: int
    length: int
    paths: tuple[tuple[int, ...], ...]

    def monomials(self) -> list[dict[tuple[int, int], int]]:
        out = []
        for p in self.paths:
            out.append({(p[t + 1], p[t]): 1 for t in range(len(p) - 1)})
        return out


def _reach(adj: dict[int, tuple[int, ...]], start: int, allowed: frozenset[int] | None = None) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen and (allowed is None or w in allowed):
                seen.add(w)
                stack.append(w)
    return seen


def is_strongly_connected(g: DirectedGraph) -> bool:
    """Forward and backward reachability from vertex 1 cover every vertex."""
    full = set(g.vertices)
    return _reach(g.successors, 1) == full and _reach(g.predecessors, 1) == full


def induces_strongly_connected(g: DirectedGraph, subset: Iterable[int]) -> bool:
    sub = frozenset(subset)
    if not sub:
        return False
    start = min(sub)
    return _reach(g.successors, start, sub) == sub and _reach(g.predecessors, start, sub) == sub


def strongly_connected_components(g: DirectedGraph, within: Iterable[int] | None = None) -> list[list[int]]:
    """Tarjan's algorithm (iterative) on the subgraph induced by ``within``."""
    allowed = frozenset(g.vertices if within is None else within)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in sorted(allowed):
        if root in index:
            continue
        work = [(root, iter(g.successors[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in allowed:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(g.successors[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def inductively_strongly_connected(g: DirectedGraph, root: int = 1) -> tuple[int, ...] | None:
    """Vertex ordering from ``root`` whose every prefix induces a strongly
    connected subgraph, or ``None`` when no such ordering exists.

    Backtracking over prefix extensions; prefix sets that are known dead
    ends are memoized, which bounds the search by the number of subsets.
    """
    if not 1 <= root <= g.n:
        raise GraphError(f"root {root} outside 1..{g.n}")
    dead: set[frozenset[int]] = set()
    order = [root]

    def extend(current: frozenset[int]) -> bool:
        if len(current) == g.n:
            return True
        if current in dead:
            return False
        for v in g.vertices:
            if v in current:
                continue
            nxt = current | {v}
            if nxt in dead or not induces_strongly_connected(g, nxt):
                continue
            order.append(v)
            if extend(nxt):
                return True
            order.pop()
        dead.add(current)
        return False

    return tuple(order) if extend(frozenset([root])) else None


def simple_cycles(g: DirectedGraph) -> list[Cycle]:
    """All simple directed cycles (Johnson's algorithm).

    Cycles are rotated to start at their smallest vertex and returned
    sorted by length, then lexicographically.
    """
    found: list[Cycle] = []
    for s in g.vertices:
        # Restrict to vertices >= s and take the component holding s.
        comps = strongly_connected_components(g, range(s, g.n + 1))
        comp = next(c for c in comps if s in c)
        if len(comp) < 2:
            continue
        allowed = frozenset(comp)
        blocked: set[int] = set()
        block_map: dict[int, set[int]] = {v: set() for v in allowed}
        path = [s]

        def unblock(u: int) -> None:
            todo = [u]
            while todo:
                x = todo.pop()
                if x in blocked:
                    blocked.discard(x)
                    todo.extend(block_map[x])
                    block_map[x].clear()

        def circuit(v: int) -> bool:
            closed = False
            blocked.add(v)
            for w in g.successors[v]:
                if w not in allowed:
                    continue
                if w == s:
                    found.append(Cycle.canonical(path))
                    closed = True
                elif w not in blocked:
                    path.append(w)
                    if circuit(w):
                        closed = True
                    path.pop()
            if closed:
                unblock(v)
            else:
                for w in g.successors[v]:
                    if w in allowed:
                        block_map[w].add(v)
            return closed

        circuit(s)
    return sorted(found, key=lambda c: (c.length, c.vertices))


def incidence_matrix(g: DirectedGraph) -> ExactMatrix:
    """|V| x |E| matrix; the column of edge ``j -> k`` is ``e_j - e_k``."""
    rows = [[0] * len(g.edges) for _ in g.vertices]
    for col, (j, k) in enumerate(g.edges):
        rows[j - 1][col] = 1
        rows[k - 1][col] = -1
    return ExactMatrix(g.n, len(g.edges), tuple(tuple(r) for r in rows))


def cycle_space_basis(g: DirectedGraph) -> list[Cycle]:
    """Simple cycles whose indicator vectors form a basis of ker M(G).

    Greedy over :func:`simple_cycles` order: a cycle is kept iff it raises
    the exact rank of the kept indicators.
    """
    if not is_strongly_connected(g):
        raise GraphError("cycle space basis requires strong connectivity")
    target = len(g.edges) - g.n + 1
    basis: list[Cycle] = []
    vecs: list[list[int]] = []
    for c in simple_cycles(g):
        if len(basis) == target:
            break
        trial = vecs + [c.indicator(g)]
        if exact_rank(ExactMatrix.from_rows(trial)) == len(trial):
            basis.append(c)
            vecs = trial
    if len(basis) != target:
        raise AssertionError("simple cycles failed to span the cycle space")
    return basis


def shortest_paths(g: DirectedGraph, source: int, target: int) -> PathSet:
    """Every shortest directed path from ``source`` to ``target``."""
    if source == target:
        raise GraphError("shortest paths need distinct endpoints")
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.successors[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    if target not in dist:
        raise GraphError(f"target unreachable: no path {source} -> {target}")
    d = dist[target]

    # Walk back through the BFS layers.
    def back(v: int) -> list[tuple[int, ...]]:
        if v == source:
            return [(source,)]
        out = []
        for u in g.predecessors[v]:
            if dist.get(u) == dist[v] - 1:
                out.extend(p + (v,) for p in back(u))
        return out

    return PathSet(source, target, d, tuple(sorted(back(target))))
