"""Matching oracles and the counting wrapper around them.

Two oracle shapes are used by the engine:

* a *matching oracle* has a declared approximation constant ``c`` and a
  ``find(g)`` method returning a matching of size at least ``mu(g)/c``;
* a *weak oracle* is bound to a host graph and answers induced-subgraph
  queries ``query(s, delta)`` with either a matching of ``g[s]`` of size
  at least ``lam * delta * n`` or None, and may answer None only when
  ``mu(g[s]) < delta * n``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import InternalConsistencyError
from .graph import Edge, Graph, Matching, edge_key


class GreedyOracle:
    """Inclusion-wise maximal matching; a 2-approximation.

    Edges are scanned in sorted order, so the result is deterministic.
    Passing a seed shuffles the scan order reproducibly instead.
    """

    c = 2

    def __init__(self, seed: int | None = None):
        self.seed = seed

    def find(self, g: Graph) -> Matching:
        edges = sorted(g.edges)
        if self.seed is not None:
            random.Random(self.seed).shuffle(edges)
        m = Matching(g.n)
        for u, v in edges:
            if m.mate[u] is None and m.mate[v] is None:
                m.add(u, v)
        return m


def greedy_oracle(g: Graph, seed: int | None = None) -> Matching:
    return GreedyOracle(seed).find(g)


# -- exact maximum matching (blossom search) ---------------------------------


def _blossom_mcm(n: int, adj: list[list[int]]) -> list[int]:
    """Array-based blossom algorithm; returns the mate array (-1 = free)."""
    match = [-1] * n
    # Cheap maximal matching first; the search then only runs from the
    # leftover free vertices.
    for u in range(n):
        if match[u] == -1:
            for v in adj[u]:
                if match[v] == -1:
                    match[u] = v
                    match[v] = u
                    break

    p = [-1] * n  # parent in the alternating forest
    base = list(range(n))

    def lca(a: int, b: int) -> int:
        used_path = [False] * n
        x = a
        while True:
            x = base[x]
            used_path[x] = True
            if match[x] == -1:
                break
            x = p[match[x]]
        y = b
        while True:
            y = base[y]
            if used_path[y]:
                return y
            y = p[match[y]]

    def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[match[v]]] = True
            p[v] = child
            child = match[v]
            v = p[match[v]]

    def find_path(root: int) -> int:
        for i in range(n):
            p[i] = -1
            base[i] = i
        used = [False] * n
        used[root] = True
        queue = [root]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    # Odd cycle found: contract the blossom.
                    curbase = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, curbase, to, blossom)
                    mark_path(to, curbase, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = curbase
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if match[to] == -1:
                        return to
                    used[match[to]] = True
                    queue.append(match[to])
        return -1

    for v in range(n):
        if match[v] == -1:
            u = find_path(v)
            if u == -1:
                continue
            while u != -1:
                pv = p[u]
                ppv = match[pv]
                match[u] = pv
                match[pv] = u
                u = ppv
    return match


class ExactOracle:
    """Maximum cardinality matching; the c = 1 oracle."""

    c = 1

    def find(self, g: Graph) -> Matching:
        mate = _blossom_mcm(g.n, g.adj)
        m = Matching(g.n)
        for u in range(g.n):
            v = mate[u]
            if v > u:
                m.add(u, v)
        return m


def exact_mcm(g: Graph) -> Matching:
    return ExactOracle().find(g)


class AdversarialOracle:
    """Returns exactly ceil(mu/c) edges of a maximum matching.

    The worst matching a c-approximate oracle is allowed to return, used
    to stress the boosting engine.
    """

    def __init__(self, c_target: int):
        if c_target < 1:
            raise ValueError(f"approximation constant must be >= 1, got {c_target}")
        self.c = c_target

    def find(self, g: Graph) -> Matching:
        full = exact_mcm(g)
        mu = len(full)
        keep = -(-mu // self.c)  # ceil
        m = Matching(g.n)
        for u, v in sorted(full.edges)[:keep]:
            m.add(u, v)
        return m


def adversarial_oracle(g: Graph, c_target: int) -> Matching:
    return AdversarialOracle(c_target).find(g)


def make_oracle(name: str, seed: int | None = None):
    """Oracle registry used by the CLI: exact | greedy | adversarial:<c>."""
    if name == "exact":
        return ExactOracle()
    if name == "greedy":
        return GreedyOracle(seed)
    if name.startswith("adversarial"):
        c = int(name.split(":", 1)[1]) if ":" in name else 2
        return AdversarialOracle(c)
    raise ValueError(f"unknown oracle {name!r}")


# -- weak oracles -------------------------------------------------------------


class WeakFromMatchingOracle:
    """Induced-subgraph weak oracle built from a matching oracle.

    Bound to a host graph.  ``query(s, delta)`` runs the inner oracle on
    ``host[s]`` and reports None when the found matching is smaller than
    ``lam * delta * n``.  With an exact inner oracle ``lam = 1`` is
    sound; with a c-approximate one ``lam = 1/c``.
    """

    def __init__(self, host: Graph, inner, lam: float | None = None):
        self.host = host
        self.inner = inner
        self.lam = (1.0 / inner.c) if lam is None else lam

    def query(self, s: set[int], delta: float) -> list[Edge] | None:
        sub, back = self.host.induced(s)
        found = self.inner.find(sub)
        threshold = self.lam * delta * self.host.n
        if len(found) < threshold:
            return None
        return sorted(edge_key(back[u], back[v]) for u, v in found.edges)


def weak_from_exact(host: Graph, lam: float = 1.0) -> WeakFromMatchingOracle:
    return WeakFromMatchingOracle(host, ExactOracle(), lam)


def weak_from_greedy(host: Graph, lam: float = 0.5) -> WeakFromMatchingOracle:
    return WeakFromMatchingOracle(host, GreedyOracle(), lam)


def make_weak_backend(name: str, seed: int | None = None):
    """Weak-oracle factory registry: weak-exact | weak-greedy.

    Returns a callable binding a host graph to a fresh weak oracle.
    """
    if name == "weak-exact":
        return lambda host: weak_from_exact(host)
    if name == "weak-greedy":
        return lambda host: weak_from_greedy(host)
    raise ValueError(f"unknown weak backend {name!r}")


# -- counting -----------------------------------------------------------------


@dataclass
class OracleStats:
    """What happened across the counted calls.

    ``processing_steps`` holds one entry per engine processing step: the
    largest component (structure) size the step touched.  The simulated
    round models are derived from these numbers by the reporting layer.
    """

    calls: int = 0
    weak_calls: int = 0
    weak_bottoms: int = 0
    queried_vertices: int = 0
    queried_edges: int = 0
    per_call_sizes: list[int] = field(default_factory=list)
    processing_steps: list[int] = field(default_factory=list)

    def note_step(self, max_component: int) -> None:
        self.processing_steps.append(max(1, max_component))


class CountedOracle:
    """Counting wrapper; wrapping a wrapped oracle composes the counts."""

    def __init__(self, inner, stats: OracleStats | None = None):
        self.inner = inner
        self.stats = stats or OracleStats()
        self.c = inner.c

    def find(self, g: Graph) -> Matching:
        m = self.inner.find(g)
        if len(m) == 0 and g.m > 0:
            # A c-approximate oracle must return >= mu/c >= 1/c > 0 edges.
            raise InternalConsistencyError(
                f"oracle returned an empty matching on a graph with {g.m} edges"
            )
        self.stats.calls += 1
        self.stats.queried_vertices += g.n
        self.stats.queried_edges += g.m
        self.stats.per_call_sizes.append(len(m))
        return m


class CountedWeakOracle:
    """Counting wrapper for weak oracles; exposes the same query shape."""

    def __init__(self, inner, stats: OracleStats | None = None):
        self.inner = inner
        self.stats = stats or OracleStats()
        self.lam = inner.lam

    def query(self, s: set[int], delta: float) -> list[Edge] | None:
        out = self.inner.query(s, delta)
        self.stats.weak_calls += 1
        self.stats.queried_vertices += len(s)
        if out is None:
            self.stats.weak_bottoms += 1
        else:
            self.stats.per_call_sizes.append(len(out))
        return out


def counted(oracle) -> CountedOracle | CountedWeakOracle:
    """Wrap either oracle shape with call counting."""
    if hasattr(oracle, "query"):
        return CountedWeakOracle(oracle)
    return CountedOracle(oracle)
