"""Block renamings, congruence of configuration pairs and the finite quotient.

Two pairs of configurations are congruent when one bijective renaming of
blocks maps both contents of the first pair onto the second (control states
untouched).  For finite-control algorithms with block-independent eviction
there are finitely many congruence classes, so the joint behaviour of two
algorithms is captured by a finite graph.  A cycle in that graph whose
accesses make one algorithm miss more often than the other can be repeated
forever, which is what makes the miss difference grow linearly.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import NamedTuple, Optional

import networkx as nx

from .core import (
    BudgetExceeded,
    CacheAlgorithm,
    Configuration,
    initial_configuration,
    update,
)
from .sim import count_misses

DEFAULT_CLASS_CEILING = 10**6

FRESH = -1
"""Edge label for an access to a block cached on neither side."""


class Renaming:
    """A finitely supported bijection on blocks; identity off its support."""

    __slots__ = ("_map",)

    def __init__(self, mapping=None):
        mapping = {a: b for a, b in (mapping or {}).items() if a != b}
        if set(mapping) != set(mapping.values()):
            raise ValueError("renaming must permute its support")
        self._map = mapping

    @classmethod
    def extending(cls, injection: dict) -> "Renaming":
        """Smallest permutation agreeing with an injective partial map.

        Targets that are not themselves sources are sent, in sorted order, to
        the sources that are not targets.
        """
        if len(set(injection.values())) != len(injection):
            raise ValueError("partial renaming is not injective")
        mapping = dict(injection)
        dangling = sorted(set(injection.values()) - set(injection))
        free = sorted(set(injection) - set(injection.values()))
        mapping.update(zip(dangling, free))
        return cls(mapping)

    def __call__(self, block):
        if block is None:
            return None
        return self._map.get(block, block)

    @property
    def support(self) -> frozenset:
        return frozenset(self._map)

    def inverse(self) -> "Renaming":
        return Renaming({b: a for a, b in self._map.items()})

    def then(self, other: "Renaming") -> "Renaming":
        """Apply ``self`` first, then ``other``."""
        keys = set(self._map) | set(other._map)
        return Renaming({k: other(self(k)) for k in keys})

    def is_identity(self) -> bool:
        return not self._map

    def __eq__(self, other):
        return isinstance(other, Renaming) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self):
        return f"Renaming({dict(sorted(self._map.items()))})"


def rename(pi: Renaming, x):
    """Apply ``pi`` blockwise to a trace, a configuration or a pair of them."""
    if isinstance(x, Configuration):
        return Configuration(x.state, tuple(pi(b) for b in x.content))
    if x and isinstance(x[0], Configuration):
        return tuple(rename(pi, g) for g in x)
    return tuple(pi(b) for b in x)


class PairClass(NamedTuple):
    """Canonical representative of a congruence class of configuration pairs."""

    p: Configuration
    q: Configuration

    def blocks(self) -> int:
        return len(self.p.blocks() | self.q.blocks())


def canonicalize(pair) -> tuple:
    """Relabel blocks by first occurrence (P's lines, then Q's) as 0, 1, ...

    Returns ``(PairClass, renaming)`` with ``rename(renaming, pair)`` equal to
    the class representative.  Congruent pairs, and only those, share the
    representative.
    """
    gp, gq = pair
    relabel = {}
    for b in gp.content + gq.content:
        if b is not None and b not in relabel:
            relabel[b] = len(relabel)
    pi = Renaming.extending(relabel)
    return PairClass(rename(pi, gp), rename(pi, gq)), pi


def pack_pair(pair, alphabet=None) -> tuple:
    """Rename a pair into a fixed alphabet of ``n_P + n_Q`` blocks.

    Swap-based construction: blocks already in the alphabet stay put, every
    other cached block is swapped with the smallest unused alphabet block.
    The result is congruent to the input but, unlike :func:`canonicalize`,
    not a class invariant.  Returns ``(packed_pair, renaming)``.
    """
    gp, gq = pair
    if alphabet is None:
        alphabet = range(len(gp.content) + len(gq.content))
    alphabet = list(alphabet)
    members = set(alphabet)
    unused = [b for b in alphabet if b not in set(gp.content) | set(gq.content)]
    pi = {}
    for b in gp.content + gq.content:
        if b is None or pi.get(b, b) in members:
            continue
        target = unused.pop(0)
        # swap b and target
        img_b, img_t = pi.get(b, b), pi.get(target, target)
        pi[b], pi[target] = img_t, img_b
    renaming = Renaming(pi)
    return (rename(renaming, gp), rename(renaming, gq)), renaming


# -- quotient graph -------------------------------------------------------


class Edge(NamedTuple):
    source: int
    access: int  # block of the source representative, or FRESH
    misses: tuple  # (P missed, Q missed) as 0/1
    target: int

    @property
    def gain(self) -> int:
        return self.misses[0] - self.misses[1]


@dataclass
class QuotientGraph:
    nodes: list  # PairClass per node index
    edges: list  # outgoing edge lists, indexed like nodes
    index: dict = field(repr=False)  # PairClass -> node index
    initial: int = 0

    def __len__(self):
        return len(self.nodes)

    def all_edges(self):
        for out in self.edges:
            yield from out


def successors(p: CacheAlgorithm, q: CacheAlgorithm, node: PairClass):
    """Yield ``(access label, (miss_p, miss_q), successor class)`` for a class.

    One access per cached block plus a single fresh access: eviction ignores
    the block, so every uncached block leads to the same class.
    """
    fresh = node.blocks()
    for block in list(range(fresh)) + [FRESH]:
        concrete = fresh if block == FRESH else block
        gp, hp = update(p, node.p, concrete)
        gq, hq = update(q, node.q, concrete)
        target, _ = canonicalize((gp, gq))
        yield block, (int(not hp), int(not hq)), target


def quotient_explore(p: CacheAlgorithm, q: CacheAlgorithm, ceiling: int = DEFAULT_CLASS_CEILING,
                     shuffle_seed: Optional[int] = None) -> QuotientGraph:
    """Breadth-first closure of the reachable congruence classes.

    ``shuffle_seed`` randomizes the expansion order, for checking that the
    reachable class set does not depend on it.
    """
    start, _ = canonicalize((initial_configuration(p), initial_configuration(q)))
    nodes, index, edges = [start], {start: 0}, [None]
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    frontier = [0]
    while frontier:
        if rng is not None:
            rng.shuffle(frontier)
        next_frontier = []
        for u in frontier:
            out = []
            for access, misses, target in successors(p, q, nodes[u]):
                v = index.get(target)
                if v is None:
                    if len(nodes) >= ceiling:
                        raise BudgetExceeded(
                            f"quotient of {p.descriptor} x {q.descriptor} exceeds {ceiling} classes "
                            f"({len(nodes)} found so far)")
                    v = index[target] = len(nodes)
                    nodes.append(target)
                    edges.append(None)
                    next_frontier.append(v)
                out.append(Edge(u, access, misses, v))
            edges[u] = out
        frontier = next_frontier
    return QuotientGraph(nodes, edges, index)


# -- boundedness ----------------------------------------------------------


@dataclass(frozen=True)
class Bounded:
    """Every reachable cycle is gain-neutral; ``max_gap`` is the exact sup of |P(t) - Q(t)|."""

    node_count: int
    max_gap: int

    linear = False


@dataclass(frozen=True)
class Unbounded:
    """``prefix`` leads from the initial class to the start of ``cycle``, a closed walk with nonzero gain."""

    node_count: int
    prefix: tuple
    cycle: tuple
    net_gain: int  # P-misses minus Q-misses per traversal of the cycle

    linear = True


def _bfs_path(graph: QuotientGraph, source: int, target: int) -> list:
    """Shortest edge path from ``source`` to ``target`` (empty if equal)."""
    if source == target:
        return []
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for e in graph.edges[u]:
            if e.target in parent:
                continue
            parent[e.target] = e
            if e.target == target:
                path = []
                while e is not None:
                    path.append(e)
                    e = parent[e.source]
                return path[::-1]
            queue.append(e.target)
    raise AssertionError(f"class {target} unreachable from {source}")


def detect_unbounded(p: CacheAlgorithm, q: CacheAlgorithm, graph: Optional[QuotientGraph] = None,
                     ceiling: int = DEFAULT_CLASS_CEILING):
    """Decide whether the miss difference of ``p`` and ``q`` is unbounded.

    Inside each strongly connected component a spanning tree assigns every
    class a potential (the gain along the tree path).  All cycles of the
    component are gain-neutral exactly when every edge respects the
    potentials; an edge that does not yields a closed walk with nonzero gain.
    """
    if graph is None:
        graph = quotient_explore(p, q, ceiling)
    digraph = nx.DiGraph()
    digraph.add_nodes_from(range(len(graph)))
    digraph.add_edges_from((e.source, e.target) for e in graph.all_edges())

    best = None
    potential = {}
    components = list(nx.strongly_connected_components(digraph))
    for comp in components:
        root = min(comp)
        # forward BFS tree from the root: potentials and tree paths
        parent, depth = {root: None}, {root: 0}
        potential[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for e in graph.edges[u]:
                if e.target in comp and e.target not in parent:
                    parent[e.target] = e
                    depth[e.target] = depth[u] + 1
                    potential[e.target] = potential[u] + e.gain
                    queue.append(e.target)
        inconsistent = [e for u in sorted(comp) for e in graph.edges[u]
                        if e.target in comp and potential[u] + e.gain != potential[e.target]]
        if not inconsistent:
            continue
        # reverse BFS tree: shortest way back to the root from every member
        incoming = {u: [] for u in comp}
        for u in comp:
            for e in graph.edges[u]:
                if e.target in comp:
                    incoming[e.target].append(e)
        toward, back_len, back_gain = {root: None}, {root: 0}, {root: 0}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for e in incoming[v]:
                if e.source not in toward:
                    toward[e.source] = e
                    back_len[e.source] = back_len[v] + 1
                    back_gain[e.source] = back_gain[v] + e.gain
                    queue.append(e.source)
        for e in inconsistent:
            u, v = e.source, e.target
            candidates = (
                (potential[u] + e.gain + back_gain[v], depth[u] + 1 + back_len[v], u, e),
                (potential[v] + back_gain[v], depth[v] + back_len[v], v, None),
            )
            for gain, length, head, via in candidates:
                if gain == 0:
                    continue
                key = (gain < 0, length, root)
                if best is None or key < best[0]:
                    best = (key, gain, head, via, v, parent, toward)

    if best is not None:
        (_, _, root), gain, head, via, v, parent, toward = best
        walk = []
        x = head
        while parent[x] is not None:
            walk.append(parent[x])
            x = parent[x].source
        walk.reverse()
        if via is not None:
            walk.append(via)
        x = v
        while toward[x] is not None:
            walk.append(toward[x])
            x = toward[x].target
        walk = tuple(walk)
        prefix = tuple(_bfs_path(graph, graph.initial, root))
        return Unbounded(len(graph), prefix, walk, gain)

    # All cycles neutral: propagate the reachable gap range over the condensation.
    condensed = nx.condensation(digraph, components)
    member = condensed.graph["mapping"]
    hi = {graph.initial: 0}
    lo = {graph.initial: 0}
    for c in nx.topological_sort(condensed):
        comp = condensed.nodes[c]["members"]
        entries = [u for u in comp if u in hi]
        if not entries:
            continue
        top = max(hi[u] - potential[u] for u in entries)
        bottom = min(lo[u] - potential[u] for u in entries)
        for u in comp:
            hi[u] = top + potential[u]
            lo[u] = bottom + potential[u]
        for u in comp:
            for e in graph.edges[u]:
                if member[e.target] == c:
                    continue
                v = e.target
                hi[v] = max(hi[v], hi[u] + e.gain) if v in hi else hi[u] + e.gain
                lo[v] = min(lo[v], lo[u] + e.gain) if v in lo else lo[u] + e.gain
    max_gap = max(max(abs(x) for x in hi.values()), max(abs(x) for x in lo.values()))
    return Bounded(len(graph), max_gap)


# -- pumping --------------------------------------------------------------


class PumpError(AssertionError):
    """A constructed pump family failed its own simulation check (a defect)."""


@dataclass(frozen=True)
class PumpFamily:
    """Traces ``base . cycle . pi(cycle) . pi(pi(cycle)) ...`` with linearly growing miss gap.

    ``sign`` is +1 when ``P`` takes the extra misses, -1 when ``Q`` does; the
    gap of a trace is ``sign * (P(t) - Q(t))``.
    """

    base: tuple
    cycle: tuple
    renaming: Renaming
    gain: int
    sign: int
    base_gap: int

    @property
    def rate(self) -> Fraction:
        return Fraction(self.gain, len(self.cycle) + 1)

    @property
    def threshold(self) -> int:
        """Every ``m`` above this satisfies gap(tau_m) > rate * |tau_m|."""
        # gap = base_gap + m*gain and |tau_m| = |base| + m*|cycle|; solve for m.
        bound = len(self.base) - Fraction((len(self.cycle) + 1) * self.base_gap, self.gain)
        return max(0, floor(bound))

    def gap_after(self, m: int) -> int:
        return self.base_gap + m * self.gain


def _concretize(p, q, pair, edges):
    """Turn a walk of abstract edges into blocks, starting from a concrete pair."""
    trace = []
    for e in edges:
        cls, pi = canonicalize(pair)
        if e.access == FRESH:
            cached = pair[0].blocks() | pair[1].blocks()
            block = next(b for b in range(len(cached) + 1) if b not in cached)
        else:
            block = pi.inverse()(e.access)
        gp, hp = update(p, pair[0], block)
        gq, hq = update(q, pair[1], block)
        pair = (gp, gq)
        if (int(not hp), int(not hq)) != e.misses:
            raise PumpError(f"edge {e} realized with wrong miss labels")
        trace.append(block)
    return tuple(trace), pair


def find_pump_family(p: CacheAlgorithm, q: CacheAlgorithm, verdict=None,
                     ceiling: int = DEFAULT_CLASS_CEILING) -> Optional[PumpFamily]:
    if verdict is None:
        verdict = detect_unbounded(p, q, ceiling=ceiling)
    if not verdict.linear:
        return None
    start = (initial_configuration(p), initial_configuration(q))
    base, pair_j = _concretize(p, q, start, verdict.prefix)
    cycle, pair_k = _concretize(p, q, pair_j, verdict.cycle)
    cls_j, sigma_j = canonicalize(pair_j)
    cls_k, sigma_k = canonicalize(pair_k)
    if cls_j != cls_k:
        raise PumpError("cycle does not close on its congruence class")
    pi = sigma_j.then(sigma_k.inverse())
    sign = 1 if verdict.net_gain > 0 else -1
    base_gap = sign * (count_misses(p, base) - count_misses(q, base))
    return PumpFamily(base, cycle, pi, abs(verdict.net_gain), sign, base_gap)


def pump(p: CacheAlgorithm, q: CacheAlgorithm, family: PumpFamily, m: int, check: bool = True) -> tuple:
    """Build ``tau_m``; with ``check`` the closed-form gap is confirmed by simulation."""
    tau = list(family.base)
    omega = family.cycle
    for _ in range(m):
        tau.extend(omega)
        omega = rename(family.renaming, omega)
    tau = tuple(tau)
    if check:
        gap = family.sign * (count_misses(p, tau) - count_misses(q, tau))
        if gap != family.gap_after(m):
            raise PumpError(f"m={m}: simulated gap {gap}, expected {family.gap_after(m)}")
        if m > family.threshold and not gap > family.rate * len(tau):
            raise PumpError(f"m={m}: gap {gap} not above rate {family.rate} * {len(tau)}")
    return tau
