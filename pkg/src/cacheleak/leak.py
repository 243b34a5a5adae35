"""Observation sets and exact leak ratios.

The leak ratio of ``P`` relative to ``Q`` at length ``l`` is the largest
factor by which ``P`` can produce more distinct miss counts than ``Q`` on a
set of length-``l`` traces.  It is read off the set of jointly achievable
miss-count pairs: group the pairs by ``Q``'s count and take the widest spread
of ``P``'s counts within one group, plus one.

Two independent engines produce the achievable pairs:

* ``brute`` simulates every trace over a fixed alphabet (vectorized, with
  each policy tabulated over its concrete configurations);
* ``quotient`` runs a layered search over congruence classes of
  configuration pairs, with an unbounded block supply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .congruence import DEFAULT_CLASS_CEILING, quotient_explore
from .core import BudgetExceeded, CacheAlgorithm, initial_configuration, update
from .sim import count_misses

DEFAULT_BUDGET = 4**13
# traces per vectorized chunk, roughly
_CHUNK = 1 << 20


def observations(alg: CacheAlgorithm, traces: Iterable) -> set:
    """Distinct miss counts of ``alg`` over equal-length traces."""
    traces = [tuple(t) for t in traces]
    if len({len(t) for t in traces}) > 1:
        raise ValueError("observation sets need traces of one length")
    return {count_misses(alg, t) for t in traces}


def is_dense(values: Iterable[int]) -> bool:
    values = set(values)
    return not values or max(values) - min(values) + 1 == len(values)


def ratio_from_pairs(pairs: Iterable[tuple]) -> int:
    """``1 + max over q of (max p - min p)`` for pairs ``(p, q)``."""
    spread = {}
    for p, q in pairs:
        lo, hi = spread.get(q, (p, p))
        spread[q] = (min(lo, p), max(hi, p))
    if not spread:
        return 1
    return 1 + max(hi - lo for lo, hi in spread.values())


def swap_pairs(pairs: Iterable[tuple]) -> set:
    return {(q, p) for p, q in pairs}


@dataclass
class LeakRatioTable:
    """Leak ratios ``r_{P,Q}(l)`` for ``l = 1..max_l``; ``r(0)`` is 1 by convention."""

    p: str
    q: str
    entries: dict = field(default_factory=dict)
    alphabet_size: Optional[int] = None  # None for the quotient engine (unbounded)
    engine: str = "quotient"

    def __getitem__(self, l: int) -> int:
        return 1 if l == 0 else self.entries[l]

    def values(self) -> list:
        return [self.entries[l] for l in sorted(self.entries)]


def default_alphabet(p: CacheAlgorithm, q: CacheAlgorithm) -> int:
    return p.capacity + q.capacity


# -- brute-force engine ---------------------------------------------------


def _tabulate(alg: CacheAlgorithm, alphabet: int):
    """Transition and miss tables over the configurations reachable with ``alphabet`` blocks."""
    start = initial_configuration(alg)
    ids = {start: 0}
    configs = [start]
    nxt, miss = [], []
    i = 0
    while i < len(configs):
        row_n, row_m = [], []
        for b in range(alphabet):
            g, hit = update(alg, configs[i], b)
            j = ids.get(g)
            if j is None:
                j = ids[g] = len(configs)
                configs.append(g)
            row_n.append(j)
            row_m.append(0 if hit else 1)
        nxt.append(row_n)
        miss.append(row_m)
        i += 1
    return np.array(nxt, dtype=np.int32), np.array(miss, dtype=np.int16)


def _check_budget(alphabet: int, max_l: int, budget: int):
    if alphabet < 1:
        raise ValueError("alphabet must hold at least one block")
    if alphabet**max_l > budget:
        raise BudgetExceeded(f"{alphabet}^{max_l} traces exceed the enumeration budget of {budget}")


def enumerate_layers(p: CacheAlgorithm, q: CacheAlgorithm, max_l: int, alphabet: int,
                     budget: int = DEFAULT_BUDGET):
    """Simulate every trace over ``alphabet`` blocks up to length ``max_l``.

    Yields ``(length, offset, p_misses, q_misses)`` chunks; element ``j`` of a
    chunk is the trace whose lexicographic index among the length-``length``
    traces is ``offset + j``.  Short lengths come as one chunk; longer ones
    are partitioned by a fixed-length prefix.
    """
    _check_budget(alphabet, max_l, budget)
    np_, mp = _tabulate(p, alphabet)
    nq, mq = _tabulate(q, alphabet)

    def expand(cp, cq, sp, sq):
        sp = np.repeat(sp, alphabet) + mp[cp].ravel()
        sq = np.repeat(sq, alphabet) + mq[cq].ravel()
        return np_[cp].ravel(), nq[cq].ravel(), sp, sq

    tail = max(1, int(math.log(_CHUNK, alphabet))) if alphabet > 1 else max_l
    split = max(0, max_l - tail)
    cp = cq = np.zeros(1, dtype=np.int32)
    sp = sq = np.zeros(1, dtype=np.int16)
    yield 0, 0, sp, sq
    for length in range(1, split + 1):
        cp, cq, sp, sq = expand(cp, cq, sp, sq)
        yield length, 0, sp, sq
    for i in range(len(cp)):
        xp, xq, yp, yq = cp[i:i + 1], cq[i:i + 1], sp[i:i + 1], sq[i:i + 1]
        for length in range(split + 1, max_l + 1):
            xp, xq, yp, yq = expand(xp, xq, yp, yq)
            yield length, i * alphabet ** (length - split), yp, yq


def decode_trace(index: int, length: int, alphabet: int) -> tuple:
    digits = []
    for _ in range(length):
        index, d = divmod(index, alphabet)
        digits.append(d)
    return tuple(reversed(digits))


def bruteforce_pairs(p: CacheAlgorithm, q: CacheAlgorithm, max_l: int, alphabet: Optional[int] = None,
                     budget: int = DEFAULT_BUDGET) -> list:
    """Achievable ``(p, q)`` miss pairs per length ``0..max_l`` by full enumeration."""
    alphabet = alphabet or default_alphabet(p, q)
    width = max_l + 1
    seen = [np.zeros(width * width, dtype=bool) for _ in range(width)]
    for length, _, sp, sq in enumerate_layers(p, q, max_l, alphabet, budget):
        codes = sp.astype(np.int64) * width + sq
        seen[length] |= np.bincount(codes, minlength=width * width).astype(bool)
    return [{divmod(int(c), width) for c in np.flatnonzero(s)} for s in seen]


# -- quotient engine ------------------------------------------------------


def quotient_pairs(p: CacheAlgorithm, q: CacheAlgorithm, max_l: int, graph=None,
                   ceiling: int = DEFAULT_CLASS_CEILING) -> list:
    """Achievable ``(p, q)`` miss pairs per length ``0..max_l`` over congruence classes."""
    if graph is None:
        graph = quotient_explore(p, q, ceiling)
    layer = {(graph.initial, 0, 0)}
    result = [{(0, 0)}]
    for _ in range(max_l):
        layer = {(e.target, a + e.misses[0], b + e.misses[1])
                 for node, a, b in layer for e in graph.edges[node]}
        result.append({(a, b) for _, a, b in layer})
    return result


# -- public API -----------------------------------------------------------


def achievable_pairs(p: CacheAlgorithm, q: CacheAlgorithm, l: int, alphabet_size: Optional[int] = None,
                     budget: int = DEFAULT_BUDGET) -> set:
    if alphabet_size is not None and alphabet_size < 2:
        raise ValueError("alphabet_size must be at least 2")
    return bruteforce_pairs(p, q, l, alphabet_size, budget)[l]


def leak_ratio_bruteforce(p: CacheAlgorithm, q: CacheAlgorithm, l: int, alphabet_size: Optional[int] = None,
                          budget: int = DEFAULT_BUDGET) -> int:
    return ratio_from_pairs(achievable_pairs(p, q, l, alphabet_size, budget))


def leak_ratio_quotient(p: CacheAlgorithm, q: CacheAlgorithm, max_l: int,
                        ceiling: int = DEFAULT_CLASS_CEILING) -> LeakRatioTable:
    pairs = quotient_pairs(p, q, max_l, ceiling=ceiling)
    return LeakRatioTable(p.descriptor, q.descriptor,
                          {l: ratio_from_pairs(pairs[l]) for l in range(1, max_l + 1)})


def ratio_tables(p: CacheAlgorithm, q: CacheAlgorithm, max_l: int, engine: str = "quotient",
                 alphabet_size: Optional[int] = None, budget: int = DEFAULT_BUDGET,
                 ceiling: int = DEFAULT_CLASS_CEILING) -> tuple:
    """Both ``r_{P,Q}`` and ``r_{Q,P}`` for ``l = 1..max_l`` from one pass of ``engine``."""
    if engine == "quotient":
        pairs = quotient_pairs(p, q, max_l, ceiling=ceiling)
        alphabet_size = None
    elif engine == "brute":
        alphabet_size = alphabet_size or default_alphabet(p, q)
        pairs = bruteforce_pairs(p, q, max_l, alphabet_size, budget)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    forward = LeakRatioTable(p.descriptor, q.descriptor, {}, alphabet_size, engine)
    backward = LeakRatioTable(q.descriptor, p.descriptor, {}, alphabet_size, engine)
    for l in range(1, max_l + 1):
        forward.entries[l] = ratio_from_pairs(pairs[l])
        backward.entries[l] = ratio_from_pairs(swap_pairs(pairs[l]))
    return forward, backward


def ratio_csv(forward: LeakRatioTable, backward: LeakRatioTable) -> str:
    lines = ["length,ratio_P_Q,ratio_Q_P"]
    lines += [f"{l},{forward[l]},{backward[l]}" for l in sorted(forward.entries)]
    return "\n".join(lines) + "\n"


def pairs_csv(pairs_by_length: list, lengths: Optional[Iterable[int]] = None) -> str:
    lengths = range(1, len(pairs_by_length)) if lengths is None else lengths
    lines = ["length,p,q"]
    for l in lengths:
        lines += [f"{l},{p},{q}" for p, q in sorted(pairs_by_length[l])]
    return "\n".join(lines) + "\n"


def miss_competitive_scan(p: CacheAlgorithm, q: CacheAlgorithm, r, c, max_l: int,
                          alphabet_size: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> Optional[tuple]:
    """Shortest (then lexicographically first) trace with ``P(t) > r*Q(t) + c``.

    Bounded search over traces up to ``max_l``; ``None`` means none found.
    """
    r, c = Fraction(r), Fraction(c)
    if r <= 0:
        raise ValueError("r must be positive")
    alphabet = alphabet_size or default_alphabet(p, q)
    # P > r*Q + c  <=>  P*den > r.num*(den/r.den)*Q + c.num*(den/c.den)
    den = r.denominator * c.denominator
    a, k = r.numerator * c.denominator, c.numerator * r.denominator
    found = None
    for length, offset, sp, sq in enumerate_layers(p, q, max_l, alphabet, budget):
        if found is not None and length > found[0]:
            continue
        hits = np.flatnonzero(sp.astype(np.int64) * den > a * sq.astype(np.int64) + k)
        if hits.size:
            candidate = (length, offset + int(hits[0]))
            if found is None or candidate < found:
                found = candidate
    if found is None:
        return None
    return decode_trace(found[1], found[0], alphabet)

