"""Constructive witnesses: equalizing traces, interpolated traces and dense sets.

Every trace built here is re-simulated before it is returned; a failed check
raises :class:`WitnessError`, which signals a defect rather than bad input.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import CacheAlgorithm
from .leak import DEFAULT_BUDGET, decode_trace, default_alphabet, enumerate_layers
from .sim import count_misses, miss_profile, run


class WitnessError(AssertionError):
    pass


def _fresh_blocks(exclude, count):
    out, b = [], 0
    while len(out) < count:
        if b not in exclude:
            out.append(b)
        b += 1
    return out


def build_equalizing_trace(p: CacheAlgorithm, q: CacheAlgorithm, t) -> tuple:
    """A trace of the same length on which both algorithms miss exactly ``Q(t)`` times.

    ``Q(t)`` accesses to distinct blocks not in ``t`` (each misses on both
    sides), then repeats of the last one (hits on both sides).
    """
    t = tuple(t)
    if not t:
        raise ValueError("trace must be non-empty")
    target = count_misses(q, t)
    misses = _fresh_blocks(set(t), target)
    result = tuple(misses + [misses[-1]] * (len(t) - target))
    got = (count_misses(p, result), count_misses(q, result))
    if got != (target, target):
        raise WitnessError(f"equalizing trace gave {got}, wanted ({target}, {target})")
    return result


def interpolate_trace(p: CacheAlgorithm, q: CacheAlgorithm, t1, t2, k: int) -> tuple:
    """A trace with ``P``-misses ``k`` and the common ``Q``-miss count of ``t1`` and ``t2``.

    Requires ``Q(t1) == Q(t2)``, equal lengths and ``P(t1) <= k <= P(t2)``.
    The shortest prefix whose running miss difference already equals the
    final one wanted is kept; accesses missing on both sides then bring the
    ``Q`` count up to target, and repeats of the last block fill the rest.
    """
    t1, t2 = tuple(t1), tuple(t2)
    if len(t1) != len(t2):
        raise ValueError("endpoint traces differ in length")
    qm = count_misses(q, t1)
    if count_misses(q, t2) != qm:
        raise ValueError("endpoint traces are not Q-equivalent")
    p1, p2 = count_misses(p, t1), count_misses(p, t2)
    if not p1 <= k <= p2:
        raise ValueError(f"k={k} outside [{p1}, {p2}]")
    if k == p1:
        return t1
    if k == p2:
        return t2

    # k <= Q: from t1, find Q - P == qm - k; k > Q: from t2, find P - Q == k - qm.
    if k <= qm:
        base, sign, wanted = t1, 1, qm - k
    else:
        base, sign, wanted = t2, -1, k - qm
    prof_p, prof_q = miss_profile(p, base), miss_profile(q, base)
    u = next((i for i in range(len(base) + 1) if sign * (prof_q[i] - prof_p[i]) == wanted), None)
    if u is None:
        raise WitnessError(f"no prefix of {base} reaches difference {wanted}")
    prefix = list(base[:u])
    need = qm - prof_q[u]
    cached = run(p, prefix).blocks() | run(q, prefix).blocks()
    fresh = _fresh_blocks(set(t1) | set(t2) | cached, need)
    trace = prefix + fresh
    if len(trace) > len(base) or not trace:
        raise WitnessError(f"extension overflows: prefix {u}, {need} fresh accesses, length {len(base)}")
    trace += [trace[-1]] * (len(base) - len(trace))
    trace = tuple(trace)

    got = (count_misses(p, trace), count_misses(q, trace))
    if got != (k, qm):
        raise WitnessError(f"interpolated trace {trace} gave {got}, wanted ({k}, {qm})")
    return trace


def build_dense_set(p: CacheAlgorithm, q: CacheAlgorithm, t1, t2) -> frozenset:
    """Q-equivalent traces covering every ``P``-miss count between the endpoints."""
    t1, t2 = tuple(t1), tuple(t2)
    p1, p2 = count_misses(p, t1), count_misses(p, t2)
    if p1 > p2:
        t1, t2, p1, p2 = t2, t1, p2, p1
    traces = {t1, t2}
    traces.update(interpolate_trace(p, q, t1, t2, k) for k in range(p1, p2 + 1))
    return frozenset(traces)


def max_gap_search(p: CacheAlgorithm, q: CacheAlgorithm, l: int, alphabet_size: Optional[int] = None,
                   budget: int = DEFAULT_BUDGET) -> tuple:
    """A trace of length ``l`` maximizing ``|P(t) - Q(t)|`` (first in lexicographic order), and its gap."""
    alphabet = alphabet_size or default_alphabet(p, q)
    best = (-1, 0)
    for length, offset, sp, sq in enumerate_layers(p, q, l, alphabet, budget):
        if length != l:
            continue
        gaps = np.abs(sp.astype(np.int64) - sq)
        j = int(np.argmax(gaps))
        if gaps[j] > best[0]:
            best = (int(gaps[j]), offset + j)
    trace = decode_trace(best[1], l, alphabet)
    gap = abs(count_misses(p, trace) - count_misses(q, trace))
    if gap != best[0]:
        raise WitnessError(f"enumeration reported gap {best[0]} for {trace}, simulation gives {gap}")
    return trace, gap


def sandwich(gap: int, ratio: int) -> bool:
    """Single-trace gap against the leak ratio: ``gap <= r - 1 <= 2 * gap``."""
    return gap <= ratio - 1 <= 2 * gap


def dense_set_report(p: CacheAlgorithm, q: CacheAlgorithm, traces) -> list:
    """``(trace, P misses, Q misses)`` rows sorted by ``P`` misses."""
    rows = [(t, count_misses(p, t), count_misses(q, t)) for t in traces]
    return sorted(rows, key=lambda r: (r[1], r[0]))

