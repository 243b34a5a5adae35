"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line.

The asymptotic growth results (leak ratios of incomparable policies growing
linearly, bounded ones staying constant) cannot be checked as numbers at desk
scale.  Criteria 7 to 9 cover them as finite-range property checks.
"""
import itertools
import time
from collections import Counter

from hypothesis import given, settings

from cacheleak.cli import main
from cacheleak.congruence import Bounded, Unbounded, detect_unbounded, find_pump_family, pump
from cacheleak.core import POLICY_KINDS, make_policy, parse_trace
from cacheleak.leak import bruteforce_pairs, quotient_pairs, ratio_tables
from cacheleak.sim import count_misses
from cacheleak.witness import build_dense_set, max_gap_search, sandwich

from strategies import (
    blocks,
    check_canonical_completeness,
    check_canonical_idempotence,
    check_commutation,
    check_diff_steps,
    check_miss_preservation,
    check_update_invariants,
    config_pairs,
    configurations,
    policies,
    renamings,
    traces,
)

GRID = ["lru:2", "fifo:2", "plru:2", "flru:2:7"]
PROPERTY_CASES = 10_000
heavy = settings(max_examples=PROPERTY_CASES, deadline=None, database=None)


def figure_columns(capsys, p, q):
    assert main(["ratio", "--p", p, "--q", q, "--max-len", "17", "--engine", "quotient"]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert [int(r[0]) for r in rows] == list(range(1, 18))
    return [int(r[1]) for r in rows], [int(r[2]) for r in rows]


def test_criterion_01_figure_1a(criterion, capsys):
    with criterion(1, "figure 1A, lru:2 vs fifo:2, 34 coordinates", limit=10):
        solid, dashed = figure_columns(capsys, "lru:2", "fifo:2")
        assert solid == [1, 1, 1, 1, 2, 3, 4, 4, 5, 6, 7, 7, 8, 9, 10, 10, 11]
        assert dashed == [1, 1, 1, 1, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8]


def test_criterion_02_figure_1b(criterion, capsys):
    with criterion(2, "figure 1B, lru:2 vs flru:2:7, 34 coordinates", limit=10):
        solid, dashed = figure_columns(capsys, "lru:2", "flru:2:7")
        assert solid == [1, 1, 1, 1, 2, 3, 4, 4, 5, 6, 6, 6, 6, 6, 6, 6, 6]
        assert dashed == [1, 1, 1, 1, 2, 3, 3, 4, 4, 5, 5, 6, 6, 6, 6, 6, 6]


def test_criterion_03_engines_agree(criterion):
    with criterion(3, "brute and quotient engines agree, 16 pairs, l <= 12", limit=600):
        for a, b in itertools.product(GRID, repeat=2):
            p, q = make_policy(a), make_policy(b)
            brute = ratio_tables(p, q, 12, engine="brute", alphabet_size=4)
            quotient = ratio_tables(p, q, 12)
            assert [t.values() for t in brute] == [t.values() for t in quotient], (a, b)
            assert bruteforce_pairs(p, q, 12, 4) == quotient_pairs(p, q, 12), (a, b)


def test_criterion_04_appendix_totals(criterion):
    lru, fifo = make_policy("lru:2"), make_policy("fifo:2")
    golden = [
        ("ABACACBBB", (4, 5)), ("ABACDAAAA", (5, 5)), ("ABACBADDD", (6, 5)), ("ABACBACBB", (7, 5)),
        ("ABACBACBA", (8, 5)),
        ("ABACBAAAA", (5, 4)), ("ABACDAAAA", (5, 5)), ("ABACABCCC", (5, 6)), ("ABACACBCA", (5, 7)),
    ]
    with criterion(4, "appendix miss totals of the 9 traces", limit=1):
        for text, expected in golden:
            t = parse_trace(text)
            assert (count_misses(lru, t), count_misses(fifo, t)) == expected, text


def test_criterion_05_dense_set(criterion):
    lru, fifo = make_policy("lru:2"), make_policy("fifo:2")
    with criterion(5, "dense set: LRU image {4..8}, FIFO image {5}", limit=1):
        traces = build_dense_set(lru, fifo, parse_trace("ABACACBBB"), parse_trace("ABACBACBA"))
        assert {count_misses(lru, t) for t in traces} == {4, 5, 6, 7, 8}
        assert {count_misses(fifo, t) for t in traces} == {5}
        assert {len(t) for t in traces} == {9}


def test_criterion_06_gap_sandwich(criterion):
    with criterion(6, "single-trace gap g <= r - 1 <= 2g, l <= 10", limit=120):
        for a, b in itertools.product(GRID, repeat=2):
            p, q = make_policy(a), make_policy(b)
            forward, _ = ratio_tables(p, q, 10)
            for l in range(1, 11):
                _, gap = max_gap_search(p, q, l, 4)
                assert sandwich(gap, forward[l]), (a, b, l, gap, forward[l])


def test_criterion_07_ratio_symmetry_bound(criterion):
    with criterion(7, "r_PQ(l) <= 2 r_QP(l) - 1 both ways, l <= 17"):
        for a, b in itertools.product(GRID, repeat=2):
            forward, backward = ratio_tables(make_policy(a), make_policy(b), 17)
            for l in range(1, 18):
                assert forward[l] <= 2 * backward[l] - 1, (a, b, l)
                assert backward[l] <= 2 * forward[l] - 1, (a, b, l)


def test_criterion_08_classifier(criterion):
    expected = [("lru:2", "fifo:2", Unbounded), ("lru:2", "flru:2:7", Bounded), ("lru:2", "lru:3", Unbounded)]
    shipped = {"lru": "lru:4", "fifo": "fifo:4", "plru": "plru:4", "mru": "mru:4", "flru": "flru:4:9"}
    expected += [(shipped[k], shipped[k], Bounded) for k in POLICY_KINDS]
    with criterion(8, f"classifier verdicts on {len(expected)} pairs, < 30 s each"):
        for a, b, verdict in expected:
            start = time.perf_counter()
            assert isinstance(detect_unbounded(make_policy(a), make_policy(b)), verdict), (a, b)
            assert time.perf_counter() - start < 30, (a, b)


def test_criterion_09_pump(criterion):
    lru, fifo = make_policy("lru:2"), make_policy("fifo:2")
    with criterion(9, "pump family gap is base + m*gain, above rate past threshold", limit=10):
        family = find_pump_family(lru, fifo)
        for m in range(21):
            tau = pump(lru, fifo, family, m, check=False)
            gap = count_misses(lru, tau) - count_misses(fifo, tau)
            assert gap == family.base_gap + m * family.gain
            if m > family.threshold:
                assert abs(gap) > family.rate * len(tau)


def test_criterion_10_properties(criterion):
    ran = Counter()
    @heavy
    @given(policies, policies, traces)
    def diff_steps(p, q, t):
        ran["diff_steps"] += 1
        check_diff_steps(p, q, t)

    @heavy
    @given(configurations(), renamings(), traces)
    def commutation(drawn, pi, t):
        ran["commutation"] += 1
        check_commutation(*drawn, pi, t)

    @heavy
    @given(configurations(), renamings(), traces)
    def miss_preservation(drawn, pi, t):
        ran["miss_preservation"] += 1
        check_miss_preservation(*drawn, pi, t)

    @heavy
    @given(config_pairs())
    def idempotence(drawn):
        ran["idempotence"] += 1
        check_canonical_idempotence(drawn[2])

    @heavy
    @given(config_pairs(), renamings())
    def completeness(drawn, pi):
        ran["completeness"] += 1
        check_canonical_completeness(drawn[2], pi)

    @heavy
    @given(configurations(), blocks)
    def update_invariants(drawn, b):
        ran["update_invariants"] += 1
        check_update_invariants(*drawn, b)

    suites = [diff_steps, commutation, miss_preservation, idempotence, completeness, update_invariants]
    with criterion(10, f"{len(suites)} property suites, >= {PROPERTY_CASES} cases each"):
        for suite in suites:
            suite()
            assert ran[suite.__name__] >= PROPERTY_CASES, (suite.__name__, ran[suite.__name__])
