import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cacheleak.core import (
    Configuration,
    PolicyDescriptor,
    PolicyError,
    format_content,
    format_trace,
    initial_configuration,
    make_policy,
    parse_block,
    parse_trace,
    update,
)
from cacheleak.sim import count_misses, run

from strategies import blocks, check_update_invariants, configurations, policies, traces


def test_lru2_fills_then_evicts_least_recent():
    lru = make_policy("lru:2")
    g = run(lru, parse_trace("AB"))
    assert set(g.content) == {0, 1}
    g, hit = update(lru, g, 0)
    assert hit
    g, hit = update(lru, g, 2)
    assert not hit
    assert g.blocks() == {0, 2}


def test_fifo2_ignores_hits():
    fifo = make_policy("fifo:2")
    g = run(fifo, parse_trace("ABA"))
    g, hit = update(fifo, g, 2)
    assert not hit
    assert g.blocks() == {1, 2}


def test_initial_configuration_is_empty():
    for d in ("lru:3", "fifo:1", "plru:4", "mru:2", "flru:2:7"):
        g = initial_configuration(make_policy(d))
        assert g.content == (None,) * PolicyDescriptor.parse(d).capacity
        assert g.blocks() == set()


@pytest.mark.parametrize("d", ["lru:2", "fifo:3", "plru:4", "mru:4", "flru:3:2"])
def test_cold_start_fills_left_to_right(d):
    alg = make_policy(d)
    g = initial_configuration(alg)
    for b in range(alg.capacity):
        g, hit = update(alg, g, b)
        assert not hit
    assert g.content == tuple(range(alg.capacity))


def test_plru4_victim_follows_tree_bits():
    plru = make_policy("plru:4")
    # ABCD fills lines 0..3; touching A then C points the tree at B's line.
    g = run(plru, parse_trace("ABCDAC"))
    g, _ = update(plru, g, 4)
    assert g.content == (0, 4, 2, 3)
    # now the pointer sits in the right half, away from C: D's line
    g, _ = update(plru, g, 5)
    assert g.content == (0, 4, 2, 5)


def test_mru_bits_reset_when_saturated():
    mru = make_policy("mru:2")
    g = run(mru, parse_trace("AB"))
    # B's access set both bits, so only B's bit survives and A is the victim.
    assert g.state == (0, 1)
    g, _ = update(mru, g, 2)
    assert g.content == (2, 1)


def test_flru_is_fifo_before_switch_and_lru_after():
    flru, fifo, lru = make_policy("flru:2:4"), make_policy("fifo:2"), make_policy("lru:2")
    # ABA C: the hit on A happens before the switch, so C evicts A as in FIFO
    assert run(flru, parse_trace("ABAC")).blocks() == run(fifo, parse_trace("ABAC")).blocks() == {1, 2}
    # after four accesses the hit on A refreshes it, so C evicts B and A still hits
    t = parse_trace("ABABACA")
    assert count_misses(flru, t) == count_misses(lru, t) == 3
    assert count_misses(fifo, t) == 4


@given(st.sampled_from(["flru:2:3", "flru:3:5", "flru:4:8", "flru:2:10"]), traces)
@settings(max_examples=200)
def test_flru_matches_fifo_up_to_switch(d, t):
    k = PolicyDescriptor.parse(d).switch_point
    n = PolicyDescriptor.parse(d).capacity
    t = t[:k]
    assert run(make_policy(d), t).content == run(make_policy(f"fifo:{n}"), t).content


@given(configurations(), blocks)
@settings(max_examples=300)
def test_update_invariants(drawn, b):
    alg, g = drawn
    check_update_invariants(alg, g, b)


@given(policies, traces)
@settings(max_examples=200)
def test_control_states_cover_reachable(alg, t):
    assert run(alg, t).state in alg.control_states


def test_descriptor_parsing():
    assert PolicyDescriptor.parse("lru:2") == PolicyDescriptor("lru", 2)
    assert PolicyDescriptor.parse("FLRU:2:7") == PolicyDescriptor("flru", 2, 7)
    assert str(PolicyDescriptor.parse("flru:2:7")) == "flru:2:7"
    assert make_policy(PolicyDescriptor("fifo", 3)).descriptor == "fifo:3"


@pytest.mark.parametrize("bad", ["lru", "lru:0", "plru:3", "flru:2", "flru:2:0", "fifo:2:3", "arc:4", "lru:x"])
def test_bad_descriptors(bad):
    with pytest.raises(PolicyError):
        make_policy(bad)


def test_trace_literals():
    assert parse_trace("ABAC") == (0, 1, 0, 2)
    assert parse_trace("b0,b1,b30") == (0, 1, 30)
    assert parse_trace("A,b27") == (0, 27)
    assert parse_trace("b5") == (5,)
    assert parse_trace("") == ()
    assert parse_block("Z") == 25
    assert format_trace((0, 1, 0, 2)) == "ABAC"
    assert format_trace((0, 26)) == "A,b26"
    assert format_content((0, None)) == "{A, _}"
    for bad in ("abc", "A-B", "A,,B", "b"):
        with pytest.raises(PolicyError):
            parse_trace(bad)


def test_configuration_is_hashable_value():
    a = Configuration((0, 1), (0, 1))
    assert a == Configuration((0, 1), (0, 1))
    assert len({a, Configuration((0, 1), (0, 1))}) == 1
