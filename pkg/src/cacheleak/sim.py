"""Miss counting along traces."""
from __future__ import annotations

from typing import Iterator, Optional

from .core import CacheAlgorithm, Configuration, initial_configuration, update


def steps(alg: CacheAlgorithm, trace, start: Optional[Configuration] = None) -> Iterator[tuple]:
    """Yield ``(block, configuration_after, hit)`` for every access of ``trace``."""
    config = initial_configuration(alg) if start is None else start
    for block in trace:
        config, hit = update(alg, config, block)
        yield block, config, hit


def run(alg: CacheAlgorithm, trace, start: Optional[Configuration] = None) -> Configuration:
    """Configuration reached after ``trace``."""
    config = initial_configuration(alg) if start is None else start
    for block in trace:
        config, _ = update(alg, config, block)
    return config


def count_misses(alg: CacheAlgorithm, trace, start: Optional[Configuration] = None) -> int:
    return sum(not hit for _, _, hit in steps(alg, trace, start))


def miss_profile(alg: CacheAlgorithm, trace, start: Optional[Configuration] = None) -> list:
    """Cumulative misses per prefix length; entry 0 is the empty prefix."""
    profile = [0]
    for _, _, hit in steps(alg, trace, start):
        profile.append(profile[-1] + (not hit))
    return profile


def diff_profile(p: CacheAlgorithm, q: CacheAlgorithm, trace) -> list:
    """Entry ``i`` is ``q``-misses minus ``p``-misses on the length-``i`` prefix."""
    return [b - a for a, b in zip(miss_profile(p, trace), miss_profile(q, trace))]
