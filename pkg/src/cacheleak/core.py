"""Abstract cache machines, configurations and the concrete replacement policies.

A cache algorithm is a finite-control machine over ``capacity`` lines.  It
decides the next control state on a hit (``transition``) and, on a miss, the
next control state together with the line to overwrite (``evict``).  Eviction
never looks at the accessed block, so every shipped policy is fully
associative.

Blocks are plain non-negative integers.  They render as ``A``..``Z`` for
0..25 and as ``b<n>`` above that.  An empty line holds ``None``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, NamedTuple, Optional, Sequence

BlockId = int
Trace = tuple  # tuple[BlockId, ...]
State = Hashable

EMPTY = None

POLICY_KINDS = ("lru", "fifo", "plru", "mru", "flru")


class PolicyError(ValueError):
    """Malformed policy descriptor, block literal or trace literal."""


class BudgetExceeded(RuntimeError):
    """An enumeration or exploration would exceed its configured ceiling."""


class Configuration(NamedTuple):
    state: State
    content: tuple  # tuple[Optional[BlockId], ...], one entry per line

    def blocks(self) -> set:
        return {b for b in self.content if b is not None}


@dataclass(frozen=True)
class PolicyDescriptor:
    kind: str
    capacity: int
    switch_point: Optional[int] = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise PolicyError(f"unknown policy kind {self.kind!r}; expected one of {', '.join(POLICY_KINDS)}")
        if self.capacity < 1:
            raise PolicyError(f"capacity must be positive, got {self.capacity}")
        if self.kind == "plru" and self.capacity & (self.capacity - 1):
            raise PolicyError(f"plru needs a power-of-two capacity, got {self.capacity}")
        if self.kind == "flru":
            if self.switch_point is None or self.switch_point < 1:
                raise PolicyError("flru needs a switch point >= 1")
        elif self.switch_point is not None:
            raise PolicyError(f"{self.kind} takes no switch point")

    @classmethod
    def parse(cls, text: str) -> "PolicyDescriptor":
        """Parse ``lru:<n>``, ``fifo:<n>``, ``plru:<n>``, ``mru:<n>`` or ``flru:<n>:<k>``."""
        parts = text.strip().lower().split(":")
        try:
            numbers = [int(p) for p in parts[1:]]
        except ValueError:
            raise PolicyError(f"bad policy descriptor {text!r}") from None
        if parts[0] == "flru" and len(numbers) == 2:
            return cls("flru", numbers[0], numbers[1])
        if parts[0] != "flru" and len(numbers) == 1:
            return cls(parts[0], numbers[0])
        raise PolicyError(f"bad policy descriptor {text!r}")

    def __str__(self):
        if self.kind == "flru":
            return f"flru:{self.capacity}:{self.switch_point}"
        return f"{self.kind}:{self.capacity}"


@dataclass(frozen=True, eq=False)
class CacheAlgorithm:
    """A deterministic cache algorithm with finitely many control states.

    ``transition(state, line)`` gives the control state after a hit on
    ``line``; ``evict(state)`` gives ``(next_state, line)`` for a miss.
    """

    initial_state: State
    capacity: int
    transition: Callable[[State, int], State]
    evict: Callable[[State], tuple]
    descriptor: str = field(default="custom")

    @cached_property
    def control_states(self) -> frozenset:
        # Closure from the initial state; every policy here is finite.
        seen = {self.initial_state}
        stack = [self.initial_state]
        while stack:
            s = stack.pop()
            successors = [self.transition(s, j) for j in range(self.capacity)]
            successors.append(self.evict(s)[0])
            for nxt in successors:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)

    def __repr__(self):
        return f"CacheAlgorithm({self.descriptor})"


def initial_configuration(alg: CacheAlgorithm) -> Configuration:
    return Configuration(alg.initial_state, (EMPTY,) * alg.capacity)


def update(alg: CacheAlgorithm, config: Configuration, block: BlockId) -> tuple:
    """Apply one access; returns ``(new_configuration, hit)``."""
    content = config.content
    try:
        line = content.index(block)
    except ValueError:
        state, line = alg.evict(config.state)
        content = content[:line] + (block,) + content[line + 1:]
        return Configuration(state, content), False
    return Configuration(alg.transition(config.state, line), content), True


# -- policies -------------------------------------------------------------
#
# Every policy fills empty lines left to right before it evicts anything.
# LRU, FIFO, MRU and the FIFO/LRU hybrid do so naturally from their initial
# state; tree-PLRU tracks the fill level explicitly.


def _lru(n: int) -> CacheAlgorithm:
    # state: line indices ordered from least to most recently used
    def transition(order, line):
        return tuple(x for x in order if x != line) + (line,)

    def evict(order):
        return order[1:] + order[:1], order[0]

    return CacheAlgorithm(tuple(range(n)), n, transition, evict, f"lru:{n}")


def _fifo(n: int) -> CacheAlgorithm:
    # state: index of the next line to replace
    def transition(pointer, line):
        return pointer

    def evict(pointer):
        return (pointer + 1) % n, pointer

    return CacheAlgorithm(0, n, transition, evict, f"fifo:{n}")


def _plru(n: int) -> CacheAlgorithm:
    # state: (tree bits in heap order, number of filled lines)
    # bit 0 sends the victim search left, bit 1 right.
    levels = n.bit_length() - 1

    def touch(bits, line):
        bits = list(bits)
        node = 1
        for depth in range(levels - 1, -1, -1):
            went_right = (line >> depth) & 1
            bits[node - 1] = 0 if went_right else 1
            node = 2 * node + went_right
        return tuple(bits)

    def victim(bits):
        node = 1
        for _ in range(levels):
            node = 2 * node + bits[node - 1]
        return node - n

    def transition(state, line):
        bits, filled = state
        return touch(bits, line), filled

    def evict(state):
        bits, filled = state
        if filled < n:
            line, filled = filled, filled + 1
        else:
            line = victim(bits)
        return (touch(bits, line), filled), line

    return CacheAlgorithm(((0,) * (n - 1), 0), n, transition, evict, f"plru:{n}")


def _mru(n: int) -> CacheAlgorithm:
    # state: one MRU bit per line; when all bits would be set, the others reset.
    def touch(bits, line):
        bits = bits[:line] + (1,) + bits[line + 1:]
        if all(bits):
            bits = tuple(int(i == line) for i in range(n))
        return bits

    def transition(bits, line):
        return touch(bits, line)

    def evict(bits):
        line = bits.index(0) if 0 in bits else 0
        return touch(bits, line), line

    return CacheAlgorithm((0,) * n, n, transition, evict, f"mru:{n}")


def _flru(n: int, k: int) -> CacheAlgorithm:
    # state: (queue order oldest-first, accesses so far saturating at k).
    # Below k the order is a FIFO queue; from then on it is read as recency.
    def transition(state, line):
        order, count = state
        if count >= k:
            order = tuple(x for x in order if x != line) + (line,)
        return order, min(count + 1, k)

    def evict(state):
        order, count = state
        return (order[1:] + order[:1], min(count + 1, k)), order[0]

    return CacheAlgorithm((tuple(range(n)), 0), n, transition, evict, f"flru:{n}:{k}")


def make_policy(descriptor) -> CacheAlgorithm:
    """Build a policy from a :class:`PolicyDescriptor` or its string form."""
    if isinstance(descriptor, str):
        descriptor = PolicyDescriptor.parse(descriptor)
    n = descriptor.capacity
    if descriptor.kind == "lru":
        return _lru(n)
    if descriptor.kind == "fifo":
        return _fifo(n)
    if descriptor.kind == "plru":
        return _plru(n)
    if descriptor.kind == "mru":
        return _mru(n)
    return _flru(n, descriptor.switch_point)


# -- block and trace literals ---------------------------------------------

_TOKEN = re.compile(r"^(?:([A-Z])|b(\d+))$")


def parse_block(token: str) -> BlockId:
    m = _TOKEN.match(token.strip())
    if not m:
        raise PolicyError(f"bad block literal {token!r}")
    if m.group(1):
        return ord(m.group(1)) - ord("A")
    return int(m.group(2))


def format_block(block: Optional[BlockId]) -> str:
    if block is None:
        return "_"
    return chr(ord("A") + block) if block <= 25 else f"b{block}"


def parse_trace(text: str) -> Trace:
    """``ABAC`` or ``b0,b1,b0`` (letters may be mixed into the comma form)."""
    text = text.strip()
    if not text:
        return ()
    if "," in text:
        return tuple(parse_block(tok) for tok in text.split(","))
    if not (text.isascii() and text.isalpha() and text.isupper()):
        if _TOKEN.match(text):
            return (parse_block(text),)
        raise PolicyError(f"bad trace literal {text!r}")
    return tuple(ord(ch) - ord("A") for ch in text)


def format_trace(trace: Iterable[BlockId]) -> str:
    trace = tuple(trace)
    if all(b <= 25 for b in trace):
        return "".join(format_block(b) for b in trace)
    return ",".join(format_block(b) for b in trace)


def format_content(content: Sequence[Optional[BlockId]]) -> str:
    return "{" + ", ".join(format_block(b) for b in content) + "}"
