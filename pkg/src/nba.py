"""
NBA Module

This module provides the nondeterministic Buchi automaton type shared by the
formula translation and the automata operations. Letters are ints whose bit i
says whether proposition i holds.
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Sequence, Set, Tuple

from src.errors import InputError

Transition = Tuple[FrozenSet[int], int]


@dataclass(frozen=True)
class NBA:
    """Buchi automaton; transitions[q] lists (letter set, target) pairs."""

    ap_names: Tuple[str, ...]
    state_count: int
    transitions: Tuple[Tuple[Transition, ...], ...]
    initial: FrozenSet[int]
    accepting: FrozenSet[int]

    def __post_init__(self):
        if len(self.transitions) != self.state_count:
            raise InputError("NBA needs one transition list per state")
        alphabet_size = 1 << len(self.ap_names)
        for q, outgoing in enumerate(self.transitions):
            for letters, target in outgoing:
                if not 0 <= target < self.state_count:
                    raise InputError(f"Transition from {q} targets missing state {target}")
                if any(not 0 <= letter < alphabet_size for letter in letters):
                    raise InputError(f"Transition from {q} uses a letter outside the alphabet")
        if not (self.initial | self.accepting) <= set(range(self.state_count)):
            raise InputError("Initial and accepting states must exist")

    @classmethod
    def build(cls, ap_names: Sequence[str], state_count: int,
              transitions: Sequence[Iterable[Transition]],
              initial: Iterable[int], accepting: Iterable[int]) -> "NBA":
        return cls(
            ap_names=tuple(ap_names),
            state_count=state_count,
            transitions=tuple(tuple((frozenset(ls), t) for ls, t in out) for out in transitions),
            initial=frozenset(initial),
            accepting=frozenset(accepting),
        )

    def successors(self, q: int, letter: int) -> Set[int]:
        return {t for letters, t in self.transitions[q] if letter in letters}

    def edge_count(self) -> int:
        return sum(len(out) for out in self.transitions)
