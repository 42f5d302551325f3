"""
Automata Module

This module provides nondeterministic Buchi automata over int letters, the
lasso-shaped automaton of a neighborhood language, the synchronous product,
emptiness with witness extraction and export in the HOA text format.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx

from src.errors import InputError
from src.ltl import Formula, Not, to_nba
from src.nba import NBA, Transition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LassoSpec:
    """Fixed prefix letters followed by a cycle of letter sets."""

    prefix_letters: Tuple[int, ...]
    cycle_letter_sets: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        if not self.cycle_letter_sets:
            raise InputError("A lasso needs a nonempty cycle")
        if any(not s for s in self.cycle_letter_sets):
            raise InputError("A cycle letter set is empty; the neighborhood language would be empty")


@dataclass(frozen=True)
class LassoWitness:
    """An accepting run prefix . cycle^omega, with states and the letters read."""

    prefix_states: Tuple[int, ...]
    prefix_letters: Tuple[int, ...]
    cycle_states: Tuple[int, ...]
    cycle_letters: Tuple[int, ...]


@dataclass(frozen=True)
class EmptinessResult:
    empty: bool
    witness: Optional[LassoWitness] = None


def lasso_nba(spec: LassoSpec, ap_names: Sequence[str]) -> NBA:
    """
    Stem-and-loop automaton for prefix . (S_0 ... S_{c-1})^omega.

    State i < len(prefix) reads prefix[i]; the loop states read one letter of
    their set each and close back to the join state, which is accepting.
    """
    p = len(spec.prefix_letters)
    c = len(spec.cycle_letter_sets)
    transitions: List[List[Transition]] = []
    for i, letter in enumerate(spec.prefix_letters):
        transitions.append([(frozenset({letter}), i + 1)])
    for j, letters in enumerate(spec.cycle_letter_sets):
        transitions.append([(letters, p + (j + 1) % c)])
    return NBA.build(ap_names, p + c, transitions, {0}, {p})


def word_nba(prefix: Sequence[int], cycle: Sequence[int], ap_names: Sequence[str]) -> NBA:
    """Automaton accepting exactly the single word prefix . cycle^omega."""
    spec = LassoSpec(tuple(prefix), tuple(frozenset({letter}) for letter in cycle))
    return lasso_nba(spec, ap_names)


def product(a: NBA, b: NBA) -> NBA:
    """
    Intersection automaton over states (p, q, flag).

    The flag waits for an accepting state of a, then for one of b; states with
    flag 1 whose b-component accepts are the accepting states.
    """
    if a.ap_names != b.ap_names:
        raise InputError(f"Alphabet mismatch: {a.ap_names} vs {b.ap_names}")

    ids: Dict[Tuple[int, int, int], int] = {}
    queue = deque()
    for p in sorted(a.initial):
        for q in sorted(b.initial):
            ids[(p, q, 0)] = len(ids)
            queue.append((p, q, 0))

    transitions: List[List[Transition]] = [[] for _ in ids]
    accepting = set()
    while queue:
        p, q, flag = queue.popleft()
        src = ids[(p, q, flag)]
        if flag == 1 and q in b.accepting:
            accepting.add(src)
        if flag == 0 and p in a.accepting:
            nxt = 1
        elif flag == 1 and q in b.accepting:
            nxt = 0
        else:
            nxt = flag
        for letters_a, pa in a.transitions[p]:
            for letters_b, qb in b.transitions[q]:
                letters = letters_a & letters_b
                if not letters:
                    continue
                key = (pa, qb, nxt)
                if key not in ids:
                    ids[key] = len(ids)
                    transitions.append([])
                    queue.append(key)
                transitions[src].append((letters, ids[key]))
    initial = range(len(a.initial) * len(b.initial))
    result = NBA.build(a.ap_names, len(ids), transitions, initial, accepting)
    logger.debug(f"Product has {result.state_count} states and {result.edge_count()} edges")
    return result


def _graph(a: NBA) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(a.state_count))
    for q, outgoing in enumerate(a.transitions):
        for letters, t in outgoing:
            if not letters:
                continue
            if g.has_edge(q, t):
                g[q][t]["letters"] = g[q][t]["letters"] | letters
            else:
                g.add_edge(q, t, letters=letters)
    return g


def _edge_letters(g: nx.DiGraph, path: Sequence[int]) -> Tuple[int, ...]:
    return tuple(min(g[u][v]["letters"]) for u, v in zip(path, path[1:]))


def is_empty(a: NBA) -> EmptinessResult:
    """
    Decide L(a) = {} via strongly connected components.

    A word is accepted iff some accepting state is reachable from an initial
    state and lies on a cycle. When nonempty the result carries the shortest
    such lasso found.
    """
    g = _graph(a)
    reachable: Set[int] = set()
    for i in a.initial:
        reachable |= {i} | nx.descendants(g, i)
    sub = g.subgraph(reachable)

    on_cycle: Set[int] = set()
    for component in nx.strongly_connected_components(sub):
        if len(component) > 1:
            on_cycle |= component
        else:
            (v,) = component
            if sub.has_edge(v, v):
                on_cycle.add(v)

    candidates = sorted(on_cycle & a.accepting)
    if not candidates:
        return EmptinessResult(empty=True)

    best = None
    for s in candidates:
        stems = [nx.shortest_path(sub, i, s) for i in sorted(a.initial) if i in sub and nx.has_path(sub, i, s)]
        stem = min(stems, key=len)
        if sub.has_edge(s, s):
            loop = [s, s]
        else:
            loops = [[s] + nx.shortest_path(sub, t, s) for t in sub.successors(s) if nx.has_path(sub, t, s)]
            loop = min(loops, key=len)
        if best is None or len(stem) + len(loop) < len(best[0]) + len(best[1]):
            best = (stem, loop)

    stem, loop = best
    witness = LassoWitness(
        prefix_states=tuple(stem[:-1]),
        prefix_letters=_edge_letters(sub, stem),
        cycle_states=tuple(loop[:-1]),
        cycle_letters=_edge_letters(sub, loop),
    )
    return EmptinessResult(empty=False, witness=witness)


def accepts_lasso(a: NBA, prefix: Sequence[int], cycle: Sequence[int]) -> bool:
    """Whether a accepts the word prefix . cycle^omega."""
    return not is_empty(product(a, word_nba(prefix, cycle, a.ap_names))).empty


def from_below(a_u: NBA, phi: Formula, nba_phi: Optional[NBA] = None) -> EmptinessResult:
    """
    Emptiness of L(a_u) intersected with L(phi).

    A nonempty result carries a word of the neighborhood language satisfying
    phi. nba_phi is the translation of phi when the caller already has it.
    """
    if nba_phi is None:
        nba_phi = to_nba(phi, a_u.ap_names)
    return is_empty(product(a_u, nba_phi))


def from_above(a_u: NBA, phi: Formula, nba_neg: Optional[NBA] = None) -> EmptinessResult:
    """Emptiness of L(a_u) intersected with L(!phi); a witness violates phi."""
    if nba_neg is None:
        nba_neg = to_nba(Not(phi), a_u.ap_names)
    return is_empty(product(a_u, nba_neg))


def check_from_below(a_u: NBA, phi: Formula) -> bool:
    """Some word of the neighborhood language satisfies phi."""
    return not from_below(a_u, phi).empty


def check_from_above(a_u: NBA, phi: Formula) -> bool:
    """Every word of the neighborhood language satisfies phi."""
    return from_above(a_u, phi).empty


def _hoa_label(letters: FrozenSet[int], n_props: int) -> str:
    if len(letters) == 1 << n_props:
        return "t"
    cubes = []
    for letter in sorted(letters):
        cubes.append("&".join(str(i) if letter >> i & 1 else f"!{i}" for i in range(n_props)))
    return " | ".join(f"({c})" for c in cubes)


def to_hoa(a: NBA, name: str = "nba") -> str:
    """Render an automaton in the Hanoi Omega-Automata format."""
    aps = " ".join(f'"{n}"' for n in a.ap_names)
    lines = [
        "HOA: v1",
        f'name: "{name}"',
        f"States: {a.state_count}",
    ]
    lines += [f"Start: {i}" for i in sorted(a.initial)]
    lines += [
        f"AP: {len(a.ap_names)}{' ' + aps if aps else ''}",
        "acc-name: Buchi",
        "Acceptance: 1 Inf(0)",
        "properties: explicit-labels state-acc",
        "--BODY--",
    ]
    for q, outgoing in enumerate(a.transitions):
        lines.append(f"State: {q}{' {0}' if q in a.accepting else ''}")
        for letters, target in outgoing:
            lines.append(f"[{_hoa_label(letters, len(a.ap_names))}] {target}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
