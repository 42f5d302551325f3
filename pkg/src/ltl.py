"""
LTL Module

This module provides LTL formulas: the syntax tree, a parser for the concrete
syntax, exact evaluation on ultimately periodic words and the tableau
translation to nondeterministic Buchi automata.

Concrete syntax, loosest binding first:
    a -> b      implication (right associative)
    a | b       disjunction
    a & b       conjunction
    a U b       until (right associative)
    !a  X a  X^3 a  F a  G a
                unary operators
    true  false  identifiers  ( ... )
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from src.errors import FormulaSyntaxError, UnknownPropositionError
from src.nba import NBA

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class Ap:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Next:
    arg: "Formula"

    def __str__(self) -> str:
        return f"X {_wrap(self.arg)}"


@dataclass(frozen=True)
class NextPow:
    count: int
    arg: "Formula"

    def __str__(self) -> str:
        return f"X^{self.count} {_wrap(self.arg)}"


@dataclass(frozen=True)
class Eventually:
    arg: "Formula"

    def __str__(self) -> str:
        return f"F {_wrap(self.arg)}"


@dataclass(frozen=True)
class Always:
    arg: "Formula"

    def __str__(self) -> str:
        return f"G {_wrap(self.arg)}"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} U {self.right})"


@dataclass(frozen=True)
class Release:
    """Dual of Until; produced by negation normal form only."""

    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} R {self.right})"


Formula = Union[Top, Bottom, Ap, Not, And, Or, Implies, Next, NextPow, Eventually, Always, Until, Release]

_UNARY = (Not, Next, NextPow, Eventually, Always)
_BINARY = (And, Or, Implies, Until, Release)


def _wrap(f: Formula) -> str:
    text = str(f)
    return text if isinstance(f, (Top, Bottom, Ap, *_UNARY)) or text.startswith("(") else f"({text})"


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, _UNARY):
        return (f.arg,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return ()


def size(f: Formula) -> int:
    """Node count."""
    return 1 + sum(size(c) for c in children(f))


def atoms(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Ap):
        return frozenset({f.name})
    found: Set[str] = set()
    for c in children(f):
        found |= atoms(c)
    return frozenset(found)


def subformulas(f: Formula) -> Set[Formula]:
    found = {f}
    for c in children(f):
        found |= subformulas(c)
    return found


GRAMMAR = r"""
?start: implication

?implication: disjunction
    | disjunction "->" implication      -> implies

?disjunction: conjunction
    | disjunction "|" conjunction       -> or_

?conjunction: until
    | conjunction "&" until             -> and_

?until: unary
    | unary _UNTIL until                -> until

?unary: atom
    | "!" unary                         -> not_
    | NEXT_POW unary                    -> next_pow
    | _NEXT unary                       -> next
    | _EVENTUALLY unary                 -> eventually
    | _ALWAYS unary                     -> always

?atom: _TRUE                            -> true
    | _FALSE                            -> false
    | NAME                              -> ap
    | "(" implication ")"

NEXT_POW.3: /X\^[0-9]+/
_NEXT.2: /X(?![A-Za-z0-9_^])/
_EVENTUALLY.2: /F(?![A-Za-z0-9_])/
_ALWAYS.2: /G(?![A-Za-z0-9_])/
_UNTIL.2: /U(?![A-Za-z0-9_])/
_TRUE.2: /true(?![A-Za-z0-9_])/
_FALSE.2: /false(?![A-Za-z0-9_])/
NAME: /[A-Za-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""


@v_args(inline=True)
class _ToFormula(Transformer):
    def implies(self, left, right):
        return Implies(left, right)

    def or_(self, left, right):
        return Or(left, right)

    def and_(self, left, right):
        return And(left, right)

    def until(self, left, right):
        return Until(left, right)

    def not_(self, arg):
        return Not(arg)

    def next_pow(self, token, arg):
        count = int(token[2:])
        if count < 1:
            raise ValueError("X^J needs J >= 1")
        return NextPow(count, arg)

    def next(self, arg):
        return Next(arg)

    def eventually(self, arg):
        return Eventually(arg)

    def always(self, arg):
        return Always(arg)

    def true(self):
        return Top()

    def false(self):
        return Bottom()

    def ap(self, token):
        return Ap(str(token))


_parser = Lark(GRAMMAR, parser="lalr")


def parse(text: str) -> Formula:
    """
    Parse a formula.

    Args:
        text: Formula in the concrete syntax described in the module docstring

    Returns:
        The formula tree

    Raises:
        FormulaSyntaxError: With the character offset of the problem
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        position = getattr(e, "pos_in_stream", None)
        if position is None or position < 0:
            position = len(text)
        logger.error(f"Cannot parse formula {text!r} at position {position}")
        raise FormulaSyntaxError(f"Cannot parse formula {text!r}", position)
    try:
        return _ToFormula().transform(tree)
    except VisitError as e:
        raise FormulaSyntaxError(f"Invalid formula {text!r}: {e.orig_exc}")


def nnf(f: Formula, negate: bool = False) -> Formula:
    """
    Negation normal form over true, false, literals, &, |, X, U and R.

    Args:
        f: Any formula
        negate: Produce the normal form of !f instead

    Returns:
        Formula whose negations sit directly on propositions
    """
    if isinstance(f, Top):
        return Bottom() if negate else Top()
    if isinstance(f, Bottom):
        return Top() if negate else Bottom()
    if isinstance(f, Ap):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        left, right = nnf(f.left, negate), nnf(f.right, negate)
        return Or(left, right) if negate else And(left, right)
    if isinstance(f, Or):
        left, right = nnf(f.left, negate), nnf(f.right, negate)
        return And(left, right) if negate else Or(left, right)
    if isinstance(f, Implies):
        return nnf(Or(Not(f.left), f.right), negate)
    if isinstance(f, Next):
        return Next(nnf(f.arg, negate))
    if isinstance(f, NextPow):
        result = nnf(f.arg, negate)
        for _ in range(f.count):
            result = Next(result)
        return result
    if isinstance(f, Eventually):
        return nnf(Until(Top(), f.arg), negate)
    if isinstance(f, Always):
        return nnf(Release(Bottom(), f.arg), negate)
    if isinstance(f, Until):
        left, right = nnf(f.left, negate), nnf(f.right, negate)
        return Release(left, right) if negate else Until(left, right)
    if isinstance(f, Release):
        left, right = nnf(f.left, negate), nnf(f.right, negate)
        return Until(left, right) if negate else Release(left, right)
    raise TypeError(f"Not a formula: {f!r}")


def _check_atoms(f: Formula, names: Sequence[str]) -> None:
    unknown = sorted(atoms(f) - set(names))
    if unknown:
        raise UnknownPropositionError(f"Formula uses undeclared propositions: {', '.join(unknown)}")


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word prefix . cycle^omega over int letters."""

    prefix: Tuple[int, ...]
    cycle: Tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("A lasso word needs a nonempty cycle")

    def letter_at(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.cycle[(n - len(self.prefix)) % len(self.cycle)]


def eval_lasso(phi: Formula, word: LassoWord, names: Sequence[str]) -> bool:
    """
    Decide word |= phi exactly.

    Positions are the prefix positions followed by one pass of the cycle; the
    successor of the last position is the cycle start.

    Args:
        phi: The formula
        word: The ultimately periodic word
        names: Ordered proposition names giving the letter bits

    Returns:
        Whether the word satisfies phi
    """
    _check_atoms(phi, names)
    index = {n: i for i, n in enumerate(names)}
    letters = list(word.prefix) + list(word.cycle)
    n = len(letters)
    succ = [i + 1 if i + 1 < n else len(word.prefix) for i in range(n)]
    memo: Dict[Formula, List[bool]] = {}

    def values(f: Formula) -> List[bool]:
        if f in memo:
            return memo[f]
        if isinstance(f, Top):
            out = [True] * n
        elif isinstance(f, Bottom):
            out = [False] * n
        elif isinstance(f, Ap):
            bit = index[f.name]
            out = [bool(letter >> bit & 1) for letter in letters]
        elif isinstance(f, Not):
            out = [not v for v in values(f.arg)]
        elif isinstance(f, And):
            out = [a and b for a, b in zip(values(f.left), values(f.right))]
        elif isinstance(f, Or):
            out = [a or b for a, b in zip(values(f.left), values(f.right))]
        elif isinstance(f, Next):
            inner = values(f.arg)
            out = [inner[succ[i]] for i in range(n)]
        elif isinstance(f, Until):
            left, right = values(f.left), values(f.right)
            # least fixpoint
            out = [False] * n
            for _ in range(n + 1):
                out = [right[i] or (left[i] and out[succ[i]]) for i in range(n)]
        elif isinstance(f, Release):
            left, right = values(f.left), values(f.right)
            # greatest fixpoint
            out = [True] * n
            for _ in range(n + 1):
                out = [right[i] and (left[i] or out[succ[i]]) for i in range(n)]
        else:
            out = values(nnf(f))
        memo[f] = out
        return out

    return values(nnf(phi))[0]


@dataclass
class _Node:
    ident: int
    incoming: Set[int]
    new: Set[Formula]
    old: Set[Formula] = field(default_factory=set)
    next: Set[Formula] = field(default_factory=set)


_INIT = 0


def _negated_literal(f: Formula) -> Optional[Formula]:
    if isinstance(f, Ap):
        return Not(f)
    if isinstance(f, Not):
        return f.arg
    return None


def _tableau(f: Formula) -> List[_Node]:
    """Tableau nodes for a formula in negation normal form."""
    counter = [_INIT]

    def fresh(incoming: Set[int], new: Set[Formula], old: Set[Formula], nxt: Set[Formula]) -> _Node:
        counter[0] += 1
        return _Node(counter[0], set(incoming), set(new), set(old), set(nxt))

    done: List[_Node] = []
    stack = [fresh({_INIT}, {f}, set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            twin = next((d for d in done if d.old == node.old and d.next == node.next), None)
            if twin is not None:
                twin.incoming |= node.incoming
                continue
            done.append(node)
            stack.append(fresh({node.ident}, node.next, set(), set()))
            continue

        eta = node.new.pop()
        if eta in node.old:
            stack.append(node)
            continue
        if isinstance(eta, (Top, Bottom, Ap, Not)):
            if isinstance(eta, Bottom) or _negated_literal(eta) in node.old:
                continue
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, And):
            node.new |= {eta.left, eta.right} - node.old
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, Next):
            node.old.add(eta)
            node.next.add(eta.arg)
            stack.append(node)
        elif isinstance(eta, (Or, Until, Release)):
            old = node.old | {eta}
            if isinstance(eta, Or):
                first = (node.new | ({eta.left} - old), node.next)
                second = (node.new | ({eta.right} - old), node.next)
            elif isinstance(eta, Until):
                first = (node.new | ({eta.left} - old), node.next | {eta})
                second = (node.new | ({eta.right} - old), node.next)
            else:
                first = (node.new | ({eta.right} - old), node.next | {eta})
                second = (node.new | ({eta.left, eta.right} - old), node.next)
            stack.append(fresh(node.incoming, second[0], old, second[1]))
            stack.append(fresh(node.incoming, first[0], old, first[1]))
        else:
            raise TypeError(f"Formula not in negation normal form: {eta}")
    return done


def _node_letters(node: _Node, index: Dict[str, int], n_props: int) -> FrozenSet[int]:
    pos = neg = 0
    for lit in node.old:
        if isinstance(lit, Ap):
            pos |= 1 << index[lit.name]
        elif isinstance(lit, Not) and isinstance(lit.arg, Ap):
            neg |= 1 << index[lit.arg.name]
    return frozenset(letter for letter in range(1 << n_props) if letter & pos == pos and letter & neg == 0)


def to_nba(phi: Formula, names: Sequence[str]) -> NBA:
    """
    Translate a formula to a Buchi automaton accepting exactly its models.

    Tableau expansion of the negation normal form gives a generalized Buchi
    automaton with one acceptance set per Until subformula; a counter over the
    acceptance sets degeneralizes it.

    Args:
        phi: The formula
        names: Ordered proposition names (the alphabet)

    Returns:
        NBA over int letters
    """
    _check_atoms(phi, names)
    names = tuple(names)
    index = {n: i for i, n in enumerate(names)}
    f = nnf(phi)
    nodes = _tableau(f)
    untils = sorted((s for s in subformulas(f) if isinstance(s, Until)), key=str)

    # gba state 0 is the pseudo-initial state, node i is gba state i + 1
    position = {node.ident: k + 1 for k, node in enumerate(nodes)}
    position[_INIT] = 0
    gba_count = len(nodes) + 1
    edges: List[List[Tuple[FrozenSet[int], int]]] = [[] for _ in range(gba_count)]
    for node in nodes:
        letters = _node_letters(node, index, len(names))
        if not letters:
            continue
        for src in node.incoming:
            edges[position[src]].append((letters, position[node.ident]))

    acc_sets = []
    for u in untils:
        members = {0}
        members |= {position[n.ident] for n in nodes if u not in n.old or u.right in n.old}
        acc_sets.append(members)

    k = len(acc_sets)
    if k == 0:
        nba = NBA.build(names, gba_count, edges, {0}, set(range(gba_count)))
        logger.debug(f"Formula {phi} gave an NBA with {nba.state_count} states")
        return nba

    ids: Dict[Tuple[int, int], int] = {(0, 0): 0}
    queue = deque([(0, 0)])
    out_edges: List[List[Tuple[FrozenSet[int], int]]] = [[]]
    accepting = set()
    while queue:
        q, i = queue.popleft()
        src = ids[(q, i)]
        if i == 0 and q in acc_sets[0]:
            accepting.add(src)
        nxt_i = (i + 1) % k if q in acc_sets[i] else i
        for letters, target in edges[q]:
            key = (target, nxt_i)
            if key not in ids:
                ids[key] = len(ids)
                out_edges.append([])
                queue.append(key)
            out_edges[src].append((letters, ids[key]))
    nba = NBA.build(names, len(ids), out_edges, {0}, accepting)
    logger.debug(f"Formula {phi} gave an NBA with {nba.state_count} states")
    return nba
