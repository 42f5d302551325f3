"""
Propositions Module

This module provides atomic propositions over states and channels, the
labeling functions that turn states into letters, and the over-approximated
epsilon-neighborhood letter sets used to build the lasso automaton.

A letter is an int bitmask over an ordered proposition list: bit i is set
when the i-th proposition holds.
"""

import math
import logging
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Dict, Any, FrozenSet, Iterable, List, Sequence, Tuple, Union

import numpy as np

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.errors import InputError, NumericalError, AmbiguityLimitError
from src.numerics import CMatrix, as_matrix, frobenius_norm, is_hermitian
from src.superop import DensityOperator, SuperOperator

logger = logging.getLogger(__name__)

Letter = int
LetterSet = FrozenSet[Letter]


def _endpoint(value: Any, what: str, infinite: float) -> float:
    """A finite number, or the infinite end for null."""
    if value is None:
        return infinite
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InputError(f"Interval end {what} must be a finite number or null, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class Interval:
    """An interval of the extended reals; infinite endpoints are always open."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise InputError("Interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise InputError(f"Interval lower end {self.lo} exceeds upper end {self.hi}")
        if math.isinf(self.lo):
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi):
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x, True, True)

    @classmethod
    def open(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, False, False)

    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x: float) -> bool:
        above = x > self.lo or (x == self.lo and self.lo_closed)
        below = x < self.hi or (x == self.hi and self.hi_closed)
        return above and below

    def intersection(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        if lo > hi:
            return Interval.open(lo, lo)
        return Interval(lo, hi, lo_closed, hi_closed)

    def intersects(self, other: "Interval") -> bool:
        return not self.intersection(other).is_empty()

    def issubset(self, other: "Interval") -> bool:
        if self.is_empty():
            return True
        lo_ok = other.lo < self.lo or (other.lo == self.lo and (other.lo_closed or not self.lo_closed))
        hi_ok = other.hi > self.hi or (other.hi == self.hi and (other.hi_closed or not self.hi_closed))
        return lo_ok and hi_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lo": None if math.isinf(self.lo) else self.lo,
            "hi": None if math.isinf(self.hi) else self.hi,
            "loClosed": self.lo_closed,
            "hiClosed": self.hi_closed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Interval":
        if not isinstance(data, dict):
            raise InputError(f"An interval must be an object with lo and hi, got {data!r}")
        lo = _endpoint(data.get("lo"), "lo", -math.inf)
        hi = _endpoint(data.get("hi"), "hi", math.inf)
        lo_closed = data.get("loClosed", True)
        hi_closed = data.get("hiClosed", True)
        if not isinstance(lo_closed, bool) or not isinstance(hi_closed, bool):
            raise InputError("loClosed and hiClosed must be booleans")
        return cls(lo, hi, lo_closed, hi_closed)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


@dataclass(frozen=True)
class Window:
    """A finite union of intervals."""

    intervals: Tuple[Interval, ...]

    @classmethod
    def of(cls, *intervals: Interval) -> "Window":
        return cls(tuple(intervals))

    def contains(self, x: float) -> bool:
        return any(i.contains(x) for i in self.intervals)

    def intersects(self, interval: Interval) -> bool:
        return any(i.intersects(interval) for i in self.intervals)

    def merged(self) -> List[Interval]:
        """Maximal disjoint intervals covering the same set."""
        parts = sorted((i for i in self.intervals if not i.is_empty()), key=lambda i: (i.lo, not i.lo_closed))
        merged: List[Interval] = []
        for cur in parts:
            if merged:
                last = merged[-1]
                touching = last.hi > cur.lo or (last.hi == cur.lo and (last.hi_closed or cur.lo_closed))
                if touching:
                    if cur.hi > last.hi:
                        hi, hi_closed = cur.hi, cur.hi_closed
                    elif cur.hi < last.hi:
                        hi, hi_closed = last.hi, last.hi_closed
                    else:
                        hi, hi_closed = last.hi, last.hi_closed or cur.hi_closed
                    merged[-1] = Interval(last.lo, hi, last.lo_closed, hi_closed)
                    continue
            merged.append(cur)
        return merged

    def contains_interval(self, interval: Interval) -> bool:
        if interval.is_empty():
            return True
        return any(interval.issubset(m) for m in self.merged())

    def to_list(self) -> List[Dict[str, Any]]:
        return [i.to_dict() for i in self.intervals]

    @classmethod
    def from_list(cls, items: Sequence[Dict[str, Any]]) -> "Window":
        if not isinstance(items, list):
            raise InputError(f"A proposition window must be a list of intervals, got {items!r}")
        if not items:
            raise InputError("A proposition window needs at least one interval")
        return cls(tuple(Interval.from_dict(item) for item in items))

    def __str__(self) -> str:
        return " U ".join(str(i) for i in self.intervals)


@dataclass(frozen=True, eq=False)
class ObservableProp:
    """The proposition tr(A rho) in window, for a Hermitian observable A."""

    name: str
    observable: CMatrix
    window: Window
    spectrum_bounds: Tuple[float, float] = field(init=False, repr=False, compare=False)
    observable_norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = as_matrix(self.observable, f"observable of {self.name}")
        if not is_hermitian(a, DEFAULT_TOLERANCES.herm_tol):
            raise InputError(f"Observable of proposition {self.name} is not Hermitian")
        eigenvalues = np.linalg.eigvalsh((a + a.conj().T) / 2)
        object.__setattr__(self, "observable", a)
        object.__setattr__(self, "spectrum_bounds", (float(eigenvalues[0]), float(eigenvalues[-1])))
        object.__setattr__(self, "observable_norm", frobenius_norm(a))

    @property
    def dim(self) -> int:
        return self.observable.shape[0]


@dataclass(frozen=True)
class TraceProp:
    """The proposition tr(M_E) in window, over channels."""

    name: str
    window: Window


AtomicProp = Union[ObservableProp, TraceProp]


def expectation(prop: ObservableProp, rho: DensityOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """tr(A rho), real part; the imaginary residue must stay below imag_tol."""
    if prop.dim != rho.dim:
        raise InputError(f"Observable of {prop.name} has dimension {prop.dim}, state has {rho.dim}")
    value = complex(np.trace(prop.observable @ rho.mat))
    if abs(value.imag) > tol.imag_tol:
        raise NumericalError(f"Expectation of {prop.name} has imaginary part {value.imag:.3e}")
    return value.real


def superop_trace(e: SuperOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    value = complex(np.trace(e.rep))
    if abs(value.imag) > tol.imag_tol * max(1.0, abs(value.real)):
        raise NumericalError(f"tr(M_E) has imaginary part {value.imag:.3e}")
    return value.real


def label_state(rho: DensityOperator, aps: Sequence[ObservableProp], tol: Tolerances = DEFAULT_TOLERANCES) -> Letter:
    """L_s(rho): bit i set iff the expectation of aps[i] lies in its window."""
    letter = 0
    for i, prop in enumerate(aps):
        if prop.window.contains(expectation(prop, rho, tol)):
            letter |= 1 << i
    return letter


def label_superop(e: SuperOperator, trace_props: Sequence[TraceProp], tol: Tolerances = DEFAULT_TOLERANCES) -> Letter:
    """L_d(E): bit i set iff tr(M_E) lies in the window of trace_props[i]."""
    value = superop_trace(e, tol)
    letter = 0
    for i, prop in enumerate(trace_props):
        if prop.window.contains(value):
            letter |= 1 << i
    return letter


def expectation_range(prop: ObservableProp, eta: DensityOperator, epsilon: float,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> Interval:
    """
    Open interval tr(A eta) +/- epsilon ||A||_F containing every tr(A rho')
    with ||rho' - eta||_F < epsilon; the closed point tr(A eta) when epsilon is 0.
    """
    if epsilon < 0:
        raise InputError(f"epsilon must be non-negative, got {epsilon}")
    center = expectation(prop, eta, tol)
    if epsilon == 0:
        return Interval.point(center)
    radius = epsilon * prop.observable_norm
    return Interval.open(center - radius, center + radius)


def _physical_range(prop: ObservableProp, eta: DensityOperator, epsilon: float, tol: Tolerances) -> Interval:
    """expectation_range clipped to the numerical range [lambda_min(A), lambda_max(A)]."""
    raw = expectation_range(prop, eta, epsilon, tol)
    clipped = raw.intersection(Interval(*prop.spectrum_bounds))
    return raw if clipped.is_empty() else clipped


def _flags(prop: ObservableProp, eta: DensityOperator, epsilon: float, tol: Tolerances) -> Tuple[bool, bool]:
    r = _physical_range(prop, eta, epsilon, tol)
    may_true = prop.window.intersects(r)
    may_false = not prop.window.contains_interval(r)
    return may_true, may_false


def ambiguous_propositions(eta: DensityOperator, aps: Sequence[ObservableProp], epsilon: float,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> List[str]:
    """Names of propositions that may be both true and false near eta."""
    return [p.name for p in aps if all(_flags(p, eta, epsilon, tol))]


def neighborhood_letters(eta: DensityOperator, aps: Sequence[ObservableProp], epsilon: float,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> LetterSet:
    """
    Over-approximation of the letters realized by states within epsilon of eta.

    Args:
        eta: Center state
        aps: Ordered observable propositions
        epsilon: Neighborhood radius
        tol: Tolerances supplying ambiguity_cap

    Returns:
        Frozen set of letters, always containing label_state(eta)

    Raises:
        AmbiguityLimitError: More than tol.ambiguity_cap ambiguous propositions
    """
    base = 0
    free: List[int] = []
    names: List[str] = []
    for i, prop in enumerate(aps):
        may_true, may_false = _flags(prop, eta, epsilon, tol)
        if may_true and may_false:
            free.append(i)
            names.append(prop.name)
        elif may_true:
            base |= 1 << i
        elif not may_false:
            # numerically empty range; fall back to the center label
            base |= label_state(eta, [prop], tol) << i

    if len(free) > tol.ambiguity_cap:
        logger.error(f"Ambiguous propositions {names} exceed cap {tol.ambiguity_cap}")
        raise AmbiguityLimitError(names, tol.ambiguity_cap)

    letters = set()
    for bits in cartesian((0, 1), repeat=len(free)):
        letter = base
        for i, bit in zip(free, bits):
            letter |= bit << i
        letters.add(letter)
    return frozenset(letters)


def letter_names(letter: Letter, names: Sequence[str]) -> Tuple[str, ...]:
    return tuple(n for i, n in enumerate(names) if letter >> i & 1)


def letter_from_names(held: Iterable[str], names: Sequence[str]) -> Letter:
    index = {n: i for i, n in enumerate(names)}
    letter = 0
    for n in held:
        if n not in index:
            raise InputError(f"Unknown proposition {n}")
        letter |= 1 << index[n]
    return letter


def format_letter(letter: Letter, names: Sequence[str]) -> str:
    return "{" + ", ".join(letter_names(letter, names)) + "}"
