"""
Checker Module

This module runs the approximate model-checking pipeline: spectral analysis,
horizon, prefix labels, neighborhood letter sets of the limit cycle, the lasso
automaton and the two emptiness checks that decide the verdict. It covers
state semantics, super-operator semantics through the Choi lift, and the
epsilon-halving refinement loop.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from time import perf_counter
from typing import Dict, Any, List, Optional, Sequence, Tuple

import numpy as np

from src.automata import NBA, LassoSpec, LassoWitness, from_above, from_below, is_empty, lasso_nba
from src.config import CheckConfig
from src.errors import InputError, NotPeriodicallyStableError
from src.ltl import Formula, Not, to_nba
from src.numerics import omega
from src.props import (
    AtomicProp, ObservableProp, TraceProp, label_state, neighborhood_letters, ambiguous_propositions,
)
from src.spectral import SpectralAnalysis, analyze, limit_states
from src.superop import QMC, apply, choi_lift

logger = logging.getLogger(__name__)


class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


def _witness_to_dict(w: Optional[LassoWitness]) -> Optional[Dict[str, Any]]:
    if w is None:
        return None
    return {
        "prefixStates": list(w.prefix_states),
        "prefixLetters": list(w.prefix_letters),
        "cycleStates": list(w.cycle_states),
        "cycleLetters": list(w.cycle_letters),
    }


def _witness_from_dict(data: Optional[Dict[str, Any]]) -> Optional[LassoWitness]:
    if data is None:
        return None
    return LassoWitness(
        prefix_states=tuple(data["prefixStates"]),
        prefix_letters=tuple(data["prefixLetters"]),
        cycle_states=tuple(data["cycleStates"]),
        cycle_letters=tuple(data["cycleLetters"]),
    )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one pipeline run at a fixed epsilon."""

    verdict: Verdict
    formula: str
    epsilon: float
    period: int
    horizon: int
    prop_names: Tuple[str, ...]
    prefix_letters: Tuple[int, ...]
    cycle_letter_sets: Tuple[Tuple[int, ...], ...]
    ambiguous: Tuple[str, ...] = ()
    satisfying_witness: Optional[LassoWitness] = None
    violating_witness: Optional[LassoWitness] = None
    timings: Tuple[Tuple[str, float], ...] = field(default=(), compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "formula": self.formula,
            "epsilon": self.epsilon,
            "period": self.period,
            "horizon": self.horizon,
            "propositions": list(self.prop_names),
            "prefixLetters": list(self.prefix_letters),
            "cycleLetterSets": [list(s) for s in self.cycle_letter_sets],
            "ambiguous": list(self.ambiguous),
            "satisfyingWitness": _witness_to_dict(self.satisfying_witness),
            "violatingWitness": _witness_to_dict(self.violating_witness),
            "timings": {stage: seconds for stage, seconds in self.timings},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckReport":
        return cls(
            verdict=Verdict(data["verdict"]),
            formula=data["formula"],
            epsilon=float(data["epsilon"]),
            period=int(data["period"]),
            horizon=int(data["horizon"]),
            prop_names=tuple(data["propositions"]),
            prefix_letters=tuple(data["prefixLetters"]),
            cycle_letter_sets=tuple(tuple(s) for s in data["cycleLetterSets"]),
            ambiguous=tuple(data.get("ambiguous", ())),
            satisfying_witness=_witness_from_dict(data.get("satisfyingWitness")),
            violating_witness=_witness_from_dict(data.get("violatingWitness")),
            timings=tuple((stage, float(s)) for stage, s in data.get("timings", {}).items()),
        )


class _Stopwatch:
    def __init__(self):
        self.laps: List[Tuple[str, float]] = []
        self._start = perf_counter()

    def lap(self, stage: str) -> None:
        now = perf_counter()
        self.laps.append((stage, now - self._start))
        self._start = now


def check_state(g: QMC, aps: Sequence[ObservableProp], phi: Formula, epsilon: float,
                cfg: CheckConfig = CheckConfig(), analysis: Optional[SpectralAnalysis] = None,
                automata_sink: Optional[Dict[str, NBA]] = None) -> Tuple[Verdict, CheckReport]:
    """
    Decide whether the trajectory of g epsilon-approximately satisfies phi.

    Args:
        g: Chain with an initial state
        aps: Ordered observable propositions; their order fixes the letter bits
        phi: The formula
        epsilon: Neighborhood radius
        cfg: Settings and tolerances
        analysis: Spectral analysis of g, computed here when absent
        automata_sink: When given, receives the neighborhood, formula and negation automata

    Returns:
        Tuple of the verdict and the full report

    Raises:
        NotPeriodicallyStableError: A contributing peripheral eigenvalue has no rational angle
        AmbiguityLimitError: Too many ambiguous propositions at this epsilon
    """
    if g.initial is None:
        raise InputError("State semantics needs an initial state")
    tol = cfg.tolerances
    names = tuple(p.name for p in aps)
    watch = _Stopwatch()

    nba_phi = to_nba(phi, names)
    if analysis is None:
        analysis = analyze(g, cfg.qmax, tol)
    watch.lap("spectral")

    stability = analysis.stability
    if not stability.stable:
        logger.error(f"Chain is not periodically stable: {stability.offending}")
        raise NotPeriodicallyStableError(list(stability.offending))
    theta = stability.period
    k = analysis.horizon(epsilon, tol)
    logger.info(f"epsilon={epsilon:g}: period {theta}, horizon {k}")
    watch.lap("horizon")

    etas = limit_states(g, theta, analysis, tol)
    watch.lap("limit_states")

    prefix = []
    rho = g.initial
    for _ in range(k):
        prefix.append(label_state(rho, aps, tol))
        rho = apply(g.superop, rho, tol)
    watch.lap("prefix")

    # k is a multiple of theta, so the cycle starts at eta_0
    zetas = [etas[(k + i) % theta] for i in range(theta)]
    cycle_sets = [neighborhood_letters(z, aps, epsilon, tol) for z in zetas]
    ambiguous = sorted({n for z in zetas for n in ambiguous_propositions(z, aps, epsilon, tol)})
    watch.lap("neighborhoods")

    a_u = lasso_nba(LassoSpec(tuple(prefix), tuple(cycle_sets)), names)
    below = from_below(a_u, phi, nba_phi)
    if below.empty:
        verdict = Verdict.FALSE
        # every word of the neighborhood language violates phi; report one
        above = is_empty(a_u)
    else:
        nba_neg = to_nba(Not(phi), names)
        above = from_above(a_u, phi, nba_neg)
        verdict = Verdict.TRUE if above.empty else Verdict.UNKNOWN
        if automata_sink is not None:
            automata_sink["negation"] = nba_neg
    if automata_sink is not None:
        automata_sink["neighborhood"] = a_u
        automata_sink["formula"] = nba_phi
    watch.lap("emptiness")

    report = CheckReport(
        verdict=verdict,
        formula=str(phi),
        epsilon=epsilon,
        period=theta,
        horizon=k,
        prop_names=names,
        prefix_letters=tuple(prefix),
        cycle_letter_sets=tuple(tuple(sorted(s)) for s in cycle_sets),
        ambiguous=tuple(ambiguous),
        satisfying_witness=below.witness,
        violating_witness=above.witness,
        timings=tuple(watch.laps),
    )
    logger.info(f"epsilon={epsilon:g}: verdict {verdict.value}")
    return verdict, report


def lift_props(g: QMC, props: Sequence[AtomicProp]) -> List[ObservableProp]:
    """
    Turn propositions over channels into propositions over the Choi chain.

    A trace proposition (I) becomes the observable proposition (d |Omega><Omega|, I);
    observable propositions must already act on the d^2-dimensional Choi space.
    """
    d = g.dim
    w = omega(d)
    choi_observable = d * np.outer(w, w.conj())
    lifted = []
    for p in props:
        if isinstance(p, TraceProp):
            lifted.append(ObservableProp(p.name, choi_observable, p.window))
        elif p.dim == d * d:
            lifted.append(p)
        else:
            raise InputError(
                f"Observable proposition {p.name} has dimension {p.dim}; "
                f"super-operator semantics needs dimension {d * d}"
            )
    return lifted


def _state_props(g: QMC, props: Sequence[AtomicProp]) -> List[ObservableProp]:
    for p in props:
        if isinstance(p, TraceProp):
            raise InputError(f"Trace proposition {p.name} needs super-operator semantics")
        if p.dim != g.dim:
            raise InputError(f"Observable of {p.name} has dimension {p.dim}, the chain has {g.dim}")
    return list(props)


def _qmax(g: QMC, cfg: CheckConfig) -> int:
    # the Choi lift has the spectrum of g; the default cap is dim(H)^2 of g itself
    return cfg.qmax if cfg.qmax is not None else g.dim ** 2


def check_superop(g: QMC, props: Sequence[AtomicProp], phi: Formula, epsilon: float,
                  cfg: CheckConfig = CheckConfig(), analysis: Optional[SpectralAnalysis] = None,
                  automata_sink: Optional[Dict[str, NBA]] = None) -> Tuple[Verdict, CheckReport]:
    """Super-operator semantics: check the Choi chain against the lifted propositions."""
    lifted = choi_lift(g)
    if analysis is None:
        analysis = analyze(lifted, _qmax(g, cfg), cfg.tolerances)
    return check_state(lifted, lift_props(g, props), phi, epsilon, cfg, analysis, automata_sink)


def check_with_refinement(g: QMC, props: Sequence[AtomicProp], phi: Formula,
                          cfg: CheckConfig = CheckConfig(),
                          automata_sink: Optional[Dict[str, NBA]] = None) -> Tuple[Verdict, List[CheckReport]]:
    """
    Check at epsilon0, epsilon0/2, ... until the verdict is conclusive.

    A chain without an initial state is checked under super-operator semantics.

    Args:
        g: The chain
        props: Propositions, in letter-bit order
        phi: The formula
        cfg: epsilon0, max_halvings and tolerances

    Returns:
        Tuple of the last verdict and the report of every iteration
    """
    if g.initial is None:
        target, aps = choi_lift(g), lift_props(g, props)
    else:
        target, aps = g, _state_props(g, props)
    analysis = analyze(target, _qmax(g, cfg), cfg.tolerances)

    reports: List[CheckReport] = []
    epsilon = cfg.epsilon0
    verdict = Verdict.UNKNOWN
    for _ in range(cfg.max_halvings + 1):
        verdict, report = check_state(target, aps, phi, epsilon, cfg, analysis, automata_sink)
        reports.append(report)
        if verdict is not Verdict.UNKNOWN:
            break
        epsilon /= 2

    if verdict is Verdict.UNKNOWN:
        logger.warning(
            f"No conclusive verdict after {cfg.max_halvings} halvings; "
            f"ambiguous propositions: {', '.join(reports[-1].ambiguous) or 'none'}"
        )
    return verdict, reports
