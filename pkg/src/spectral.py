"""
Spectral Module

This module analyzes the matrix representation of a channel: peripheral
spectrum with rational angles, the peripheral projector E_phi, decay constants,
periodic stability, limit states and the horizon after which a trajectory
stays within epsilon of its limit cycle.
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Any, List, Optional, Tuple

import numpy as np

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.errors import InputError, SpectralError
from src.numerics import CMatrix, EigenSystem, eig, dagger, vectorize, devectorize, condition_number
from src.superop import QMC, DensityOperator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RationalAngle:
    """The angle p/q of the root of unity e^{2 pi i p/q}."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or not 0 <= self.p < self.q or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"Invalid rational angle {self.p}/{self.q}")

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class PeripheralEntry:
    eigenvalue: complex
    angle: Optional[RationalAngle]
    eigen_indexes: Tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.eigen_indexes)


@dataclass(frozen=True)
class PeripheralSpectrum:
    entries: Tuple[PeripheralEntry, ...]

    @property
    def indexes(self) -> Tuple[int, ...]:
        return tuple(i for e in self.entries for i in e.eigen_indexes)

    @property
    def eigenvalues(self) -> List[complex]:
        return [e.eigenvalue for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DecayProfile:
    """
    Constants of the decay bound ||M^n - M_psi^n|| <= C mu^n n^(d_mu - 1).

    nilpotent_index bounds the step after which near-zero eigenvalues in a
    defective cluster have died out; it is 0 when there is no such cluster.
    """

    mu: float
    d_mu: int
    C: float
    alpha_bound: float
    nilpotent_index: int = 0

    def bound(self, n: int) -> float:
        if self.mu == 0.0:
            # no closed form before the nilpotent part has died out
            return 0.0 if n >= self.nilpotent_index else math.inf
        return self.C * self.mu ** n * n ** (self.d_mu - 1)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    period: Optional[int]
    offending: Tuple[complex, ...]
    horizon_inputs: DecayProfile
    contributing: PeripheralSpectrum

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stable": self.stable,
            "period": self.period,
            "offending": [[z.real, z.imag] for z in self.offending],
        }


def rational_angle(z: complex, qmax: int, angle_tol: float = DEFAULT_TOLERANCES.angle_tol) -> Optional[RationalAngle]:
    """
    Best rational angle p/q with q <= qmax for the unit-modulus number z.

    The candidate is the continued-fraction approximation of arg(z)/2pi; it is
    accepted when it lies within angle_tol radians of arg(z).

    Args:
        z: Complex number near the unit circle
        qmax: Largest denominator considered
        angle_tol: Angular tolerance in radians

    Returns:
        RationalAngle, or None when no p/q with q <= qmax matches
    """
    x = (math.atan2(z.imag, z.real) / (2 * math.pi)) % 1.0
    approx = Fraction(x).limit_denominator(qmax)
    distance = abs(x - float(approx))
    distance = min(distance, 1.0 - distance)
    if 2 * math.pi * distance > angle_tol:
        return None
    p, q = approx.numerator % approx.denominator, approx.denominator
    return RationalAngle(p, q)


def peripheral_spectrum(eigs: EigenSystem, qmax: int, tol: Tolerances = DEFAULT_TOLERANCES) -> PeripheralSpectrum:
    """
    Collect the eigenvalue clusters of modulus at least 1 - peripheral_tol.

    Args:
        eigs: Eigen-system of a CPTP matrix representation
        qmax: Denominator cap for rational angles
        tol: Tolerances supplying peripheral_tol and angle_tol

    Returns:
        PeripheralSpectrum with one entry per cluster
    """
    entries = []
    for cluster in eigs.clusters:
        value = complex(np.mean(eigs.eigenvalues[list(cluster)]))
        if abs(value) >= 1.0 - tol.peripheral_tol:
            angle = rational_angle(value, qmax, tol.angle_tol)
            entries.append(PeripheralEntry(eigenvalue=value, angle=angle, eigen_indexes=cluster))
    logger.debug(f"Peripheral spectrum: {[(round(e.eigenvalue.real, 8), round(e.eigenvalue.imag, 8), str(e.angle)) for e in entries]}")
    return PeripheralSpectrum(tuple(entries))


def _peripheral_blocks(eigs: EigenSystem, ps: PeripheralSpectrum, tol: Tolerances) -> Tuple[CMatrix, CMatrix]:
    """Right vectors R_p and the rows G^-1 L_p^H of the peripheral part."""
    if len(ps) == 0:
        raise SpectralError("Empty peripheral spectrum; the map is not trace preserving")
    idx = list(ps.indexes)
    if np.any(eigs.defect_flags[idx]):
        logger.error("Defective peripheral eigenvalue cluster")
        raise SpectralError("Defective peripheral eigenvalue cluster; the map is likely not CPTP")
    right = eigs.right_vectors[:, idx]
    left = eigs.left_vectors[:, idx]
    gram = dagger(left) @ right
    cond = condition_number(gram)
    if cond > tol.singular_cond_tol:
        logger.error(f"Peripheral eigenbasis is near-singular (condition {cond:.3e})")
        raise SpectralError(f"Peripheral eigenbasis is near-singular (condition {cond:.3e})")
    return right, np.linalg.solve(gram, dagger(left))


def peripheral_projector_rep(eigs: EigenSystem, ps: PeripheralSpectrum,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> CMatrix:
    """
    Matrix representation of E_phi, the spectral projector onto the peripheral eigenspaces.

    Raises:
        SpectralError: Defective peripheral cluster or a projector that is not idempotent
    """
    right, coeff_rows = _peripheral_blocks(eigs, ps, tol)
    proj = right @ coeff_rows
    defect = float(np.linalg.norm(proj @ proj - proj))
    if defect > tol.projector_tol:
        logger.error(f"Peripheral projector is not idempotent: {defect:.3e}")
        raise SpectralError(f"Peripheral projector is not idempotent (||P^2 - P|| = {defect:.3e})")
    return proj


def decay_profile(eigs: EigenSystem, ps: PeripheralSpectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> DecayProfile:
    """
    Decay constants of the interior spectrum.

    mu is the largest interior modulus; eigenvalues below zero_tol count as 0.
    d_mu is the algebraic multiplicity of a defective cluster at modulus mu,
    else 1. alpha_bound is cond(S) with unit-norm eigenvector columns.
    """
    peripheral = set(ps.indexes)
    interior = [c for c in eigs.clusters if not set(c) & peripheral]
    w = eigs.eigenvalues
    scale = eigs.matrix_norm if eigs.matrix_norm > 0 else 1.0
    alpha = eigs.condition_estimate

    zero_idx = [i for c in interior for i in c if abs(w[i]) <= tol.zero_tol]
    zero_defective = bool(zero_idx) and bool(np.any(eigs.defect_flags[zero_idx]))
    nilpotent_index = len(zero_idx) if zero_defective else 0

    moduli = [(float(abs(np.mean(w[list(c)]))), c) for c in interior]
    nonzero = [(m, c) for m, c in moduli if m > tol.zero_tol]
    if not nonzero:
        return DecayProfile(mu=0.0, d_mu=max(1, nilpotent_index), C=alpha,
                            alpha_bound=alpha, nilpotent_index=nilpotent_index)

    mu = max(m for m, _ in nonzero)
    at_mu = [c for m, c in nonzero if abs(m - mu) <= tol.cluster_tol * scale]
    d_mu = max(len(c) if np.any(eigs.defect_flags[list(c)]) else 1 for c in at_mu)
    if mu >= 1.0:
        raise SpectralError(f"Interior eigenvalue modulus {mu} is not below 1")

    if d_mu == 1:
        C = alpha
    else:
        C = alpha * sum(mu ** (-k) / math.factorial(k) for k in range(d_mu))
    logger.debug(f"Decay profile: mu={mu:.6g}, d_mu={d_mu}, alpha={alpha:.6g}, C={C:.6g}")
    return DecayProfile(mu=mu, d_mu=d_mu, C=C, alpha_bound=alpha, nilpotent_index=nilpotent_index)


def contributing_peripherals(eigs: EigenSystem, ps: PeripheralSpectrum, rho0: DensityOperator,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> PeripheralSpectrum:
    """
    Peripheral entries whose eigenspace component of vec(rho0) exceeds coeff_tol.

    Raises:
        SpectralError: Near-singular peripheral eigenbasis
    """
    right, coeff_rows = _peripheral_blocks(eigs, ps, tol)
    coeffs = coeff_rows @ vectorize(rho0.mat)
    position = {i: k for k, i in enumerate(ps.indexes)}
    kept = []
    for entry in ps.entries:
        cols = [position[i] for i in entry.eigen_indexes]
        component = np.linalg.norm(right[:, cols] @ coeffs[cols])
        if component > tol.coeff_tol:
            kept.append(entry)
    return PeripheralSpectrum(tuple(kept))


def _stability(contributing: PeripheralSpectrum, decay: DecayProfile) -> StabilityReport:
    offending = tuple(e.eigenvalue for e in contributing.entries if e.angle is None)
    period = None
    if not offending:
        period = math.lcm(*(e.angle.q for e in contributing.entries)) if len(contributing) else 1
    return StabilityReport(stable=not offending, period=period, offending=offending,
                           horizon_inputs=decay, contributing=contributing)


def horizon(dp: DecayProfile, period: int, epsilon: float, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """
    K = M * period with M the least positive integer such that
    C mu^(M period) (M period)^(d_mu - 1) < epsilon and M period + 1 > d_mu.

    Args:
        dp: Decay constants
        period: Period of the chain
        epsilon: Approximation radius
        tol: Tolerances supplying max_horizon

    Returns:
        The horizon K

    Raises:
        SpectralError: No horizon below tol.max_horizon
    """
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if period < 1:
        raise InputError(f"period must be positive, got {period}")

    min_steps = max(dp.d_mu, dp.nilpotent_index)
    if dp.mu == 0.0:
        return max(1, math.ceil(min_steps / period)) * period

    d = dp.d_mu
    log_mu = math.log(dp.mu)
    if d > 1:
        # past this point the bound decreases in n
        min_steps = max(min_steps, math.ceil((d - 1) / -log_mu))
    log_c = math.log(dp.C) if dp.C > 0 else -math.inf
    log_eps = math.log(epsilon)

    def holds(m: int) -> bool:
        n = m * period
        return log_c + n * log_mu + (d - 1) * math.log(n) < log_eps

    lo = max(1, math.ceil(min_steps / period))
    if holds(lo):
        return lo * period
    limit = max(lo, tol.max_horizon // period)
    hi = lo
    while not holds(hi):
        if hi >= limit:
            logger.error(f"Horizon exceeds {tol.max_horizon} steps for epsilon={epsilon}")
            raise SpectralError(f"Horizon exceeds {tol.max_horizon} steps (C={dp.C:.3e}, mu={dp.mu:.6g})")
        lo, hi = hi, min(2 * hi, limit)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi * period


def _check_limit_state(rep: CMatrix, period: int, vec_eta: np.ndarray, tol: Tolerances) -> None:
    drift = float(np.linalg.norm(np.linalg.matrix_power(rep, period) @ vec_eta - vec_eta))
    if drift > tol.projector_tol:
        logger.error(f"Limit state is not invariant under E^{period}: {drift:.3e}")
        raise SpectralError(f"Limit state is not invariant under E^{period} (drift {drift:.3e})")


@dataclass(frozen=True)
class SpectralAnalysis:
    """Everything derived from one eigendecomposition of M_E, reused across epsilons."""

    eigensystem: EigenSystem
    peripheral: PeripheralSpectrum
    projector: CMatrix
    decay: DecayProfile
    stability: StabilityReport
    qmax: int
    rep: CMatrix = field(repr=False)

    @property
    def psi_rep(self) -> CMatrix:
        """Matrix representation of E_psi = E o E_phi."""
        return self.rep @ self.projector

    def horizon(self, epsilon: float, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
        if not self.stability.stable:
            raise SpectralError("Horizon is undefined for a chain that is not periodically stable")
        return horizon(self.decay, self.stability.period, epsilon, tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": [[complex(z).real, complex(z).imag] for z in self.eigensystem.eigenvalues],
            "peripheral": [
                {
                    "eigenvalue": [e.eigenvalue.real, e.eigenvalue.imag],
                    "angle": str(e.angle) if e.angle is not None else None,
                    "multiplicity": e.multiplicity,
                }
                for e in self.peripheral.entries
            ],
            "mu": self.decay.mu,
            "d_mu": self.decay.d_mu,
            "C": self.decay.C,
            "alpha_bound": self.decay.alpha_bound,
            "qmax": self.qmax,
            **self.stability.to_dict(),
        }


def analyze(g: QMC, qmax: Optional[int] = None, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralAnalysis:
    """
    Run the full spectral analysis of a chain.

    Without an initial state every peripheral entry counts as contributing,
    which gives the state-free notion of periodic stability.

    Args:
        g: The chain
        qmax: Denominator cap for rational angles (defaults to dim(H)^2)
        tol: Tolerances

    Returns:
        SpectralAnalysis of g
    """
    qmax = g.dim ** 2 if qmax is None else qmax
    rep = g.superop.rep
    logger.info(f"Analyzing spectrum of a {rep.shape[0]}x{rep.shape[0]} representation (qmax={qmax})")
    eigs = eig(rep, tol=tol)
    ps = peripheral_spectrum(eigs, qmax, tol)
    proj = peripheral_projector_rep(eigs, ps, tol)
    decay = decay_profile(eigs, ps, tol)
    contributing = ps if g.initial is None else contributing_peripherals(eigs, ps, g.initial, tol)
    stability = _stability(contributing, decay)
    if stability.stable:
        logger.info(f"Chain is periodically stable with period {stability.period}")
    else:
        logger.warning(f"Chain is not periodically stable; {len(stability.offending)} offending eigenvalues")
    return SpectralAnalysis(eigensystem=eigs, peripheral=ps, projector=proj, decay=decay,
                            stability=stability, qmax=qmax, rep=rep)


def stability_report(g: QMC, qmax: Optional[int] = None, tol: Tolerances = DEFAULT_TOLERANCES) -> StabilityReport:
    return analyze(g, qmax, tol).stability


def limit_states(g: QMC, period: int, analysis: Optional[SpectralAnalysis] = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> List[DensityOperator]:
    """
    Limit-cycle states eta_k = E_phi(E^k(rho0)) for k < period.

    Args:
        g: Chain with an initial state
        period: Its period
        analysis: Precomputed analysis of g, if available

    Returns:
        The period many limit states
    """
    if g.initial is None:
        raise InputError("Limit states need an initial state")
    if analysis is None:
        analysis = analyze(g, tol=tol)
    rep = analysis.rep
    v = vectorize(g.initial.mat)
    states = []
    for _ in range(period):
        vec_eta = analysis.projector @ v
        _check_limit_state(rep, period, vec_eta, tol)
        states.append(DensityOperator.from_matrix(devectorize(vec_eta), tol))
        v = rep @ v
    return states
