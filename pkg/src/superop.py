"""
Super-operator Module

This module provides the quantum objects the checker works on: density
operators, Kraus-form super-operators with their matrix representations,
quantum Markov chains, the Choi lift used for super-operator semantics and the
embedding of classical Markov chains.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Any, Optional, Sequence, Tuple, List, Union

import numpy as np

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.errors import InputError, NumericalError, NumericalDriftError
from src.numerics import (
    CMatrix, as_matrix, dagger, kron, vectorize, devectorize, omega, frobenius_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DensityOperator:
    """Positive semi-definite, unit-trace complex matrix. Build with from_matrix."""

    mat: CMatrix

    def __post_init__(self):
        m = as_matrix(self.mat, "density operator")
        if m.shape[0] != m.shape[1]:
            raise InputError(f"density operator must be square, got shape {m.shape}")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def from_matrix(cls, m, tol: Tolerances = DEFAULT_TOLERANCES,
                    allow_projection: bool = True) -> "DensityOperator":
        """
        Validate a matrix as a quantum state, re-projecting small drift.

        Args:
            m: Candidate d x d matrix
            tol: Tolerances for Hermiticity, positivity, trace and drift
            allow_projection: Whether drift up to tol.drift_tol may be repaired

        Returns:
            A DensityOperator

        Raises:
            InputError: Invalid state and projection not allowed
            NumericalDriftError: Deviation beyond tol.drift_tol
        """
        m = as_matrix(m, "density operator")
        if m.shape[0] != m.shape[1]:
            raise InputError(f"density operator must be square, got shape {m.shape}")

        herm_dev = float(np.max(np.abs(m - dagger(m)), initial=0.0))
        hermitized = (m + dagger(m)) / 2
        min_eig = float(np.min(np.linalg.eigvalsh(hermitized)))
        psd_dev = max(0.0, -min_eig)
        trace_dev = abs(complex(np.trace(m)) - 1.0)

        if herm_dev <= tol.herm_tol and psd_dev <= tol.psd_tol and trace_dev <= tol.trace_tol:
            return cls(m)

        message = (f"not a density operator (hermiticity {herm_dev:.2e}, "
                   f"negativity {psd_dev:.2e}, trace deviation {trace_dev:.2e})")
        if not allow_projection:
            raise InputError(message)
        if max(herm_dev, psd_dev, trace_dev) > tol.drift_tol:
            logger.error(f"Density operator drift beyond {tol.drift_tol}: {message}")
            raise NumericalDriftError(message)

        vals, vecs = np.linalg.eigh(hermitized)
        vals = np.clip(vals, 0.0, None)
        projected = (vecs * vals) @ dagger(vecs)
        projected = projected / np.trace(projected).real
        logger.warning(f"Re-projected drifting density operator: {message}")
        return cls(projected)


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators of a map; cptp_checked is False for raw MPS tensors."""

    dim: int
    operators: Tuple[CMatrix, ...]
    cptp_checked: bool = True

    @classmethod
    def from_matrices(cls, matrices: Sequence, tol: Tolerances = DEFAULT_TOLERANCES,
                      require_cptp: bool = True) -> "KrausSet":
        """
        Build a Kraus set from matrices.

        Args:
            matrices: One or more d x d matrices
            tol: Tolerances supplying cptp_tol
            require_cptp: Validate sum_k E_k^dag E_k = I and fail otherwise

        Returns:
            A KrausSet
        """
        ops = tuple(as_matrix(m, f"Kraus operator {i}") for i, m in enumerate(matrices))
        report = validate_cptp(ops, tol)
        if require_cptp and not report["passed"]:
            logger.error(f"Kraus operators are not trace preserving: deviation {report['deviation']:.3e}")
            raise InputError(
                f"Kraus operators are not trace preserving: "
                f"||sum E^dag E - I|| = {report['deviation']:.3e} > {tol.cptp_tol}"
            )
        return cls(dim=report["dim"], operators=ops, cptp_checked=require_cptp)


def validate_cptp(kraus: Union[KrausSet, Sequence], tol: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, Any]:
    """
    Report how far a Kraus set is from trace preservation.

    Args:
        kraus: KrausSet or sequence of matrices
        tol: Tolerances supplying cptp_tol

    Returns:
        Dictionary with deviation, passed, tolerance, dim and operator_count
    """
    ops = kraus.operators if isinstance(kraus, KrausSet) else tuple(np.asarray(m) for m in kraus)
    if not ops:
        raise InputError("A Kraus set needs at least one operator")
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise InputError(f"Kraus operators have mismatched shapes: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise InputError(f"Kraus operators must be square, got shape {shape}")

    d = shape[0]
    total = sum(dagger(op) @ op for op in ops)
    deviation = frobenius_norm(total - np.eye(d))
    return {
        "dim": d,
        "operator_count": len(ops),
        "deviation": deviation,
        "tolerance": tol.cptp_tol,
        "passed": deviation <= tol.cptp_tol,
    }


def matrix_representation(kraus: KrausSet) -> CMatrix:
    """M_E = sum_k E_k (x) conj(E_k)."""
    logger.debug(f"Computing matrix representation for d={kraus.dim}")
    rep = sum(kron(op, op.conj()) for op in kraus.operators)
    return as_matrix(rep, "matrix representation")


@dataclass(frozen=True)
class SuperOperator:
    """A map in Kraus form together with its cached d^2 x d^2 representation."""

    kraus: KrausSet
    rep: CMatrix

    @property
    def dim(self) -> int:
        return self.kraus.dim

    @classmethod
    def from_kraus(cls, kraus: KrausSet, tol: Tolerances = DEFAULT_TOLERANCES) -> "SuperOperator":
        rep = matrix_representation(kraus)
        if kraus.cptp_checked:
            radius = float(np.max(np.abs(np.linalg.eigvals(rep))))
            if abs(radius - 1.0) > tol.spectral_radius_tol:
                raise NumericalError(f"Spectral radius {radius:.8f} of a CPTP map differs from 1")
        return cls(kraus=kraus, rep=rep)

    @classmethod
    def from_matrices(cls, matrices: Sequence, tol: Tolerances = DEFAULT_TOLERANCES,
                      require_cptp: bool = True) -> "SuperOperator":
        return cls.from_kraus(KrausSet.from_matrices(matrices, tol, require_cptp), tol)


@dataclass(frozen=True)
class QMC:
    """Quantum Markov chain (H, E, rho0); initial is None for the pair form (H, E)."""

    superop: SuperOperator
    initial: Optional[DensityOperator] = None

    def __post_init__(self):
        if self.initial is not None and self.initial.dim != self.superop.dim:
            raise InputError(
                f"Initial state dimension {self.initial.dim} does not match "
                f"channel dimension {self.superop.dim}"
            )

    @property
    def dim(self) -> int:
        return self.superop.dim


def apply(e: SuperOperator, rho: DensityOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> DensityOperator:
    """
    Apply a channel to a state via the Kraus sum sum_k E_k rho E_k^dag.

    Args:
        e: The channel
        rho: Input state of matching dimension
        tol: Tolerances for validating the output state

    Returns:
        The output state
    """
    if rho.dim != e.dim:
        raise InputError(f"State dimension {rho.dim} does not match channel dimension {e.dim}")
    out = sum(op @ rho.mat @ dagger(op) for op in e.kraus.operators)
    return DensityOperator.from_matrix(out, tol)


def compose(e2: SuperOperator, e1: SuperOperator) -> SuperOperator:
    """The channel e2 after e1; its representation is rep(e2) @ rep(e1)."""
    if e1.dim != e2.dim:
        raise InputError(f"Cannot compose channels of dimensions {e2.dim} and {e1.dim}")
    ops = tuple(as_matrix(a @ b, "Kraus product") for a in e2.kraus.operators for b in e1.kraus.operators)
    kraus = KrausSet(dim=e1.dim, operators=ops,
                     cptp_checked=e1.kraus.cptp_checked and e2.kraus.cptp_checked)
    return SuperOperator(kraus=kraus, rep=as_matrix(e2.rep @ e1.rep, "composite representation"))


def choi_lift(g: QMC) -> QMC:
    """
    Lift (H, E) to (H (x) H, E (x) id, |Omega><Omega|/d).

    Args:
        g: A chain; its initial state, if any, is ignored

    Returns:
        The lifted chain with the normalized Choi initial state
    """
    d = g.dim
    eye = np.eye(d)
    ops = tuple(as_matrix(kron(op, eye), "lifted Kraus operator") for op in g.superop.kraus.operators)
    kraus = KrausSet(dim=d * d, operators=ops, cptp_checked=g.superop.kraus.cptp_checked)
    w = omega(d)
    initial = DensityOperator(np.outer(w, w.conj()) / d)
    logger.info(f"Lifted channel of dimension {d} to its Choi chain of dimension {d * d}")
    return QMC(superop=SuperOperator(kraus=kraus, rep=matrix_representation(kraus)), initial=initial)


def embed_classical_mc(P, mu0, tol: Tolerances = DEFAULT_TOLERANCES) -> QMC:
    """
    Embed a classical Markov chain as a quantum one.

    Args:
        P: Row-stochastic n x n transition matrix
        mu0: Initial distribution of length n
        tol: Tolerances supplying stochastic_tol

    Returns:
        QMC with Kraus operators sqrt(P[s, t]) |t><s| and diagonal initial state
    """
    P = np.asarray(P, dtype=float)
    mu0 = np.asarray(mu0, dtype=float).reshape(-1)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InputError(f"Transition matrix must be square, got shape {P.shape}")
    n = P.shape[0]
    if np.any(P < -tol.stochastic_tol) or np.max(np.abs(P.sum(axis=1) - 1.0)) > tol.stochastic_tol:
        raise InputError("Transition matrix is not row-stochastic")
    if mu0.size != n or np.any(mu0 < -tol.stochastic_tol) or abs(mu0.sum() - 1.0) > tol.stochastic_tol:
        raise InputError("Initial distribution is not a probability vector of matching length")

    ops = []
    for s, t in itertools.product(range(n), repeat=2):
        if P[s, t] > 0:
            op = np.zeros((n, n))
            op[t, s] = np.sqrt(P[s, t])
            ops.append(op)
    superop = SuperOperator.from_matrices(ops, tol)
    initial = DensityOperator.from_matrix(np.diag(np.clip(mu0, 0.0, None)), tol)
    return QMC(superop=superop, initial=initial)


def mps_inner_product(kraus: Union[KrausSet, SuperOperator, Sequence], N: int,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    <psi_N|psi_N> = tr(M_E^N) for the MPS built from the given tensors.

    Args:
        kraus: Tensors as a KrausSet, SuperOperator or raw matrices (not required to be CPTP)
        N: Chain length, at least 1

    Returns:
        The real norm squared
    """
    if N < 1:
        raise InputError(f"Chain length must be at least 1, got {N}")
    if isinstance(kraus, SuperOperator):
        rep = kraus.rep
    elif isinstance(kraus, KrausSet):
        rep = matrix_representation(kraus)
    else:
        rep = matrix_representation(KrausSet.from_matrices(kraus, tol, require_cptp=False))
    value = complex(np.trace(np.linalg.matrix_power(rep, N)))
    if abs(value.imag) > tol.imag_tol * max(1.0, abs(value.real)):
        raise NumericalError(f"tr(M^{N}) has imaginary part {value.imag:.3e}")
    return value.real


def mps_inner_product_bruteforce(tensors: Sequence, N: int) -> float:
    """Sum over all index strings of |tr(A_k1 ... A_kN)|^2."""
    tensors = [np.asarray(t, dtype=np.complex128) for t in tensors]
    total = 0.0
    for word in itertools.product(tensors, repeat=N):
        prod = word[0]
        for t in word[1:]:
            prod = prod @ t
        total += abs(np.trace(prod)) ** 2
    return total


def trajectory(g: QMC, steps: int, tol: Tolerances = DEFAULT_TOLERANCES) -> List[DensityOperator]:
    """States rho0, E(rho0), ..., E^steps(rho0) by iterated application."""
    if g.initial is None:
        raise InputError("A state trajectory needs an initial state")
    states = [g.initial]
    for _ in range(steps):
        states.append(apply(g.superop, states[-1], tol))
    return states


def superop_trajectory_traces(e: SuperOperator, steps: int) -> List[float]:
    """tr(M_E^n) for n = 0..steps; n = 0 is tr(M_id) = d^2 of the original space."""
    traces = []
    power = np.eye(e.rep.shape[0], dtype=np.complex128)
    for _ in range(steps + 1):
        traces.append(float(np.trace(power).real))
        power = e.rep @ power
    return traces


def rep_apply(e: SuperOperator, rho: DensityOperator, n: int = 1) -> CMatrix:
    """E^n(rho) through powers of the representation; used to cross-check apply."""
    return devectorize(np.linalg.matrix_power(e.rep, n) @ vectorize(rho.mat))
