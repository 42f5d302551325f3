"""
Channels Module

This module provides the example channels and chains used by the bundled
models and the tests: unitary and dissipative qubit channels, the AKLT and
cluster-state MPS tensors, permutation chains and random CPTP maps.
"""

import logging
from typing import List, Optional

import numpy as np

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.superop import SuperOperator, DensityOperator, QMC, embed_classical_mc

logger = logging.getLogger(__name__)


def basis_state(d: int, i: int) -> DensityOperator:
    m = np.zeros((d, d), dtype=np.complex128)
    m[i, i] = 1.0
    return DensityOperator(m)


def plus_state() -> DensityOperator:
    return DensityOperator(np.full((2, 2), 0.5, dtype=np.complex128))


def identity_channel(d: int = 2) -> SuperOperator:
    return SuperOperator.from_matrices([np.eye(d)])


def not_gate() -> SuperOperator:
    """E(rho) = |1><0| rho |0><1| + |0><1| rho |1><0|."""
    return SuperOperator.from_matrices([
        np.array([[0, 0], [1, 0]]),
        np.array([[0, 1], [0, 0]]),
    ])


def pauli_x_channel() -> SuperOperator:
    """The unitary flip X rho X; unlike not_gate it keeps coherences."""
    return SuperOperator.from_matrices([np.array([[0, 1], [1, 0]])])


def amplitude_damping(p: float) -> SuperOperator:
    e0 = np.array([[1, 0], [0, np.sqrt(1 - p)]])
    e1 = np.array([[0, np.sqrt(p)], [0, 0]])
    return SuperOperator.from_matrices([e0, e1])


def phase_rotation(psi: float) -> SuperOperator:
    """Unitary channel U = |0><0| + e^{2 pi i psi} |1><1|."""
    u = np.diag([1.0, np.exp(2j * np.pi * psi)])
    return SuperOperator.from_matrices([u])


def aklt_tensors() -> List[np.ndarray]:
    a = np.sqrt(2 / 3)
    b = np.sqrt(1 / 3)
    return [
        np.array([[0, a], [0, 0]]),
        np.array([[-b, 0], [0, b]]),
        np.array([[0, 0], [-a, 0]]),
    ]


def cluster_tensors() -> List[np.ndarray]:
    s = 1 / np.sqrt(2)
    return [
        s * np.array([[0, 0], [1, 1]]),
        s * np.array([[1, -1], [0, 0]]),
    ]


def aklt_channel() -> SuperOperator:
    return SuperOperator.from_matrices(aklt_tensors())


def cluster_channel() -> SuperOperator:
    return SuperOperator.from_matrices(cluster_tensors())


def cycle_permutation_chain(k: int) -> np.ndarray:
    """Transition matrix of the deterministic k-cycle s -> s+1 mod k."""
    return np.roll(np.eye(k), 1, axis=1)


def cycle_permutation_qmc(k: int) -> QMC:
    mu0 = np.zeros(k)
    mu0[0] = 1.0
    return embed_classical_mc(cycle_permutation_chain(k), mu0)


def random_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    P = rng.random((n, n)) + 0.05
    return P / P.sum(axis=1, keepdims=True)


def random_distribution(n: int, rng: np.random.Generator) -> np.ndarray:
    mu = rng.random(n) + 0.01
    return mu / mu.sum()


def random_channel(d: int, n_kraus: int, rng: np.random.Generator,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> SuperOperator:
    """Kraus operators sliced from a Haar-like random isometry C^d -> C^(d*n)."""
    g = rng.normal(size=(d * n_kraus, d)) + 1j * rng.normal(size=(d * n_kraus, d))
    v, _ = np.linalg.qr(g)
    ops = [v[k * d:(k + 1) * d, :] for k in range(n_kraus)]
    return SuperOperator.from_matrices(ops, tol)


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityOperator.from_matrix(m / np.trace(m).real)
