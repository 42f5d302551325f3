"""
Numerics Module

This module provides the dense complex linear-algebra kernel: Kronecker
products, vectorization, norms and a tolerance-clustered eigendecomposition
that stands in for the Jordan decomposition.

Basis convention: standard computational basis with row-major vectorization,
so vectorize(|i><j|) = |i> (x) |j> and M_E = sum_k E_k (x) conj(E_k) acts on
vectorized operators entrywise.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.errors import InputError, NumericalError

logger = logging.getLogger(__name__)

CMatrix = np.ndarray
CVector = np.ndarray


def as_matrix(a, name: str = "matrix") -> CMatrix:
    """
    Convert array-like input to a read-only complex matrix with finite entries.

    Args:
        a: Anything numpy can turn into a 2-D array
        name: Name used in error messages

    Returns:
        A complex128 array that cannot be written to
    """
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    m.setflags(write=False)
    return m


def _require_square(a: CMatrix, name: str = "matrix") -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}")
    return a.shape[0]


def dagger(a: CMatrix) -> CMatrix:
    return a.conj().T


def kron(a: CMatrix, b: CMatrix) -> CMatrix:
    """Kronecker product; dimensions multiply."""
    return np.kron(a, b)


def vectorize(a: CMatrix) -> CVector:
    """
    Vectorize a square matrix as (A (x) I)|Omega>.

    Args:
        a: Square d x d matrix

    Returns:
        Vector of length d*d, the row-major flattening of a
    """
    _require_square(np.asarray(a), "vectorize input")
    return np.asarray(a, dtype=np.complex128).reshape(-1)


def devectorize(v: CVector) -> CMatrix:
    """Inverse of vectorize."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise InputError(f"Vector length {v.size} is not a perfect square")
    return v.reshape(d, d)


def omega(d: int) -> CVector:
    """The unnormalized maximally entangled vector sum_j |j>|j>."""
    return vectorize(np.eye(d))


def frobenius_norm(a: CMatrix) -> float:
    return float(np.linalg.norm(np.asarray(a), 'fro'))


def spectral_norm(a: CMatrix) -> float:
    """Largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(a)[0])


def condition_number(a: CMatrix) -> float:
    """Spectral condition number ||A||*||A^-1||; inf for singular input."""
    s = scipy.linalg.svdvals(np.asarray(a))
    if s.size == 0:
        return 1.0
    if s[-1] == 0.0:
        return float('inf')
    return float(s[0] / s[-1])


def is_hermitian(a: CMatrix, tol: float) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a)), initial=0.0) <= tol


@dataclass(frozen=True)
class EigenSystem:
    """
    Eigendecomposition M = S diag(w) S^-1 with clustering diagnostics.

    right_vectors holds unit-norm eigenvectors as columns (the S of the Jordan
    form when M is diagonalizable). left_vectors is normalized per cluster so
    that left_vectors[:, c]^H right_vectors[:, c] = I on every non-defective
    cluster c.
    """

    eigenvalues: np.ndarray
    right_vectors: CMatrix
    left_vectors: CMatrix
    condition_estimate: float
    defect_flags: np.ndarray
    clusters: Tuple[Tuple[int, ...], ...]
    matrix_norm: float

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)


def _cluster_eigenvalues(w: np.ndarray, tol: float) -> Tuple[Tuple[int, ...], ...]:
    """Single-linkage clusters of eigenvalues closer than tol."""
    n = w.size
    if n == 0:
        return ()
    close = np.abs(w[:, None] - w[None, :]) <= tol
    count, labels = connected_components(csr_matrix(close), directed=False)
    groups = [tuple(int(i) for i in np.flatnonzero(labels == k)) for k in range(count)]
    return tuple(sorted(groups, key=lambda g: g[0]))


def eig(a: CMatrix, eig_tol: Optional[float] = None, tol: Tolerances = DEFAULT_TOLERANCES) -> EigenSystem:
    """
    Eigendecomposition with tolerance clustering and defect detection.

    Args:
        a: Square complex matrix
        eig_tol: Relative residual bound for eigenpairs (defaults to tol.eig_tol)
        tol: Tolerances supplying cluster_tol and defect_cond_tol

    Returns:
        EigenSystem of a

    Raises:
        NumericalError: LAPACK failed to converge or returned an inaccurate pair
    """
    eig_tol = tol.eig_tol if eig_tol is None else eig_tol
    a = np.asarray(a, dtype=np.complex128)
    n = _require_square(a, "eig input")
    if not np.all(np.isfinite(a)):
        raise InputError("eig input has non-finite entries")

    try:
        w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Eigendecomposition failed: {str(e)}")
        raise NumericalError(f"Eigendecomposition failed to converge: {str(e)}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(vr)) and np.all(np.isfinite(vl))):
        raise NumericalError("Eigendecomposition returned non-finite values")

    norm_a = spectral_norm(a)
    scale = norm_a if norm_a > 0 else 1.0
    vr = vr / np.linalg.norm(vr, axis=0, keepdims=True)
    vl = np.array(vl, dtype=np.complex128)

    clusters = _cluster_eigenvalues(w, tol.cluster_tol * scale)
    defect = np.zeros(n, dtype=bool)
    for c in clusters:
        idx = list(c)
        if len(idx) > 1 and condition_number(vr[:, idx]) > tol.defect_cond_tol:
            defect[idx] = True
            continue
        gram = dagger(vl[:, idx]) @ vr[:, idx]
        if condition_number(gram) > tol.singular_cond_tol:
            # left and right vectors orthogonal: a Jordan block the clustering missed
            defect[idx] = True
            continue
        vl[:, idx] = vl[:, idx] @ dagger(np.linalg.inv(gram))

    for i in np.flatnonzero(~defect):
        residual = np.linalg.norm(a @ vr[:, i] - w[i] * vr[:, i])
        if residual > eig_tol * scale:
            logger.error(f"Eigenpair {i} residual {residual:.3e} exceeds {eig_tol * scale:.3e}")
            raise NumericalError(f"Eigenpair for {w[i]:.6g} is inaccurate (residual {residual:.3e})")

    if defect.any():
        logger.debug(f"Defective eigenvalue clusters at: {np.round(w[defect], 8)}")

    for m in (w, vr, vl, defect):
        m.setflags(write=False)
    return EigenSystem(
        eigenvalues=w,
        right_vectors=vr,
        left_vectors=vl,
        condition_estimate=condition_number(vr),
        defect_flags=defect,
        clusters=clusters,
        matrix_norm=norm_a,
    )
