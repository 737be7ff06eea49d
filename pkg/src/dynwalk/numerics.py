"""Dense Hermitian linear algebra for walk evolution.

Everything downstream (stepping a walk, comparing programs, checking a
compiled circuit) reduces to exponentials of real symmetric {0,1} matrices.
This module owns that numerical kernel so the rest of the package can stay
exact-rational until the moment a unitary is actually needed.

Matrices are plain numpy arrays. ``ComplexMatrix`` and ``StateVector`` are
aliases, not wrappers: adjacency matrices arrive as integer arrays and leave
as complex unitaries, and keeping them bare keeps the algebra readable.
"""

from __future__ import annotations

from typing import NamedTuple, SupportsFloat, Union

import numpy as np

ComplexMatrix = np.ndarray
StateVector = np.ndarray

__all__ = [
    "ComplexMatrix",
    "StateVector",
    "EigenDecomposition",
    "symmetric_eigh",
    "spectral_norm",
    "evolve_unitary",
    "phase_distance",
    "apply",
]


class EigenDecomposition(NamedTuple):
    """Spectral factorization A = V diag(w) V^T of a real symmetric matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _require_symmetric(matrix: np.ndarray) -> np.ndarray:
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max(initial=0.0) != 0.0:
            raise ValueError("expected a real symmetric matrix, got complex entries")
        arr = arr.real
    arr = arr.astype(np.float64, copy=False)
    if not np.array_equal(arr, arr.T):
        raise ValueError("matrix is not symmetric")
    return arr


def symmetric_eigh(matrix: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix, eigenvalues ascending.

    Guarantees V diag(w) V^T reconstructs the input to high accuracy and that
    the eigenvector columns are orthonormal. Raises ``ValueError`` for
    non-square or non-symmetric input.
    """
    arr = _require_symmetric(matrix)
    eigenvalues, eigenvectors = np.linalg.eigh(arr)
    return EigenDecomposition(eigenvalues, eigenvectors)


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest absolute eigenvalue of a real symmetric matrix."""
    arr = _require_symmetric(matrix)
    if arr.shape[0] == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(arr)).max())


def evolve_unitary(matrix: np.ndarray, time: Union[float, SupportsFloat]) -> ComplexMatrix:
    """Unitary exp(-i A t / ||A||) for a symmetric A, via its spectrum.

    The norm scaling matches the walk convention: a step of duration t
    evolves under A / ||A||, so spectra of different graphs live on a common
    [-1, 1] scale. A zero matrix (no edges, no loops) has no dynamics and
    yields the identity.
    """
    arr = _require_symmetric(matrix)
    norm = float(np.abs(np.linalg.eigvalsh(arr)).max()) if arr.size else 0.0
    if norm == 0.0:
        return np.eye(arr.shape[0], dtype=np.complex128)
    eigenvalues, vectors = np.linalg.eigh(arr)
    phases = np.exp(-1j * eigenvalues * (float(time) / norm))
    return (vectors * phases) @ vectors.conj().T


def phase_distance(u: ComplexMatrix, v: ComplexMatrix) -> float:
    """Global-phase-invariant distance 1 - |tr(U^dag V)| / dim.

    Zero exactly when U and V agree up to a global phase; for unitaries it is
    bounded by [0, 1] up to rounding. Raises ``ValueError`` on shape mismatch.
    """
    a = np.asarray(u)
    b = np.asarray(v)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    dim = a.shape[0]
    if dim == 0:
        return 0.0
    overlap = np.trace(a.conj().T @ b)
    return float(1.0 - abs(overlap) / dim)


def apply(u: ComplexMatrix, state: StateVector) -> StateVector:
    """Apply a unitary to a state vector, checking dimensions."""
    mat = np.asarray(u)
    vec = np.asarray(state, dtype=np.complex128)
    if vec.ndim != 1 or mat.ndim != 2 or mat.shape[1] != vec.shape[0]:
        raise ValueError(f"cannot apply shape {mat.shape} to state of length {vec.shape}")
    return mat @ vec
