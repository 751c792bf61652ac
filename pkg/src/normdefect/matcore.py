"""Dense complex matrix helpers and Hermitian spectral utilities.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Anything that
passes through :func:`as_matrix` is validated (2-D, finite) and returned as a
read-only array, so values can be shared freely between callers.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9
HERMITIAN_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible with an operation."""


class NotHermitianError(ValueError):
    pass


def as_matrix(M, square=False):
    """Return ``M`` as a validated, read-only complex128 array."""
    arr = np.array(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def adjoint(M):
    return as_matrix(np.conj(np.asarray(M)).T)


def multiply(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return as_matrix(A @ B)


def commutator(A):
    """Self-commutator ``A A* - A* A`` of a square matrix."""
    A = as_matrix(A, square=True)
    Ah = A.conj().T
    C = A @ Ah - Ah @ A
    # Hermitian by construction; drop rounding asymmetry
    return as_matrix(0.5 * (C + C.conj().T))


def spectral_norm(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _check_hermitian(H):
    H = as_matrix(H, square=True)
    scale = np.linalg.norm(H)
    if np.linalg.norm(H - H.conj().T) > HERMITIAN_TOL * scale:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return H


def hermitian_eigenvalues(H):
    """Ascending real eigenvalues of a Hermitian matrix."""
    H = _check_hermitian(H)
    # symmetrize so LAPACK sees exactly Hermitian input
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))


@dataclass(frozen=True)
class Inertia:
    n_plus: int
    n_minus: int
    n_zero: int
    tolerance: float

    def __post_init__(self):
        if min(self.n_plus, self.n_minus, self.n_zero) < 0:
            raise ValueError("inertia counts must be nonnegative")

    @property
    def dim(self):
        return self.n_plus + self.n_minus + self.n_zero

    def counts(self):
        return (self.n_plus, self.n_minus, self.n_zero)


def zero_threshold(H, tol=DEFAULT_TOL):
    """Absolute eigenvalue cut-off ``tol * max(1, ||H||_2)``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return tol * max(1.0, spectral_norm(H))


def inertia(H, tol=DEFAULT_TOL):
    """Count eigenvalues of ``H`` above, below and within the zero threshold.

    ``tol`` is relative: eigenvalues with magnitude at most
    ``tol * max(1, ||H||_2)`` count as zero.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    ev = hermitian_eigenvalues(H)
    thr = zero_threshold(H, tol)
    n_plus = int(np.sum(ev > thr))
    n_minus = int(np.sum(ev < -thr))
    return Inertia(n_plus, n_minus, len(ev) - n_plus - n_minus, thr)


def numeric_rank(M, tol=DEFAULT_TOL):
    """Number of singular values above ``tol`` times the largest one."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    M = as_matrix(M)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def frobenius(M):
    return float(np.linalg.norm(np.asarray(M)))


def random_unitary(n, rng):
    """Haar-distributed unitary via QR with phase correction."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
