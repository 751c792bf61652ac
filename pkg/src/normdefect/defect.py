"""Normal-defect bounds, normality checks and generic completions."""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .matcore import (
    DEFAULT_TOL,
    DimensionError,
    Inertia,
    as_matrix,
    commutator,
    inertia,
    numeric_rank,
    spectral_norm,
)


@dataclass(frozen=True)
class DefectBounds:
    lower: int
    upper: int
    inertia: Inertia

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def exact(self):
        return self.lower == self.upper


@dataclass(frozen=True)
class CompletionResult:
    """A normal completion ``[[A, V], [W, Z]]`` of some square ``A``.

    ``defect`` is the number of added rows/columns.  Whether it is the
    normal defect or only an upper bound on it depends on the producer;
    ``minimal`` records what the producer can certify.
    """

    a_ext: np.ndarray
    defect: int
    residual: float
    case: Any = None
    blocks: Any = None
    minimal: bool = False
    note: str = ""

    @property
    def size(self):
        return self.a_ext.shape[0]

    @property
    def n(self):
        return self.size - self.defect

    @property
    def leading(self):
        return self.a_ext[: self.n, : self.n]


def make_completion(a_ext, defect, **kwargs):
    a_ext = as_matrix(a_ext, square=True)
    return CompletionResult(a_ext, int(defect), normality_residual(a_ext), **kwargs)


def epsilon(A, tol=DEFAULT_TOL):
    """max(i_+, i_-) of the self-commutator of ``A``."""
    I = inertia(commutator(A), tol)
    return max(I.n_plus, I.n_minus)


def defect_bounds(A, tol=DEFAULT_TOL):
    """Lower bound from the commutator inertia, upper from rank(||A||^2 I - A*A)."""
    A = as_matrix(A, square=True)
    I = inertia(commutator(A), tol)
    norm2 = spectral_norm(A) ** 2
    G = norm2 * np.eye(A.shape[0]) - A.conj().T @ A
    upper = numeric_rank(G, tol)
    return DefectBounds(max(I.n_plus, I.n_minus), upper, I)


def normality_residual(A):
    """||A A* - A* A||_F / max(1, ||A||_F^2)."""
    A = as_matrix(A, square=True)
    return float(np.linalg.norm(commutator(A)) / max(1.0, np.linalg.norm(A) ** 2))


def is_normal(A, tol=DEFAULT_TOL):
    return normality_residual(A) <= tol


def is_leading_principal_submatrix(A, B, tol=DEFAULT_TOL):
    A = as_matrix(A)
    B = as_matrix(B)
    r, c = A.shape
    if B.shape[0] < r or B.shape[1] < c:
        raise DimensionError(f"{B.shape} matrix cannot contain a {A.shape} block")
    return bool(np.max(np.abs(B[:r, :c] - A)) <= tol)


def assemble(A, V, W, Z):
    """Block matrix ``[[A, V], [W, Z]]``."""
    A, V, W, Z = (np.asarray(X, dtype=np.complex128) for X in (A, V, W, Z))
    n, k = A.shape[0], Z.shape[0]
    if A.shape != (n, n) or V.shape != (n, k) or W.shape != (k, n) or Z.shape != (k, k):
        raise DimensionError(
            f"blocks not conformable: A{A.shape} V{V.shape} W{W.shape} Z{Z.shape}"
        )
    return as_matrix(np.block([[A, V], [W, Z]]))


def split_blocks(a_ext, n):
    M = np.asarray(a_ext)
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def trivial_completion(A):
    """The 2n x 2n normal matrix ``[[A, A*], [A*, A]]``."""
    A = as_matrix(A, square=True)
    Ah = A.conj().T
    n = A.shape[0]
    return make_completion(np.block([[A, Ah], [Ah, A]]), n, note="trivial [[A, A*], [A*, A]]")


def dilation_completion(A, tol=DEFAULT_TOL):
    """Normal completion of size n + rank(||A||^2 I - A*A).

    Built as ``||A||`` times the minimal unitary dilation of the contraction
    ``A / ||A||``.  Singular values within ``tol`` (relative) of the largest
    are treated as equal to it, matching :func:`defect_bounds`.
    """
    A = as_matrix(A, square=True)
    U, s, Vh = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0.0:
        return make_completion(A, 0, note="zero matrix is normal")
    gaps = s[0] ** 2 - s**2
    keep = gaps > tol * gaps.max() if gaps.max() > 0 else np.zeros_like(s, dtype=bool)
    d = np.sqrt(gaps[keep])
    V = U[:, keep] * d
    W = d[:, None] * Vh[keep, :]
    Z = -np.diag(s[keep])
    return make_completion(assemble(A, V, W, Z), int(keep.sum()), note="scaled unitary dilation")
