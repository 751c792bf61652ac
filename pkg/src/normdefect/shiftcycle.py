"""Cyclic weighted shifts and the normal-defect-one characterization.

A cyclic weighted shift has weights a_1..a_{n-1} on the superdiagonal and
a_n in the bottom-left corner.  Its self-commutator is diagonal with entries
|a_k|^2 - |a_{k-1}|^2 (indices mod n), so everything here reduces to the
pattern of weight magnitudes.  Indices in the public data are 1-based.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .defect import CompletionResult, epsilon, make_completion
from .matcore import DEFAULT_TOL, as_matrix

NOT_TWO_LEVELS = "not-two-levels"
NOT_CONTIGUOUS = "not-contiguous"
J_TOO_LARGE = "j-too-large"
NORMAL_MATRIX = "normal-matrix"
OK = "ok"


@dataclass(frozen=True)
class ShiftMatrix:
    weights: tuple

    def __post_init__(self):
        if len(self.weights) < 2:
            raise ValueError("a cyclic shift needs at least two weights")

    @property
    def n(self):
        return len(self.weights)

    @property
    def matrix(self):
        return shift_matrix(self.weights)

    def weight(self, k):
        """a_k for any integer k, read modulo n (1-based)."""
        return self.weights[(k - 1) % self.n]


def shift_matrix(weights):
    w = np.asarray(weights, dtype=np.complex128)
    n = len(w)
    A = np.zeros((n, n), dtype=np.complex128)
    A[np.arange(n - 1), np.arange(1, n)] = w[:-1]
    A[n - 1, 0] = w[-1]
    return as_matrix(A)


def detect_shift(A, tol=0.0):
    """ShiftMatrix if ``A`` has the cyclic-shift sparsity pattern, else None."""
    A = np.asarray(A)
    n = A.shape[0]
    if A.ndim != 2 or A.shape != (n, n) or n < 2:
        return None
    rows = list(range(n))
    cols = [(i + 1) % n for i in rows]
    w = A[rows, cols].copy()
    rest = np.array(A, dtype=np.complex128)
    rest[rows, cols] = 0
    if np.max(np.abs(rest)) > tol:
        return None
    return ShiftMatrix(tuple(complex(x) for x in w))


def _as_shift(A):
    if isinstance(A, ShiftMatrix):
        return A
    if isinstance(A, (tuple, list)) and np.ndim(A) == 1:
        return ShiftMatrix(tuple(complex(x) for x in A))
    s = detect_shift(A)
    if s is None:
        raise ValueError("matrix is not a cyclic weighted shift")
    return s


@dataclass(frozen=True)
class LevelSetStructure:
    alpha: float
    beta_mag: float
    a_beta: frozenset
    contiguous: bool
    i: int
    j: int


@dataclass(frozen=True)
class Prop1Verdict:
    holds: bool
    structure: Optional[LevelSetStructure]
    reason: str


def _cluster(mags, tol):
    """Group magnitudes that agree within ``tol * max(1, max|a|)``."""
    h = tol * max(1.0, float(np.max(mags)))
    order = np.argsort(mags)
    groups = [[order[0]]]
    for k in order[1:]:
        if mags[k] - mags[groups[-1][-1]] <= h:
            groups[-1].append(k)
        else:
            groups.append([k])
    levels = []
    for g in groups:
        v = float(np.mean(mags[g]))
        levels.append((0.0 if v <= h else v, g))
    return levels


def _circular_run(members, n):
    """(start, length) of a single circular run of 1-based indices, or None."""
    s = set(members)
    starts = [k for k in s if ((k - 2) % n) + 1 not in s]
    if len(starts) != 1:
        return None
    return starts[0], len(s)


def level_sets(A, tol=DEFAULT_TOL):
    """Two-level magnitude structure of the weights, or a failure reason string."""
    S = _as_shift(A)
    mags = np.abs(np.asarray(S.weights))
    levels = _cluster(mags, tol)
    if len(levels) == 1:
        return NORMAL_MATRIX
    if len(levels) > 2:
        return NOT_TWO_LEVELS
    (beta, low), (alpha, _) = levels
    a_beta = frozenset(int(k) + 1 for k in low)
    run = _circular_run(a_beta, S.n)
    if run is None:
        return LevelSetStructure(alpha, beta, a_beta, False, 0, 0)
    return LevelSetStructure(alpha, beta, a_beta, True, run[0], run[1])


def prop1_check(A, tol=DEFAULT_TOL):
    """Decide whether nd(A) = epsilon(A) = 1 for a cyclic shift with n >= 4."""
    S = _as_shift(A)
    if S.n < 4:
        raise ValueError("the characterization needs n >= 4")
    ls = level_sets(S, tol)
    if isinstance(ls, str):
        return Prop1Verdict(False, None, ls)
    if not ls.contiguous:
        return Prop1Verdict(False, ls, NOT_CONTIGUOUS)
    jmax = 2 if ls.beta_mag != 0 else S.n - 1
    if not 1 <= ls.j <= jmax:
        return Prop1Verdict(False, ls, J_TOO_LARGE)
    return Prop1Verdict(True, ls, OK)


def certificate_vectors(A, structure):
    """x = s e_{i+j}, y = s e_i with s = sqrt(alpha^2 - beta^2)."""
    S = _as_shift(A)
    n = S.n
    s = np.sqrt(structure.alpha**2 - structure.beta_mag**2)
    x = np.zeros(n, dtype=np.complex128)
    y = np.zeros(n, dtype=np.complex128)
    x[(structure.i + structure.j - 1) % n] = s
    y[(structure.i - 1) % n] = s
    return x, y


def prop1_completion(A, verdict=None, tol=DEFAULT_TOL):
    """(n+1)-size normal completion [[A, y'], [x'*, z]] when the verdict holds.

    With beta = 0 this is [[A, y], [x*, 0]].  For beta != 0 the off-diagonal
    condition A x' + conj(z) y' = A* y' + z x' also has to hold:
    j = 1 needs z = -conj(a_i); j = 2 needs x' = x * conj(a_i) / a_{i+1}.
    Both reduce to the plain form when the weights are real and equal.
    """
    S = _as_shift(A)
    if verdict is None:
        verdict = prop1_check(S, tol)
    if not verdict.holds:
        raise ValueError(f"characterization does not hold ({verdict.reason})")
    st = verdict.structure
    x, y = certificate_vectors(S, st)
    z = 0j
    if st.beta_mag != 0:
        ai = S.weight(st.i)
        if st.j == 1:
            z = -np.conj(ai)
        else:
            x = x * (np.conj(ai) / S.weight(st.i + 1))
    n = S.n
    M = np.zeros((n + 1, n + 1), dtype=np.complex128)
    M[:n, :n] = S.matrix
    M[:n, n] = y
    M[n, :n] = x.conj()
    M[n, n] = z
    return make_completion(M, 1, minimal=True, note="nd = epsilon = 1 completion")


def certificate_rank(A, structure, tol=DEFAULT_TOL):
    """Rank of [x | y | Ax | A*y]; at most 3 whenever the characterization holds."""
    S = _as_shift(A)
    M = np.asarray(S.matrix)
    x, y = certificate_vectors(S, structure)
    cols = np.column_stack([x, y, M @ x, M.conj().T @ y])
    sv = np.linalg.svd(cols, compute_uv=False)
    return int(np.sum(sv > tol * max(sv[0], 1e-300)))


def nd_exceeds_one_certificate(A, tol=DEFAULT_TOL):
    """True when epsilon(A) = 1 but the characterization fails, so nd(A) >= 2."""
    S = _as_shift(A)
    if S.n < 4:
        raise ValueError("the characterization needs n >= 4")
    return epsilon(S.matrix, tol) == 1 and not prop1_check(S, tol).holds
