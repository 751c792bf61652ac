"""4x4 superdiagonal matrices: case classification and minimal normal completions.

A matrix of the form

    [[0, a, 0, 0],
     [0, 0, b, 0],
     [0, 0, 0, c],
     [0, 0, 0, 0]]

has normal defect equal to ``epsilon(A)``.  This module classifies
``(a, b, c)`` into the magnitude regions that determine ``epsilon`` and builds
an explicit completion of that size for each region.  All constructors work
on the phase-reduced (real, nonnegative) triple; :func:`minimal_completion`
handles the phases.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .defect import CompletionResult, assemble, make_completion
from .matcore import DEFAULT_TOL, as_matrix


class CaseMismatchError(ValueError):
    """A constructor was called on a triple outside its magnitude region."""


class Variant(str, enum.Enum):
    ZERO = "0"
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"
    V = "v"
    VI = "vi"
    VIIA = "vii.a"
    VIIB = "vii.b"
    EPS3_ASC = "eps3-asc"
    EPS3_DESC = "eps3-desc"


_EPSILON = {
    Variant.ZERO: 0,
    Variant.I: 1,
    Variant.II: 1,
    Variant.III: 1,
    Variant.IV: 1,
    Variant.V: 2,
    Variant.VI: 2,
    Variant.VIIA: 2,
    Variant.VIIB: 2,
    Variant.EPS3_ASC: 3,
    Variant.EPS3_DESC: 3,
}


@dataclass(frozen=True)
class SuperdiagCase:
    """Classification result.

    ``rotation`` is nonzero only for the two eps = 2 regions with exactly one
    of a, c zero and b strictly below the other nonzero entry.  Those
    matrices are a cyclic relabelling of a case (vi) matrix: +1 means the
    zero row/column moves from the front to the back, -1 the reverse.
    """

    epsilon: int
    variant: Variant
    rotation: int = 0

    def __post_init__(self):
        if _EPSILON[self.variant] != self.epsilon:
            raise ValueError(f"variant {self.variant.value} has epsilon {_EPSILON[self.variant]}")

    @classmethod
    def of(cls, variant, rotation=0):
        return cls(_EPSILON[variant], variant, rotation)


@dataclass(frozen=True)
class SuperdiagParams:
    a: complex
    b: complex
    c: complex
    reduced_a: float
    reduced_b: float
    reduced_c: float
    phase_unitary: np.ndarray

    @property
    def reduced(self):
        return (self.reduced_a, self.reduced_b, self.reduced_c)

    @property
    def matrix(self):
        return superdiag_matrix(self.a, self.b, self.c)


@dataclass(frozen=True)
class ExtensionBlocks:
    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    beta: float = 0.0

    @property
    def k(self):
        return self.Z.shape[0]


def superdiag_matrix(*weights):
    """Square matrix with ``weights`` on the superdiagonal and zeros elsewhere."""
    n = len(weights) + 1
    A = np.zeros((n, n), dtype=np.complex128)
    A[np.arange(n - 1), np.arange(1, n)] = weights
    return as_matrix(A)


def superdiag_weights(A, tol=0.0):
    """Superdiagonal of ``A`` if every other entry is within ``tol`` of zero, else None."""
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n) or n < 2:
        return None
    w = A[np.arange(n - 1), np.arange(1, n)].copy()
    rest = A.copy()
    rest[np.arange(n - 1), np.arange(1, n)] = 0
    if np.max(np.abs(rest)) > tol:
        return None
    return tuple(complex(x) for x in w)


def _unit(w):
    w = complex(w)
    m = max(abs(w.real), abs(w.imag))
    if m == 0:
        return 1.0
    w = w / m  # rescale first so subnormal inputs keep full precision
    return w / abs(w)


def phase_unitary(weights):
    """Diagonal unitary U with U A U* = superdiag(|w_1|, ..., |w_m|)."""
    # products of unit phases rather than exp(-i*angle) so real signs stay exact
    ph = np.array([_unit(w) for w in weights], dtype=np.complex128)
    tail = np.concatenate([np.cumprod(ph[::-1].conj())[::-1], [1.0]])
    return np.diag(tail)


def phase_reduce(a, b, c):
    U = phase_unitary((a, b, c))
    return SuperdiagParams(
        complex(a), complex(b), complex(c), abs(a), abs(b), abs(c), as_matrix(U)
    )


def _params(p):
    if isinstance(p, SuperdiagParams):
        return p
    return phase_reduce(*p)


def classify(params, tol=DEFAULT_TOL):
    """Assign the reduced triple to exactly one magnitude region."""
    a, b, c = (float(x) for x in _params(params).reduced)
    h = tol * max(1.0, a, b, c)

    def eq(x, y):
        return bool(abs(x - y) <= h)

    za, zb, zc = eq(a, 0), eq(b, 0), eq(c, 0)
    nonzero = 3 - int(za) - int(zb) - int(zc)
    if nonzero == 0:
        return SuperdiagCase.of(Variant.ZERO)
    if nonzero == 1:
        return SuperdiagCase.of(Variant.IV)
    if not za and not zc and eq(a, b) and eq(b, c):
        return SuperdiagCase.of(Variant.I)
    if za and eq(b, c):
        return SuperdiagCase.of(Variant.II)
    if zc and eq(a, b):
        return SuperdiagCase.of(Variant.III)
    ge_a, ge_c = b > a or eq(a, b), b > c or eq(b, c)
    le_a, le_c = b < a or eq(a, b), b < c or eq(b, c)
    if za or zc:
        # exactly one of a, c is zero and b is nonzero here
        if ge_a and ge_c:
            return SuperdiagCase.of(Variant.VI)
        return SuperdiagCase.of(Variant.VI, rotation=1 if za else -1)
    if ge_a and ge_c:
        return SuperdiagCase.of(Variant.V)
    if le_a and le_c:
        # boundary of the dichotomy (within tol) goes to vii.b
        if c * c * (2 * a * a - b * b) - a**4 > tol * max(a, c) ** 4:
            return SuperdiagCase.of(Variant.VIIA)
        return SuperdiagCase.of(Variant.VIIB)
    if a < b < c:
        return SuperdiagCase.of(Variant.EPS3_ASC)
    return SuperdiagCase.of(Variant.EPS3_DESC)


def _sqrt(x):
    # clamps roundoff-level negatives produced by near-equal magnitudes
    return np.sqrt(max(x, 0.0))


def _result(a, b, c, V, W, Z, case, beta=0.0):
    A = superdiag_matrix(a, b, c)
    blocks = ExtensionBlocks(as_matrix(V), as_matrix(W), as_matrix(Z), beta)
    return make_completion(assemble(A, V, W, Z), Z.shape[0], case=case, blocks=blocks, minimal=True)


def complete_eps1(params, case=None, tol=DEFAULT_TOL):
    """5x5 completions for the epsilon = 1 regions (i)-(iv).

    The extension closes the nonzero part of the superdiagonal into a
    weighted cycle whose new weights d, f have the common magnitude.
    """
    p = _params(params)
    a, b, c = p.reduced
    actual = classify(p, tol)
    if case is None:
        case = actual
    if case.variant != actual.variant or case.epsilon != 1:
        raise CaseMismatchError(f"triple {p.reduced} is case {actual.variant.value}, not an eps=1 case")
    M = np.zeros((5, 5))
    M[0, 1], M[1, 2], M[2, 3] = a, b, c
    if case.variant is Variant.I:
        M[3, 4] = M[4, 0] = b
    elif case.variant is Variant.II:
        M[3, 4] = M[4, 1] = b
    elif case.variant is Variant.III:
        M[2, 4] = M[4, 0] = b
    else:
        h = tol * max(1.0, a, b, c)
        if a > h:
            M[1, 4] = M[4, 0] = a
        elif b > h:
            M[2, 4] = M[4, 1] = b
        else:
            M[3, 4] = M[4, 2] = c
    return _result(a, b, c, M[:4, 4:], M[4:, :4], M[4:, 4:], case)


def _v_vi_blocks(a, b, c):
    D = (b * c) ** 2 + (b * a) ** 2 - (a * c) ** 2
    if not D > 0:
        raise CaseMismatchError(f"denominator (bc)^2 + (ba)^2 - (ac)^2 = {D} is not positive")
    ba, bc = b * b - a * a, b * b - c * c
    V = np.zeros((4, 2))
    W = np.zeros((2, 4))
    Z = np.zeros((2, 2))
    rD = np.sqrt(D)
    V[0, 1] = -a * _sqrt(ba * bc / D)
    V[2, 0] = -_sqrt(bc)
    V[3, 1] = -c * b * b / rD
    W[0, 1] = _sqrt(ba)
    W[1, 0] = a * b * b / rD
    W[1, 3] = c * _sqrt(ba * bc / D)
    Z[0, 1] = a * a * _sqrt(bc / D)
    Z[1, 0] = c * c * _sqrt(ba / D)
    return V, W, Z


def _rotate(res, perm):
    """Relabel the first four indices of a completion by ``perm``."""
    M = np.asarray(res.a_ext)
    order = list(perm) + list(range(4, M.shape[0]))
    return M[np.ix_(order, order)]


def complete_case_v_vi(params, tol=DEFAULT_TOL):
    """6x6 completion for regions (v) and (vi), b the largest magnitude."""
    p = _params(params)
    case = classify(p, tol)
    if case.variant not in (Variant.V, Variant.VI):
        raise CaseMismatchError(f"triple {p.reduced} is case {case.variant.value}, not (v)/(vi)")
    a, b, c = p.reduced
    if case.rotation == 0:
        return _result(a, b, c, *_v_vi_blocks(a, b, c), case)
    # (0, b, c) with b < c is (b, c, 0) with the zero index moved to the front;
    # (a, b, 0) with b < a is (0, a, b) with the zero index moved to the back.
    if case.rotation == 1:
        inner = _result(b, c, 0.0, *_v_vi_blocks(b, c, 0.0), case)
        M = _rotate(inner, [3, 0, 1, 2])
    else:
        inner = _result(0.0, a, b, *_v_vi_blocks(0.0, a, b), case)
        M = _rotate(inner, [1, 2, 3, 0])
    A = superdiag_matrix(a, b, c)
    blocks = ExtensionBlocks(as_matrix(M[:4, 4:]), as_matrix(M[4:, :4]), as_matrix(M[4:, 4:]))
    res = make_completion(M, 2, case=case, blocks=blocks, minimal=True)
    assert np.allclose(res.leading, A, atol=1e-12, rtol=0)
    return res


def _check_vii(a, b, c, tol):
    h = tol * max(1.0, a, b, c)
    if not (a > h and c > h and b <= a + h and b <= c + h):
        raise CaseMismatchError(f"triple {(a, b, c)} is outside region (vii)")


def viia_blocks(a, b, c):
    beta = 2 * (a * c) ** 2 - (b * c) ** 2 - a**4
    if not beta > 0:
        raise CaseMismatchError(f"beta = 2(ac)^2 - (bc)^2 - a^4 = {beta} <= 0; not case (vii.a)")
    ab, cb = a * a - b * b, c * c - b * b
    r = _sqrt(ab / cb) if cb > 0 else 0.0
    rb = np.sqrt(beta)
    V = np.zeros((4, 2))
    W = np.zeros((2, 4))
    Z = np.zeros((2, 2))
    V[0, 1] = a * (c * c - a * a) / rb
    V[1, 1] = c * _sqrt(ab * cb / beta)
    V[3, 0] = c
    W[0, 0] = -b * c / a
    W[0, 1] = b * (a * a - c * c) / a**2 * r
    W[0, 2] = c * (b * b - a * a) / a**2
    W[1, 0] = c * c * (b * b - a * a) / (a * rb)
    W[1, 1] = c * ab * (a * a - c * c) / a**2 * r / rb
    W[1, 2] = b * rb / a**2
    Z[0, 1] = b / a**2 * rb * r
    Z[1, 1] = (
        -c / (beta * a * a)
        * (a**6 + 3 * (a * b * c) ** 2 - c * c * b**4 - c * c * a**4 - 2 * b * b * a**4)
        * r
    )
    return V, W, Z, beta


def viib_blocks(a, b, c):
    beta = 2 * (a * c) ** 2 - (a * b) ** 2 - c**4
    if not beta > 0:
        raise CaseMismatchError(f"beta = 2(ac)^2 - (ab)^2 - c^4 = {beta} <= 0; not case (vii.b)")
    ab, cb = a * a - b * b, c * c - b * b
    r = _sqrt(cb / ab) if ab > 0 else 0.0
    rb = np.sqrt(beta)
    V = np.zeros((4, 2))
    W = np.zeros((2, 4))
    Z = np.zeros((2, 2))
    V[1, 0] = b * rb / c**2
    V[1, 1] = a * (b * b - c * c) / c**2
    V[2, 0] = a * cb * (c * c - a * a) / c**2 * r / rb
    V[2, 1] = b * (c * c - a * a) / c**2 * r
    V[3, 0] = a * a * (b * b - c * c) / (c * rb)
    V[3, 1] = -a * b / c
    W[0, 2] = a * _sqrt(ab * cb / beta)
    W[0, 3] = c * (a * a - c * c) / rb
    W[1, 0] = a
    Z[0, 0] = (
        -a / (beta * c * c)
        * (c**6 + 3 * (a * b * c) ** 2 - a * a * b**4 - a * a * c**4 - 2 * b * b * c**4)
        * r
    )
    Z[0, 1] = b / c**2 * rb * r
    return V, W, Z, beta


def complete_case_viia(params, tol=DEFAULT_TOL):
    """6x6 completion for region (vii) with c^2 > a^4 / (2a^2 - b^2)."""
    p = _params(params)
    a, b, c = p.reduced
    _check_vii(a, b, c, tol)
    V, W, Z, beta = viia_blocks(a, b, c)
    return _result(a, b, c, V, W, Z, SuperdiagCase.of(Variant.VIIA), beta)


def complete_case_viib(params, tol=DEFAULT_TOL):
    """6x6 completion for region (vii) with a^2 > c^4 / (2c^2 - b^2)."""
    p = _params(params)
    a, b, c = p.reduced
    _check_vii(a, b, c, tol)
    V, W, Z, beta = viib_blocks(a, b, c)
    return _result(a, b, c, V, W, Z, SuperdiagCase.of(Variant.VIIB), beta)


def _reversal(k):
    return np.fliplr(np.eye(k))


def duality_transform(blocks):
    """Map (vii.a) extension blocks to (vii.b) blocks of the mirrored triple.

    V -> J4 W^T J2,  W -> J2 V^T J4,  Z -> J2 Z^T J2 with J the reversal matrix.
    Applying it twice gives the original blocks back.
    """
    V, W, Z = (np.asarray(X) for X in (blocks.V, blocks.W, blocks.Z))
    n, k = V.shape
    if W.shape != (k, n) or Z.shape != (k, k):
        raise ValueError(f"blocks not conformable: V{V.shape} W{W.shape} Z{Z.shape}")
    Jn, Jk = _reversal(n), _reversal(k)
    return ExtensionBlocks(
        as_matrix(Jn @ W.T @ Jk), as_matrix(Jk @ V.T @ Jn), as_matrix(Jk @ Z.T @ Jk), blocks.beta
    )


def complete_eps3(params, tol=DEFAULT_TOL):
    """7x7 completions for strictly monotone magnitudes."""
    p = _params(params)
    a, b, c = p.reduced
    case = classify(p, tol)
    M = np.zeros((7, 7))
    M[0, 1], M[1, 2], M[2, 3] = a, b, c
    if case.variant is Variant.EPS3_ASC:
        ca, cb = np.sqrt(c * c - a * a), np.sqrt(c * c - b * b)
        M[0, 6] = -ca
        M[1, 4] = -cb
        M[3, 5] = c
        M[4, 1], M[4, 6] = ca, a
        M[5, 0] = c
        M[6, 2], M[6, 4] = cb, b
    elif case.variant is Variant.EPS3_DESC:
        ab, ac = np.sqrt(a * a - b * b), np.sqrt(a * a - c * c)
        M[1, 4] = -ab
        M[2, 5] = -ac
        M[3, 6] = a
        M[4, 3], M[4, 5] = ac, c
        M[5, 0] = a
        M[6, 2], M[6, 4] = ab, b
    else:
        raise CaseMismatchError(f"triple {p.reduced} is case {case.variant.value}, not strictly monotone")
    return _result(a, b, c, M[:4, 4:], M[4:, :4], M[4:, 4:], case)


def complete_reduced(params, tol=DEFAULT_TOL):
    """Dispatch the reduced triple to the constructor of its region."""
    p = _params(params)
    case = classify(p, tol)
    v = case.variant
    if v is Variant.ZERO:
        A = superdiag_matrix(*p.reduced)
        return make_completion(A, 0, case=case, minimal=True, note="zero matrix is normal")
    if case.epsilon == 1:
        return complete_eps1(p, case, tol)
    if v in (Variant.V, Variant.VI):
        return complete_case_v_vi(p, tol)
    if v is Variant.VIIA:
        return complete_case_viia(p, tol)
    if v is Variant.VIIB:
        return complete_case_viib(p, tol)
    return complete_eps3(p, tol)


def unreduce(result, U):
    """Conjugate a completion of U A U* by diag(U*, I) so it contains A."""
    M = np.asarray(result.a_ext)
    m = U.shape[0]
    S = np.eye(M.shape[0], dtype=np.complex128)
    S[:m, :m] = U
    out = S.conj().T @ M @ S
    # the phase unitary is diagonal with unit entries; purely real input stays real
    if np.all(np.isreal(U)):
        out = out.real.astype(np.complex128)
    return out


def minimal_completion(a, b, c, tol=DEFAULT_TOL):
    """Minimal normal completion of superdiag(a, b, c); its size is 4 + epsilon."""
    p = phase_reduce(a, b, c)
    res = complete_reduced(p, tol)
    M = unreduce(res, p.phase_unitary)
    return make_completion(M, res.defect, case=res.case, blocks=res.blocks, minimal=True, note=res.note)


def entry_identities(a, b, c):
    """Entrywise identities behind the normality of the (v)/(vi) completion.

    Returns the absolute difference of the two sides of each identity.
    """
    V, W, Z = _v_vi_blocks(a, b, c)
    v12, v31, v42 = V[0, 1], V[2, 0], V[3, 1]
    w12, w21, w24 = W[0, 1], W[1, 0], W[1, 3]
    z12, z21 = Z[0, 1], Z[1, 0]
    return {
        "(1,1)": abs(a * a + v12**2 - w21**2),
        "(1,5)": abs(a * w12 + v12 * z12 - w21 * z21),
        "(4,4)": abs(v42**2 - (c * c + w24**2)),
        "(4,5)": abs(v42 * z12 - (c * v31 + w24 * z21)),
        "(5,5)": abs(w12**2 + z12**2 - (v31**2 + z21**2)),
        "(6,6)": max(abs(w21**2 + w24**2 + z21**2 - b * b), abs(v12**2 + v42**2 + z12**2 - b * b)),
    }


FAMILY_TOL = 1e-8


@dataclass(frozen=True)
class FamilyResult:
    verified: bool
    residual: float
    completion: Optional[CompletionResult]
    note: str = ""


def family_matrix(n, a, b, c, family):
    if n < 4:
        raise ValueError("family matrices need n >= 4")
    m = n - 3
    if family == 1:
        w = [a] + [b] * m + [c]
    elif family == 2:
        w = [a, b] + [c] * m
    elif family == 3:
        w = [a] * m + [b, c]
    else:
        raise ValueError(f"unknown family {family}")
    return superdiag_matrix(*w)


def family_nxn_completion(n, a, b, c, family, tol=DEFAULT_TOL):
    """Best-effort (n+2)-size completion for the three repeated-entry families.

    The repeated entries form a chain with equal weights; the 4x4
    construction of the matching region is reused with that chain in place of
    the single edge it subdivides.  The result is checked numerically and
    returned only if its residual is at most 1e-8; no minimality is claimed.
    """
    ra, rb, rc = abs(a), abs(b), abs(c)
    h = tol * max(1.0, ra, rb, rc)
    if family == 1:
        ok = rb >= ra - h and rb >= rc - h
    elif family in (2, 3):
        ok = rb <= ra + h and rb <= rc + h
        ok = ok and (rc >= ra - h if family == 2 else ra >= rc - h)
    else:
        raise ValueError(f"unknown family {family}")
    if not ok:
        raise CaseMismatchError(f"({ra}, {rb}, {rc}) violates the family {family} conditions")

    A = family_matrix(n, a, b, c, family)
    weights = [A[i, i + 1] for i in range(n - 1)]
    U = phase_unitary(weights)
    try:
        if family == 1:
            V, W, Z = _v_vi_blocks(ra, rb, rc)
            idx = [0, 1, n - 2, n - 1]
        elif family == 2:
            V, W, Z, _ = viia_blocks(ra, rb, rc)
            idx = [0, 1, 2, n - 1]
        else:
            V, W, Z, _ = viib_blocks(ra, rb, rc)
            idx = [0, n - 3, n - 2, n - 1]
    except (CaseMismatchError, ZeroDivisionError, FloatingPointError) as exc:
        return FamilyResult(False, float("inf"), None, f"formulas not applicable: {exc}")

    k = Z.shape[0]
    Vn = np.zeros((n, k))
    Wn = np.zeros((k, n))
    Vn[idx, :] = V
    Wn[:, idx] = W
    reduced = np.abs(np.asarray(A))
    M = np.asarray(assemble(reduced, Vn, Wn, Z))
    S = np.eye(n + k, dtype=np.complex128)
    S[:n, :n] = U
    M = S.conj().T @ M @ S
    if not np.all(np.isfinite(M)):
        return FamilyResult(False, float("inf"), None, "non-finite entries")
    res = make_completion(M, k, note=f"family {family} chain construction")
    if res.residual > FAMILY_TOL:
        return FamilyResult(False, res.residual, None, "not verified: residual above 1e-8")
    return FamilyResult(True, res.residual, res, "verified numerically; minimality not claimed")
