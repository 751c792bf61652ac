"""Worked matrices and their known normal completions."""

import numpy as np

from .defect import is_leading_principal_submatrix, make_completion
from .matcore import as_matrix
from .shiftcycle import shift_matrix
from .superdiag4 import complete_eps3, superdiag_matrix

s2, s3, s7 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(7.0)


def example1():
    A = superdiag_matrix(1, 3, 2)
    ext = [
        [0, 1, 0, 0, 0, -2 / 41 * np.sqrt(410)],
        [0, 0, 3, 0, 0, 0],
        [0, 0, 0, 2, -np.sqrt(5), 0],
        [0, 0, 0, 0, 0, -18 / 41 * np.sqrt(41)],
        [0, 2 * s2, 0, 0, 0, np.sqrt(205) / 41],
        [9 / 41 * np.sqrt(41), 0, 0, 4 / 41 * np.sqrt(410), 8 / 41 * np.sqrt(82), 0],
    ]
    return A, as_matrix(ext)


def example2():
    return shift_matrix((-2, 1, -1, 1j, 2))


def example3_blocks():
    A1 = as_matrix([[0, 1, 0], [0, 0, 2], [0, 0, 0]])
    return [A1, as_matrix(np.asarray(A1).T)]


def example3():
    r37 = np.sqrt(3 / 7)
    ext = [
        [0, 1, 0, 0, 0, 0, 0, 0, -3 / s7],
        [0, 0, 2, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 2, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, -4 / s7],
        [0, 0, 0, 1, 0, 0, -s3, 0, 0],
        [0, 0, 0, 0, 2, 0, 0, 0, 0],
        [0, s3, 0, 0, 0, 0, 0, 0, r37],
        [4 / s7, 0, 0, 3 / s7, 0, 0, r37, 0, 0],
        [0, 0, 0, 0, 0, 2, 0, 0, 0],
    ]
    return example3_blocks(), as_matrix(ext)


def example4():
    """4x4 shift (2, 1, 1, 1), its 6x6 completion, the 5x5 truncation and its 8x8 completion."""
    A = shift_matrix((2, 1, 1, 1))
    ext6 = [
        [0, 2, 0, 0, 0, 0],
        [0, 0, 1, 0, s3, 0],
        [0, 0, 0, 1, 0, 0],
        [1, 0, 0, 0, 0, -s3],
        [0, 0, 0, s3, 0, 0],
        [s3, 0, 0, 0, 0, 1],
    ]
    At = superdiag_matrix(2, 1, 1, 1)
    ext8 = [
        [0, 2, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, s3, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, -s3, 0],
        [0, 0, 0, 0, 0, 0, 0, 2],
        [0, 0, 0, s3, 0, 0, 0, 0],
        [0, 0, 0, 0, s3, 0, 1, 0],
        [2, 0, 0, 0, 0, 0, 0, 0],
    ]
    return A, as_matrix(ext6), At, as_matrix(ext8)


def sqrt2shift():
    A = shift_matrix((1, 1, 1, s2))
    ext = [
        [0, 1, 0, 0, 0, -1],
        [0, 0, 1, 0, 1, 0],
        [0, 0, 0, 1, 0, 0],
        [s2, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 0, 1],
    ]
    return A, as_matrix(ext)


def eq8_unknown():
    return superdiag_matrix(2, 1, 1, 1)


def blockdiag_candidate():
    A = np.zeros((6, 6))
    A[0, 1] = 1
    A[2, 3] = A[3, 4] = A[4, 5] = 1
    A[5, 2] = 2
    return as_matrix(A)


def eps3(a, b, c):
    res = complete_eps3((a, b, c))
    return superdiag_matrix(a, b, c), res.a_ext


def _entries():
    A1, E1 = example1()
    blocks3, E3 = example3()
    from .blockdiag import direct_sum

    A4, E6, At, E8 = example4()
    S, ES = sqrt2shift()
    Aa, Ea = eps3(1, 2, 3)
    Ad, Ed = eps3(3, 2, 1)
    return {
        "example1": {"matrix": A1, "completion": E1},
        "example2": {"matrix": example2()},
        "example3": {"matrix": direct_sum(blocks3), "completion": E3,
                     "blocks": blocks3},
        "example4": {"matrix": A4, "completion": E6, "truncated": At,
                     "truncated_completion": E8},
        "sqrt2shift": {"matrix": S, "completion": ES},
        "eq8-unknown": {"matrix": eq8_unknown(), "completion": E8},
        "blockdiag-candidate": {"matrix": blockdiag_candidate()},
        "eps3-asc": {"matrix": Aa, "completion": Ea},
        "eps3-desc": {"matrix": Ad, "completion": Ed},
    }


FIXTURE_NAMES = (
    "example1",
    "example2",
    "example3",
    "example4",
    "sqrt2shift",
    "eq8-unknown",
    "blockdiag-candidate",
    "eps3-asc",
    "eps3-desc",
)


def get_fixture(name):
    """Dict of named matrices for a registered fixture."""
    entries = _entries()
    if name not in entries:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    return entries[name]


def known_completions(A, tol=1e-12):
    """Registered completions whose leading block equals ``A``."""
    A = np.asarray(A)
    found = []
    for name, fx in _entries().items():
        pairs = [(fx["matrix"], fx.get("completion"))]
        if "truncated" in fx:
            pairs.append((fx["truncated"], fx["truncated_completion"]))
        for M, E in pairs:
            if E is None or M.shape != A.shape:
                continue
            if is_leading_principal_submatrix(A, E, tol):
                found.append(make_completion(E, E.shape[0] - A.shape[0], note=f"known completion ({name})"))
    return found
