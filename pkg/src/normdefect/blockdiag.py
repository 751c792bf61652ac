"""Block-diagonal matrices: when normal defects add up, and composing completions."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .defect import CompletionResult, defect_bounds, is_normal, make_completion
from .matcore import DEFAULT_TOL, Inertia, as_matrix, commutator, inertia
from .shiftcycle import detect_shift, prop1_check
from .superdiag4 import classify, phase_reduce, superdiag_weights


class UnderivableDefectError(ValueError):
    """No rule in the derivation policy gives the normal defect of a block."""


@dataclass(frozen=True)
class BlockList:
    blocks: tuple

    def __post_init__(self):
        for B in self.blocks:
            if B.ndim != 2 or B.shape[0] != B.shape[1]:
                raise ValueError(f"blocks must be square, got {B.shape}")

    @classmethod
    def of(cls, blocks):
        return cls(tuple(as_matrix(B, square=True) for B in blocks))

    @property
    def sizes(self):
        return tuple(B.shape[0] for B in self.blocks)


@dataclass(frozen=True)
class BlockInfo:
    epsilon: int
    nd_equals_eps_known: bool
    inertia: Inertia
    nd: Optional[int] = None
    source: str = ""


@dataclass(frozen=True)
class BlockVerdict:
    applies: bool
    per_block: tuple
    combined_nd: Optional[int] = None
    reason: str = ""


def _blocks(blocks):
    if isinstance(blocks, BlockList):
        return blocks
    return BlockList.of(blocks)


def direct_sum(blocks):
    bl = _blocks(blocks)
    n = sum(bl.sizes)
    M = np.zeros((n, n), dtype=np.complex128)
    off = 0
    for B in bl.blocks:
        m = B.shape[0]
        M[off:off + m, off:off + m] = B
        off += m
    return as_matrix(M)


def derive_nd(B, tol=DEFAULT_TOL):
    """(nd, source) for a block whose normal defect is known by a cited result.

    Normal blocks have nd 0; 2x2 and 3x3 blocks have nd = epsilon; 4x4
    superdiagonal blocks have nd = epsilon; cyclic shifts passing the
    nd = epsilon = 1 characterization have nd 1.  Anything else raises.
    """
    B = as_matrix(B, square=True)
    n = B.shape[0]
    if is_normal(B, tol):
        return 0, "normal"
    eps = defect_bounds(B, tol).lower
    if n <= 3:
        return eps, "size <= 3"
    w = superdiag_weights(B)
    if n == 4 and w is not None:
        return classify(phase_reduce(*w), tol).epsilon, "4x4 superdiagonal"
    s = detect_shift(B)
    if s is not None and n >= 4 and prop1_check(s, tol).holds:
        return 1, "cyclic shift with nd = epsilon = 1"
    bounds = defect_bounds(B, tol)
    if bounds.exact:
        return bounds.lower, "bounds coincide"
    raise UnderivableDefectError(f"cannot derive nd for this {n}x{n} block; supply it")


def prop_block_check(blocks, known_nd=None, tol=DEFAULT_TOL):
    """Decide whether nd(diag(A_i)) = sum nd(A_i) = epsilon(diag(A_i)).

    Holds exactly when every block has nd = epsilon and the commutator
    inertias lean the same way (all i_+ >= i_- or all i_+ <= i_-).
    """
    bl = _blocks(blocks)
    if known_nd is not None and len(known_nd) != len(bl.blocks):
        raise ValueError("known_nd must have one entry per block")
    infos = []
    for idx, B in enumerate(bl.blocks):
        I = inertia(commutator(B), tol)
        eps = max(I.n_plus, I.n_minus)
        given = None if known_nd is None else known_nd[idx]
        if given is not None:
            nd, src = int(given), "supplied"
        else:
            nd, src = derive_nd(B, tol)
        infos.append(BlockInfo(eps, nd == eps, I, nd, src))
    infos = tuple(infos)
    if not all(b.nd_equals_eps_known for b in infos):
        return BlockVerdict(False, infos, reason="some block has nd > epsilon")
    plus = all(b.inertia.n_plus >= b.inertia.n_minus for b in infos)
    minus = all(b.inertia.n_plus <= b.inertia.n_minus for b in infos)
    if not (plus or minus):
        return BlockVerdict(False, infos, reason="commutator inertias lean in different directions")
    return BlockVerdict(True, infos, sum(b.epsilon for b in infos), "ok")


def compose_completions(completions, tol=DEFAULT_TOL):
    """Normal completion of diag(A_i) from completions of each A_i.

    The direct sum of the A_ext's is conjugated by the permutation that moves
    all original rows (block order kept) ahead of all extension rows.  The
    resulting defect is sum k_i, an upper bound only.
    """
    completions = list(completions)
    if not completions:
        raise ValueError("need at least one completion")
    for c in completions:
        if c.residual > tol:
            raise ValueError(f"input completion is not normal (residual {c.residual:.3g})")
    big = direct_sum([c.a_ext for c in completions])
    head, tail, off = [], [], 0
    for c in completions:
        head.extend(range(off, off + c.n))
        tail.extend(range(off + c.n, off + c.size))
        off += c.size
    order = head + tail
    M = np.asarray(big)[np.ix_(order, order)]
    k = sum(c.defect for c in completions)
    return make_completion(M, k, note="composed block completion (upper bound)")
