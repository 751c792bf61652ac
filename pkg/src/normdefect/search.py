"""Numerical search for normal completions of a requested size.

For fixed A and extension size k the unknowns are the entries of V, W, Z in
A_ext = [[A, V], [W, Z]], and normality of A_ext is the polynomial system
A_ext A_ext* = A_ext* A_ext.  We minimise ||[A_ext, A_ext*]||_F^2 with a
Levenberg-Marquardt solver from several random starts.  A failed search is
inconclusive: it never shows that no completion of that size exists.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .defect import (
    CompletionResult,
    DimensionError,
    assemble,
    defect_bounds,
    dilation_completion,
    is_leading_principal_submatrix,
    is_normal,
    make_completion,
    normality_residual,
)
from .matcore import DEFAULT_TOL, as_matrix, spectral_norm
from .shiftcycle import detect_shift, nd_exceeds_one_certificate, prop1_check, prop1_completion
from .superdiag4 import minimal_completion, superdiag_weights

NOT_FOUND = "no completion found within budget"


@dataclass(frozen=True)
class SearchConfig:
    k: int
    restarts: int = 64
    max_iters: int = 400
    seed: int = 0
    success_tol: float = 1e-8
    init_scale: Optional[float] = None
    real_only: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.success_tol > 0:
            raise ValueError("success_tol must be positive")
        if self.k < 0:
            raise ValueError("k must be nonnegative")


@dataclass(frozen=True)
class SearchOutcome:
    """Result of :func:`search_completion`.

    ``score`` is ||[A_ext, A_ext*]||_F / max(1, ||A||_F^2), normalised by the
    *input* A.  Success is judged on it rather than on ``best.residual``
    because letting the extension entries grow without bound drives the
    A_ext-normalised residual towards zero without approaching normality.
    Since ||A_ext||_F >= ||A||_F, found implies best.residual <= success_tol.
    """

    found: bool
    best: CompletionResult
    iterations_used: int
    restarts_used: int
    score: float = 0.0
    message: str = ""


def _check_blocks(A, V, W, Z):
    return assemble(A, V, W, Z)


def residual_objective(A, V, W, Z):
    """||[A_ext, A_ext*]||_F^2 for A_ext = [[A, V], [W, Z]]."""
    M = np.asarray(_check_blocks(A, V, W, Z))
    Mh = M.conj().T
    C = M @ Mh - Mh @ M
    return float(np.sum(np.abs(C) ** 2))


def residual_gradient(A, V, W, Z):
    """Gradient of :func:`residual_objective` with respect to V, W, Z.

    Each block is returned as d f / d Re + 1j * d f / d Im, which for this
    objective is 4 [C, A_ext] restricted to the block, C the commutator.
    """
    M = np.asarray(_check_blocks(A, V, W, Z))
    n = np.asarray(A).shape[0]
    Mh = M.conj().T
    C = M @ Mh - Mh @ M
    G = 4 * (C @ M - M @ C)
    return G[:n, n:], G[n:, :n], G[n:, n:]


class _Problem:
    """Least-squares residual r(x) = [Re C, Im C] over the free entries."""

    def __init__(self, A, k, real_only):
        self.A = np.asarray(A, dtype=np.complex128)
        self.n = self.A.shape[0]
        self.k = k
        self.N = self.n + k
        self.real_only = real_only
        mask = np.zeros((self.N, self.N), dtype=bool)
        mask[:, self.n:] = True
        mask[self.n:, :] = True
        self.rows, self.cols = np.nonzero(mask)
        self.m = len(self.rows)
        self.nvar = self.m if real_only else 2 * self.m

    def matrix(self, x):
        M = np.zeros((self.N, self.N), dtype=np.complex128)
        M[: self.n, : self.n] = self.A
        vals = x[: self.m] if self.real_only else x[: self.m] + 1j * x[self.m:]
        M[self.rows, self.cols] = vals
        return M

    def residual(self, x):
        M = self.matrix(x)
        Mh = M.conj().T
        C = M @ Mh - Mh @ M
        return np.concatenate([C.real.ravel(), C.imag.ravel()])

    def jacobian(self, x):
        M = self.matrix(x)
        N = self.N
        J = np.zeros((2 * N * N, self.nvar))
        for t, (p, q) in enumerate(zip(self.rows, self.cols)):
            # dC for a real unit perturbation of entry (p, q)
            dC = np.zeros((N, N), dtype=np.complex128)
            dC[p, :] += M[:, q].conj()
            dC[:, p] += M[:, q]
            dC[q, :] -= M[p, :]
            dC[:, q] -= M[p, :].conj()
            J[:, t] = np.concatenate([dC.real.ravel(), dC.imag.ravel()])
            if not self.real_only:
                dI = np.zeros((N, N), dtype=np.complex128)
                dI[p, :] += 1j * M[:, q].conj()
                dI[:, p] -= 1j * M[:, q]
                dI[q, :] += 1j * M[p, :]
                dI[:, q] -= 1j * M[p, :].conj()
                J[:, self.m + t] = np.concatenate([dI.real.ravel(), dI.imag.ravel()])
        return J


def _run_restart(problem, config, scale, r):
    rng = np.random.default_rng(config.seed ^ r)
    x0 = scale * rng.standard_normal(problem.nvar)
    sol = least_squares(
        problem.residual,
        x0,
        jac=problem.jacobian,
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=config.max_iters,
    )
    M = problem.matrix(sol.x)
    return r, input_scaled_residual(problem.A, M), M, int(sol.nfev)


def input_scaled_residual(A, M):
    """||[M, M*]||_F / max(1, ||A||_F^2)."""
    Mh = M.conj().T
    return float(np.linalg.norm(M @ Mh - Mh @ M) / max(1.0, np.linalg.norm(A) ** 2))


def search_completion(A, config):
    """Multi-restart local search for an (n+k)-size normal completion of A.

    Deterministic for a given config: restart r starts from a Gaussian point
    drawn with seed ``config.seed ^ r``.  The search stops at the first
    restart (in index order) that reaches ``success_tol``.
    """
    A = as_matrix(A, square=True)
    n = A.shape[0]
    k = config.k
    if k == 0:
        if is_normal(A):
            return SearchOutcome(True, make_completion(A, 0), 0, 0, 0.0, "input is normal")
        raise ValueError("k = 0 is only meaningful for a normal matrix")
    if input_scaled_residual(A, A) <= config.success_tol:
        zero = assemble(A, np.zeros((n, k)), np.zeros((k, n)), np.zeros((k, k)))
        out = make_completion(zero, k)
        return SearchOutcome(True, out, 0, 0, input_scaled_residual(A, out.a_ext), "input is normal; zero extension")

    scale = config.init_scale if config.init_scale is not None else spectral_norm(A)
    scale = scale if scale > 0 else 1.0
    problem = _Problem(A, k, config.real_only)
    workers = max(1, config.workers)
    best = None
    total_iters = 0
    winner = None
    with ThreadPoolExecutor(max_workers=workers) if workers > 1 else _Serial() as pool:
        for start in range(0, config.restarts, workers):
            chunk = range(start, min(start + workers, config.restarts))
            results = sorted(pool.map(lambda r: _run_restart(problem, config, scale, r), chunk))
            for r, res, M, nfev in results:
                total_iters += nfev
                if best is None or res < best[1]:
                    best = (r, res, M)
                if res <= config.success_tol:
                    winner = (r, res, M)
                    break
            if winner is not None:
                break
    if winner is not None:
        r, res, M = winner
        # count only the work up to and including the winning restart
        out = make_completion(M, k, note=f"search, restart {r}")
        return SearchOutcome(True, out, total_iters, r + 1, res, "completion found")
    r, res, M = best
    out = make_completion(M, k, note=f"search best, restart {r}")
    return SearchOutcome(False, out, total_iters, config.restarts, res, NOT_FOUND)


class _Serial:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def map(self, fn, items):
        return [fn(x) for x in items]


@dataclass
class DefectEstimate:
    """Certified bracket lower <= nd(A) <= upper with the supporting evidence."""

    lower: int
    upper: int
    epsilon: int
    rank_bound: int
    best: CompletionResult
    notes: list = field(default_factory=list)
    searches: list = field(default_factory=list)

    @property
    def exact(self):
        return self.lower == self.upper

    @property
    def value(self):
        return self.lower if self.exact else None

    def describe(self):
        if self.exact:
            return f"nd = {self.lower}"
        return f"nd in [{self.lower}, {self.upper}]"


def structural_evidence(A, tol=DEFAULT_TOL, known=()):
    """Lower-bound certificates and verified completions that need no search.

    Returns ``(lower, candidates, notes)``.
    """
    A = as_matrix(A, square=True)
    bounds = defect_bounds(A, tol)
    lower = bounds.lower
    notes = [f"epsilon(A) = {bounds.lower} (lower bound)",
             f"rank(||A||^2 I - A*A) = {bounds.upper} (upper bound)"]
    candidates = []
    if is_normal(A, tol):
        candidates.append(make_completion(A, 0, minimal=True, note="A is normal"))
    w = superdiag_weights(A)
    if A.shape[0] == 4 and w is not None:
        res = minimal_completion(*w, tol=tol)
        candidates.append(res)
        notes.append(f"4x4 superdiagonal, case {res.case.variant.value}: nd = epsilon = {res.defect}")
    s = detect_shift(A)
    if s is not None and s.n >= 4:
        verdict = prop1_check(s, tol)
        if verdict.holds:
            candidates.append(prop1_completion(s, verdict, tol))
            notes.append("cyclic shift satisfies the nd = epsilon = 1 characterization")
        elif nd_exceeds_one_certificate(s, tol):
            lower = max(lower, 2)
            notes.append(f"cyclic shift with epsilon = 1 fails the characterization ({verdict.reason}): nd >= 2")
    for c in known:
        if c.residual <= tol and is_leading_principal_submatrix(A, c.a_ext, 1e-12):
            candidates.append(c)
    dil = dilation_completion(A, tol)
    if dil.residual <= tol:
        candidates.append(dil)
    candidates.append(make_completion(np.asarray(_trivial(A)), A.shape[0], note="trivial [[A, A*], [A*, A]]"))
    return lower, [c for c in candidates if c.residual <= tol], notes


def _trivial(A):
    Ah = A.conj().T
    return np.block([[A, Ah], [Ah, A]])


def defect_estimate(A, budget=None, tol=DEFAULT_TOL, known=()):
    """Bracket nd(A) using certificates, known constructions and search.

    ``budget`` is a SearchConfig template (its ``k`` is ignored); pass None
    to skip searching.  Sizes k = lower, lower + 1, ... below the best
    constructed completion are tried in order and the first success wins.
    """
    A = as_matrix(A, square=True)
    bounds = defect_bounds(A, tol)
    lower, candidates, notes = structural_evidence(A, tol, known)
    best = min(candidates, key=lambda c: (c.defect, c.residual))
    est = DefectEstimate(lower, best.defect, bounds.lower, bounds.upper, best, notes)
    if best.note:
        notes.append(f"upper bound {best.defect} from {best.note}")
    if budget is not None:
        for k in range(max(lower, 1), est.upper):
            out = search_completion(A, replace(budget, k=k))
            est.searches.append((k, out.found, out.score))
            if out.found:
                est.upper, est.best = k, out.best
                notes.append(f"search found a normal completion with k = {k}")
                break
            notes.append(f"k = {k}: {NOT_FOUND} (inconclusive)")
    return est
