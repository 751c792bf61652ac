import numpy as np
import pytest

from normdefect import fixtures
from normdefect.defect import is_leading_principal_submatrix, normality_residual, split_blocks
from normdefect.matcore import random_unitary
from normdefect.search import (
    NOT_FOUND,
    SearchConfig,
    defect_estimate,
    residual_gradient,
    residual_objective,
    search_completion,
)
from normdefect.superdiag4 import superdiag_matrix

from conftest import random_complex

A132 = superdiag_matrix(1, 3, 2)


def fd_gradient(A, V, W, Z, h=1e-6):
    blocks = [np.array(X, dtype=complex) for X in (V, W, Z)]
    out = []
    for b in range(3):
        G = np.zeros_like(blocks[b])
        for idx in np.ndindex(blocks[b].shape):
            for unit, part in ((1.0, 1.0), (1j, 1j)):
                plus = [X.copy() for X in blocks]
                minus = [X.copy() for X in blocks]
                plus[b][idx] += h * unit
                minus[b][idx] -= h * unit
                d = (residual_objective(A, *plus) - residual_objective(A, *minus)) / (2 * h)
                G[idx] += part * d
        out.append(G)
    return out


def test_objective_examples():
    _, E1 = fixtures.example1()
    _, V, W, Z = split_blocks(E1, 4)
    assert residual_objective(A132, V, W, Z) <= 1e-24
    assert residual_objective(np.eye(3), np.zeros((3, 1)), np.zeros((1, 3)), np.zeros((1, 1))) == 0
    with pytest.raises(ValueError):
        residual_objective(A132, np.zeros((3, 1)), np.zeros((1, 4)), np.zeros((1, 1)))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n, k = int(rng.integers(1, 6)), int(rng.integers(1, 3))
        A = random_complex(rng, n)
        V, W, Z = random_complex(rng, n, k), random_complex(rng, k, n), random_complex(rng, k)
        G = np.concatenate([g.ravel() for g in residual_gradient(A, V, W, Z)])
        F = np.concatenate([g.ravel() for g in fd_gradient(A, V, W, Z)])
        assert np.linalg.norm(G - F) <= 1e-5 * np.linalg.norm(F)


def test_search_finds_k2():
    out = search_completion(A132, SearchConfig(k=2, restarts=64, seed=0))
    assert out.found and out.best.residual <= 1e-8
    assert out.restarts_used <= 64
    assert normality_residual(out.best.a_ext) <= 1e-8
    assert is_leading_principal_submatrix(A132, out.best.a_ext, 0)


def test_search_k1_is_inconclusive():
    out = search_completion(A132, SearchConfig(k=1, restarts=4, seed=0))
    assert not out.found and out.message == NOT_FOUND
    assert out.score > 1e-8


def test_search_determinism():
    cfg = SearchConfig(k=1, restarts=3, seed=42, max_iters=100)
    o1, o2 = search_completion(A132, cfg), search_completion(A132, cfg)
    assert o1.found == o2.found
    assert abs(o1.best.residual - o2.best.residual) <= 1e-12
    assert np.array_equal(o1.best.a_ext, o2.best.a_ext)


def test_search_workers_do_not_change_result():
    base = SearchConfig(k=2, restarts=8, seed=3)
    o1 = search_completion(A132, base)
    o2 = search_completion(A132, SearchConfig(k=2, restarts=8, seed=3, workers=4))
    assert o1.found == o2.found and o1.restarts_used == o2.restarts_used
    assert np.array_equal(o1.best.a_ext, o2.best.a_ext)


def test_search_normal_input_and_k0(rng):
    U = random_unitary(3, rng)
    out = search_completion(U, SearchConfig(k=1))
    assert out.found and out.best.size == 4
    assert search_completion(U, SearchConfig(k=0)).found
    with pytest.raises(ValueError):
        search_completion(A132, SearchConfig(k=0))
    with pytest.raises(ValueError):
        SearchConfig(k=1, restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(k=1, success_tol=0)


def test_search_soundness_real_only():
    out = search_completion(A132, SearchConfig(k=2, restarts=16, seed=1, real_only=True))
    if out.found:
        M = np.asarray(out.best.a_ext)
        assert np.all(M.imag == 0)
        assert normality_residual(M) <= 1e-8


def test_defect_estimate_examples(rng):
    est = defect_estimate(A132)
    assert est.exact and est.value == 2 and est.describe() == "nd = 2"
    est = defect_estimate(random_unitary(4, rng))
    assert est.value == 0
    S, _ = fixtures.sqrt2shift()
    est = defect_estimate(S, SearchConfig(k=1, restarts=8, seed=0))
    assert (est.epsilon, est.rank_bound) == (1, 3)
    assert est.lower == 2 and est.upper == 2
    assert est.best.residual <= 1e-9
