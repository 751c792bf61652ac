"""Acceptance suite: one check per criterion, each reported as a PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import contextlib
import io
import json
import sys
import time
import timeit
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from normdefect import fixtures  # noqa: E402
from normdefect.blockdiag import derive_nd, direct_sum, prop_block_check  # noqa: E402
from normdefect.cli import main as cli_main, write_matrix  # noqa: E402
from normdefect.defect import (  # noqa: E402
    defect_bounds,
    epsilon,
    is_leading_principal_submatrix,
    make_completion,
    normality_residual,
)
from normdefect.matcore import commutator  # noqa: E402
from normdefect.search import SearchConfig, defect_estimate, residual_gradient, search_completion  # noqa: E402
from normdefect.shiftcycle import (  # noqa: E402
    J_TOO_LARGE,
    certificate_rank,
    certificate_vectors,
    nd_exceeds_one_certificate,
    prop1_check,
    prop1_completion,
    shift_matrix,
)
from normdefect.superdiag4 import (  # noqa: E402
    Variant,
    entry_identities,
    classify,
    complete_case_v_vi,
    duality_transform,
    minimal_completion,
    phase_reduce,
    superdiag_matrix,
    viia_blocks,
    viib_blocks,
)

from samplers import sample_triple, two_level_shift  # noqa: E402
from test_search import fd_gradient  # noqa: E402

RESULTS = {}


def record(num, title, ok, detail):
    RESULTS[num] = f"criterion {num} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    print(RESULTS[num])
    return ok


def run_cli(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main([str(a) for a in argv])
    return code, json.loads(buf.getvalue())


# ---------------------------------------------------------------- 1

def check_example1():
    s41, s410 = np.sqrt(41), np.sqrt(410)
    expected = {
        (0, 5): -2 / 41 * s410,
        (2, 4): -np.sqrt(5),
        (3, 5): -18 / 41 * s41,
        (4, 1): 2 * np.sqrt(2),
        (5, 0): 9 / 41 * s41,
        (5, 3): 4 / 41 * s410,
        (4, 5): np.sqrt(205) / 41,
        (5, 4): 8 / 41 * np.sqrt(82),
    }
    res = complete_case_v_vi(phase_reduce(1, 3, 2))
    M = np.asarray(res.a_ext)
    err = max(abs(M[idx] - v) for idx, v in expected.items())
    others = M.copy()
    for idx in expected:
        others[idx] = 0
    others[:4, :4] -= superdiag_matrix(1, 3, 2)
    err = max(err, np.abs(others).max())
    resid = normality_residual(M)
    runtime = min(timeit.repeat(lambda: complete_case_v_vi(phase_reduce(1, 3, 2)), number=50, repeat=5)) / 50
    ok = err <= 1e-12 and resid <= 1e-12 and runtime < 1e-3
    return record(1, "example1 completion entries", ok,
                  f"max entry error {err:.1e}, residual {resid:.1e}, runtime {runtime * 1e3:.3f} ms")


def test_criterion_1_example1():
    assert check_example1()


# ---------------------------------------------------------------- 2

VARIANTS = [v for v in Variant if v is not Variant.ZERO]


def check_superdiag_suite(per_variant=1000, seed=2024):
    rng = np.random.default_rng(seed)
    worst_res, worst_imag, worst_embed, failures, total = 0.0, 0.0, 0.0, 0, 0
    t0 = time.perf_counter()
    for v in VARIANTS:
        for _ in range(per_variant):
            t = sample_triple(rng, v, "real")
            A = superdiag_matrix(*t)
            res = minimal_completion(*t)
            M = np.asarray(res.a_ext)
            embed = np.abs(M[:4, :4] - A).max()
            imag = np.abs(M.imag).max()
            worst_res = max(worst_res, res.residual)
            worst_imag = max(worst_imag, imag)
            worst_embed = max(worst_embed, embed)
            total += 1
            if (classify(phase_reduce(*t)).variant is not v or res.residual > 1e-10 or embed != 0
                    or imag > 1e-14 or res.defect != epsilon(A) or M.shape[0] != 4 + res.defect):
                failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10
    return record(2, "4x4 superdiagonal randomized suite", ok,
                  f"{per_variant} triples in each of {len(VARIANTS)} variants, {total} total, {failures} failures, worst residual {worst_res:.1e}, "
                  f"worst imag {worst_imag:.1e}, worst embedding {worst_embed:.1e}, {elapsed:.2f} s")


def test_criterion_2_superdiag_suite():
    assert check_superdiag_suite()


# ---------------------------------------------------------------- 3

def check_entry_identities(count=1000, seed=3):
    rng = np.random.default_rng(seed)
    worst, n = 0.0, 0
    while n < count:
        t = sample_triple(rng, Variant.V if n % 2 == 0 else Variant.VI, "nonneg")
        if classify(t).rotation != 0:
            continue
        worst = max(worst, max(entry_identities(*t).values()))
        n += 1
    return record(3, "Case V/VI entry identities", worst <= 1e-10,
                  f"{count} case V/VI triples, six identities each, worst difference {worst:.1e}")


def test_criterion_3_entry_identities():
    assert check_entry_identities()


# ---------------------------------------------------------------- 4

def _blocks_diff(x, y):
    return max(np.abs(np.asarray(p) - np.asarray(q)).max() for p, q in zip(x, y))


def check_duality(count=500, seed=4):
    rng = np.random.default_rng(seed)
    worst, worst_inv = 0.0, 0.0
    from normdefect.superdiag4 import ExtensionBlocks

    for _ in range(count):
        a, b, c = sample_triple(rng, Variant.VIIA, "nonneg")
        Va, Wa, Za, beta = viia_blocks(a, b, c)
        Vb, Wb, Zb, _ = viib_blocks(c, b, a)
        blocks = ExtensionBlocks(Va, Wa, Za, beta)
        d = duality_transform(blocks)
        worst = max(worst, _blocks_diff((d.V, d.W, d.Z), (Vb, Wb, Zb)))
        dd = duality_transform(d)
        worst_inv = max(worst_inv, _blocks_diff((dd.V, dd.W, dd.Z), (Va, Wa, Za)))
    ok = worst <= 1e-12 and worst_inv <= 1e-14
    return record(4, "Duality transform", ok,
                  f"{count} VIIa triples, max deviation {worst:.1e}, involution {worst_inv:.1e}")


def test_criterion_4_duality():
    assert check_duality()


# ---------------------------------------------------------------- 5

def check_prop1(count=500, seed=5):
    ex2 = fixtures.example2()
    ex4 = fixtures.example4()[0]
    named_ok = True
    for A in (ex2, ex4):
        v = prop1_check(A)
        named_ok &= (not v.holds and v.reason == J_TOO_LARGE and epsilon(A) == 1
                     and nd_exceeds_one_certificate(A))
    rng = np.random.default_rng(seed)
    fails, worst_dec, worst_res = 0, 0.0, 0.0
    for t in range(count):
        n = 4 + t % 6
        w = tuple(two_level_shift(rng, n))
        A = np.asarray(shift_matrix(w))
        v = prop1_check(w)
        if not v.holds:
            fails += 1
            continue
        x, y = certificate_vectors(w, v.structure)
        dec = np.abs(commutator(A) - (np.outer(x, x.conj()) - np.outer(y, y.conj()))).max()
        res = prop1_completion(w, v)
        worst_dec, worst_res = max(worst_dec, dec), max(worst_res, res.residual)
        if (dec > 1e-12 or res.residual > 1e-10 or certificate_rank(w, v.structure) > 3
                or res.defect != 1 or epsilon(A) != 1
                or not is_leading_principal_submatrix(A, res.a_ext, 0)):
            fails += 1
    ok = named_ok and fails == 0
    return record(5, "Shift characterization suite", ok,
                  f"example2/example4 certified nd >= 2: {named_ok}; {count} random shifts, {fails} failures, "
                  f"worst decomposition {worst_dec:.1e}, worst residual {worst_res:.1e}")


def test_criterion_5_prop1():
    assert check_prop1()


# ---------------------------------------------------------------- 6

def check_blockdiag(seed=6):
    blocks, E9 = fixtures.example3()
    D = direct_sum(blocks)
    res = normality_residual(E9)
    embed = is_leading_principal_submatrix(D, E9, 0)
    nd_sum = sum(derive_nd(B)[0] for B in blocks)
    fixture_ok = res <= 1e-12 and embed and E9.shape[0] - 6 == 3 < 4 == nd_sum
    v3 = prop_block_check(blocks)
    rng = np.random.default_rng(seed)
    twos_ok = True
    for m in range(1, 9):
        bl = []
        for _ in range(m):
            B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            bl.append(B)
        v = prop_block_check(bl)
        twos_ok &= all(normality_residual(B) > 1e-6 for B in bl)
        twos_ok &= v.applies and v.combined_nd == m
    ok = fixture_ok and not v3.applies and twos_ok
    return record(6, "Block-diagonal suite", ok,
                  f"9x9 residual {res:.1e}, embedding exact {embed}, nd <= 3 < 4; "
                  f"example3 blocks applies={v3.applies}; m non-normal 2x2 blocks (m=1..8) combined_nd=m: {twos_ok}")


def test_criterion_6_blockdiag():
    assert check_blockdiag()


# ---------------------------------------------------------------- 7

def check_sqrt2(tmp):
    A, E = fixtures.sqrt2shift()
    b = defect_bounds(A)
    cert = nd_exceeds_one_certificate(A)
    upper_ok = normality_residual(E) <= 1e-12 and is_leading_principal_submatrix(A, E, 0)
    pa, pe = Path(tmp) / "sqrt2.json", Path(tmp) / "sqrt2_ext.json"
    write_matrix(pa, A)
    write_matrix(pe, E)
    code, rep = run_cli("verify", pa, pe)
    statement = rep["defect"]["statement"]
    ok = (b.lower, b.upper) == (1, 3) and cert and upper_ok and code == 0 and statement == "nd = 2"
    return record(7, "sqrt(2)-shift end to end", ok,
                  f"bounds [{b.lower}, {b.upper}], nd >= 2 certificate {cert}, "
                  f"6x6 verifies {upper_ok}, CLI says '{statement}'")


def test_criterion_7_sqrt2(tmp_path):
    assert check_sqrt2(tmp_path)


# ---------------------------------------------------------------- 8

def check_search(tmp):
    A = superdiag_matrix(1, 3, 2)
    t0 = time.perf_counter()
    out2 = search_completion(A, SearchConfig(k=2, restarts=64, seed=0))
    elapsed = time.perf_counter() - t0
    sound = out2.found and normality_residual(out2.best.a_ext) <= 1e-8 and \
        is_leading_principal_submatrix(A, out2.best.a_ext, 0)
    out1 = search_completion(A, SearchConfig(k=1, restarts=8, seed=0))
    pa = Path(tmp) / "a132.json"
    write_matrix(pa, A)
    code, rep = run_cli("search", pa, "--k", 1, "--restarts", 8)
    statement = rep["defect"]["statement"]
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        n, k = int(rng.integers(1, 6)), int(rng.integers(1, 3))
        cx = lambda r, c: rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))  # noqa: E731
        B, V, W, Z = cx(n, n), cx(n, k), cx(k, n), cx(k, k)
        G = np.concatenate([g.ravel() for g in residual_gradient(B, V, W, Z)])
        F = np.concatenate([g.ravel() for g in fd_gradient(B, V, W, Z)])
        worst = max(worst, np.linalg.norm(G - F) / np.linalg.norm(F))
    ok = (sound and out2.best.residual <= 1e-8 and out2.restarts_used <= 64 and elapsed < 60
          and not out1.found and code == 1 and not rep["search"]["found"] and statement == "nd = 2"
          and worst <= 1e-5)
    return record(8, "Search soundness and power", ok,
                  f"k=2 found={out2.found} residual {out2.best.residual:.1e} after {out2.restarts_used} "
                  f"restarts in {elapsed:.2f} s; k=1 found={out1.found}, CLI exit {code} says '{statement}'; "
                  f"gradient worst relative error {worst:.1e}")


def test_criterion_8_search(tmp_path):
    assert check_search(tmp_path)


# ---------------------------------------------------------------- 9

def check_eq8(tmp):
    A = fixtures.eq8_unknown()
    est = defect_estimate(A, SearchConfig(k=1, restarts=16, seed=0), known=())
    lib_ok = (est.lower, est.upper) == (2, 3) and est.value is None and \
        est.describe() == "nd in [2, 3]" and est.best.residual <= 1e-8
    pa = Path(tmp) / "eq8.json"
    write_matrix(pa, A)
    code, rep = run_cli("analyze", pa)
    d = rep["defect"]
    printed = json.dumps(rep)
    cli_ok = (code == 0 and d["kind"] == "interval" and (d["lower"], d["upper"]) == (2, 3)
              and "value" not in d and "nd = " not in printed)
    code_s, rep_s = run_cli("search", pa, "--k", 3, "--restarts", 16)
    ds = rep_s["defect"]
    search_ok = code_s == 0 and ds["kind"] == "interval" and (ds["lower"], ds["upper"]) == (2, 3)
    ok = lib_ok and cli_ok and search_ok
    return record(9, "Unknown-defect 5x5 probe", ok,
                  f"search-only estimate '{est.describe()}' (k=2 attempts: {est.searches[0][1]}); "
                  f"CLI analyze '{d['statement']}'; CLI search k=3 '{ds['statement']}'; no point value printed")


def test_criterion_9_eq8(tmp_path):
    assert check_eq8(tmp_path)


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        checks = [check_example1, check_superdiag_suite, check_entry_identities, check_duality, check_prop1,
                  check_blockdiag, lambda: check_sqrt2(tmp), lambda: check_search(tmp),
                  lambda: check_eq8(tmp)]
        results = [c() for c in checks]
    sys.exit(0 if all(results) else 1)
