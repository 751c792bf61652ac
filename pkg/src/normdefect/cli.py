"""Command-line front end.  Every command prints one JSON report on stdout.

Exit codes: 0 ok, 1 search inconclusive, 2 parse error, 3 non-square input,
4 method not applicable, 5 verification failed.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import blockdiag, defect, fixtures, search, shiftcycle, superdiag4
from .matcore import DEFAULT_TOL, commutator, inertia

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_PARSE, EXIT_SHAPE, EXIT_METHOD, EXIT_VERIFY = range(6)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def default_tol():
    raw = os.environ.get("ND_DEFAULT_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        val = float(raw)
    except ValueError:
        raise CliError(f"ND_DEFAULT_TOL={raw!r} is not a number", EXIT_PARSE)
    if not (val > 0 and math.isfinite(val)):
        raise CliError("ND_DEFAULT_TOL must be positive and finite", EXIT_PARSE)
    return val


# ---------------------------------------------------------------- matrix files

def matrix_from_json(doc):
    """Parse a MatrixFile document into a complex array."""
    try:
        rows, cols, entries = int(doc["rows"]), int(doc["cols"]), doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed matrix document: {exc}", EXIT_PARSE)
    if rows < 1 or cols < 1 or not isinstance(entries, list) or len(entries) != rows * cols:
        raise CliError(f"expected {rows}x{cols} = {rows * cols} entries", EXIT_PARSE)
    vals = []
    for e in entries:
        if isinstance(e, (list, tuple)) and len(e) == 2:
            re, im = e
        elif isinstance(e, (int, float)) and not isinstance(e, bool):
            re, im = e, 0.0
        else:
            raise CliError(f"bad entry {e!r}; use a number or [re, im]", EXIT_PARSE)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
            raise CliError(f"bad entry {e!r}", EXIT_PARSE)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise CliError("matrix entries must be finite", EXIT_PARSE)
        vals.append(complex(float(re), float(im)))
    return np.array(vals, dtype=np.complex128).reshape(rows, cols)


def matrix_to_json(M):
    M = np.asarray(M, dtype=np.complex128)
    return {
        "rows": M.shape[0],
        "cols": M.shape[1],
        "entries": [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


def read_matrix(path, square=True):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE)
    M = matrix_from_json(doc)
    if square and M.shape[0] != M.shape[1]:
        raise CliError(f"{path}: expected a square matrix, got {M.shape[0]}x{M.shape[1]}", EXIT_SHAPE)
    return M


def write_matrix(path, M):
    Path(path).write_text(json.dumps(matrix_to_json(M)) + "\n")


def digest(M):
    return hashlib.sha256(np.ascontiguousarray(M, dtype=np.complex128).tobytes()).hexdigest()[:16]


# ---------------------------------------------------------------- reports

def _residuals(M, tol):
    C = np.asarray(commutator(M))
    return {"absolute": float(np.linalg.norm(C)),
            "relative": defect.normality_residual(M), "tolerance": tol}


def _defect_field(lower, upper):
    if lower == upper:
        return {"kind": "exact", "value": lower, "statement": f"nd = {lower}"}
    return {"kind": "interval", "lower": lower, "upper": upper,
            "statement": f"nd in [{lower}, {upper}]"}


def assess(A, tol):
    """Bounds, inertia, shape-specific verdicts and the certified bracket."""
    bounds = defect.defect_bounds(A, tol)
    I = bounds.inertia
    lower, cands, notes = search.structural_evidence(A, tol, fixtures.known_completions(A))
    best = min(cands, key=lambda c: (c.defect, c.residual))
    rep = {
        "tolerance": tol,
        "bounds": {"lower": bounds.lower, "upper": bounds.upper, "tolerance": tol},
        "epsilon": bounds.lower,
        "inertia": {"n_plus": I.n_plus, "n_minus": I.n_minus, "n_zero": I.n_zero,
                    "threshold": I.tolerance},
        "normality": _residuals(A, tol),
    }
    w = superdiag4.superdiag_weights(A)
    if A.shape[0] == 4 and w is not None:
        case = superdiag4.classify(superdiag4.phase_reduce(*w), tol)
        rep["case"] = case.variant.value
    s = shiftcycle.detect_shift(A)
    if s is not None and s.n >= 4:
        v = shiftcycle.prop1_check(s, tol)
        rep["shift"] = {"holds": v.holds, "reason": v.reason,
                        "nd_at_least_2": shiftcycle.nd_exceeds_one_certificate(s, tol)}
        if v.structure is not None:
            st = v.structure
            rep["shift"].update(alpha=st.alpha, beta=st.beta_mag, a_beta=sorted(st.a_beta),
                                i=st.i, j=st.j)
    if best.defect == 0:
        notes.append("normal, nd = 0")
    return rep, lower, best, notes


def emit(report):
    json.dump(report, sys.stdout, indent=2, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return matrix_to_json(x)
    raise TypeError(f"cannot serialise {type(x)}")


# ---------------------------------------------------------------- commands

def _search_budget(args):
    return search.SearchConfig(k=1, restarts=args.restarts, seed=args.seed,
                               max_iters=args.max_iters, real_only=getattr(args, "real_only", False))


def cmd_analyze(args):
    tol = args.tol
    A = read_matrix(args.path)
    rep, lower, best, notes = assess(A, tol)
    upper = best.defect
    if args.estimate:
        est = search.defect_estimate(A, _search_budget(args), tol, fixtures.known_completions(A))
        lower, upper, best, notes = est.lower, est.upper, est.best, est.notes
        rep["searches"] = [{"k": k, "found": f, "score": r} for k, f, r in est.searches]
    rep.update(command="analyze", input_digest=digest(A),
               defect=_defect_field(lower, upper), notes=notes,
               upper_source=best.note)
    emit(rep)
    return EXIT_OK


def _family_of(A):
    w = superdiag4.superdiag_weights(A)
    n = A.shape[0]
    if w is None or n < 4:
        return None
    m = n - 3
    shapes = {
        1: (w[0], w[1], w[-1], all(x == w[1] for x in w[1:1 + m])),
        2: (w[0], w[1], w[2], all(x == w[2] for x in w[2:])),
        3: (w[0], w[-2], w[-1], all(x == w[0] for x in w[:m])),
    }
    out = []
    for fam, (a, b, c, ok) in shapes.items():
        if ok:
            out.append((fam, a, b, c))
    return out


def cmd_complete(args):
    tol = args.tol
    A = read_matrix(args.path)
    n = A.shape[0]
    method = args.method
    exact = False
    res = None
    if method in ("auto", "superdiag4"):
        w = superdiag4.superdiag_weights(A)
        if n == 4 and w is not None:
            res, exact = superdiag4.minimal_completion(*w, tol=tol), True
        elif method == "superdiag4":
            raise CliError("superdiag4 needs a 4x4 matrix with only superdiagonal entries", EXIT_METHOD)
    if res is None and method in ("auto", "shift"):
        s = shiftcycle.detect_shift(A)
        v = shiftcycle.prop1_check(s, tol) if s is not None and s.n >= 4 else None
        if v is not None and v.holds:
            res, exact = shiftcycle.prop1_completion(s, v, tol), True
        elif method == "shift":
            reason = v.reason if v is not None else "not a cyclic shift with n >= 4"
            raise CliError(f"shift completion not applicable: {reason}", EXIT_METHOD)
    if res is None and method in ("auto", "family"):
        for fam, a, b, c in _family_of(A) or []:
            if args.family is not None and fam != args.family:
                continue
            try:
                fr = superdiag4.family_nxn_completion(n, a, b, c, fam, tol)
            except superdiag4.CaseMismatchError:
                continue
            if fr.verified:
                res = fr.completion
                break
        if res is None and method == "family":
            raise CliError("no verified family construction applies", EXIT_METHOD)
    if res is None and method in ("auto", "dilation"):
        res = defect.dilation_completion(A, tol)
        if res.residual > tol and method == "dilation":
            raise CliError("dilation did not verify", EXIT_METHOD)
    if res is None or method == "trivial":
        res = defect.trivial_completion(A)
    if res.residual > tol:
        raise CliError(f"construction residual {res.residual:.3g} exceeds tolerance", EXIT_METHOD)
    if args.output:
        write_matrix(args.output, res.a_ext)
    eps = defect.epsilon(A, tol)
    d = _defect_field(res.defect, res.defect) if exact else {
        "kind": "upper_bound", "value": res.defect,
        "statement": f"nd <= {res.defect}", "lower": eps}
    emit({
        "command": "complete", "method": method, "input_digest": digest(A),
        "defect": d, "epsilon": eps,
        "case": res.case.variant.value if res.case is not None else None,
        "residuals": _residuals(res.a_ext, tol),
        "completion": matrix_to_json(res.a_ext), "notes": [res.note] if res.note else [],
    })
    return EXIT_OK


def cmd_verify(args):
    tol = args.tol
    A = read_matrix(args.path_a)
    E = read_matrix(args.path_ext)
    if E.shape[0] < A.shape[0]:
        raise CliError("extension is smaller than the matrix", EXIT_SHAPE)
    resid = _residuals(E, tol)
    normal = resid["relative"] <= tol
    contains = defect.is_leading_principal_submatrix(A, E, tol)
    rep, lower, best, notes = assess(A, tol)
    upper = best.defect
    k = E.shape[0] - A.shape[0]
    if normal and contains:
        upper = min(upper, k)
        notes.append(f"verified normal completion with k = {k}: nd <= {k}")
    rep.update(command="verify", input_digest=digest(A), extension_digest=digest(E),
               passed=bool(normal and contains), normal=bool(normal), contains=bool(contains),
               residuals=resid, defect=_defect_field(lower, upper), notes=notes)
    emit(rep)
    return EXIT_OK if normal and contains else EXIT_VERIFY


def cmd_search(args):
    tol = args.tol
    A = read_matrix(args.path)
    if args.k < 1:
        raise CliError("--k must be at least 1", EXIT_METHOD)
    cfg = search.SearchConfig(k=args.k, restarts=args.restarts, seed=args.seed,
                              success_tol=args.success_tol, max_iters=args.max_iters,
                              real_only=args.real_only, workers=args.workers)
    out = search.search_completion(A, cfg)
    rep, lower, best, notes = assess(A, tol)
    upper = best.defect
    if out.found:
        upper = min(upper, args.k)
        notes.append(f"search found a normal completion with k = {args.k}")
    else:
        notes.append(f"k = {args.k}: {search.NOT_FOUND} (inconclusive)")
    rep.update(command="search", input_digest=digest(A),
               search={"k": args.k, "found": out.found, "score": out.score,
                       "residual": out.best.residual, "success_tol": cfg.success_tol,
                       "restarts_used": out.restarts_used,
                       "iterations_used": out.iterations_used, "message": out.message},
               defect=_defect_field(lower, upper), notes=notes)
    if out.found:
        rep["completion"] = matrix_to_json(out.best.a_ext)
        if args.output:
            write_matrix(args.output, out.best.a_ext)
    emit(rep)
    return EXIT_OK if out.found else EXIT_INCONCLUSIVE


def cmd_blockdiag(args):
    tol = args.tol
    blocks = [read_matrix(p) for p in args.paths]
    known = None
    if args.known_nd:
        try:
            known = [None if x in ("", "?") else int(x) for x in args.known_nd.split(",")]
        except ValueError:
            raise CliError("--known-nd takes comma-separated integers", EXIT_PARSE)
        if len(known) != len(blocks):
            raise CliError("--known-nd needs one value per block", EXIT_PARSE)
    try:
        verdict = blockdiag.prop_block_check(blocks, known, tol)
    except blockdiag.UnderivableDefectError as exc:
        raise CliError(str(exc), EXIT_METHOD)
    A = blockdiag.direct_sum(blocks)
    rep, lower, best, notes = assess(A, tol)
    upper = best.defect
    if verdict.applies:
        lower = max(lower, verdict.combined_nd)
        upper = min(upper, verdict.combined_nd)
        notes.append(f"block conditions hold: nd = sum of epsilons = {verdict.combined_nd}")
    else:
        notes.append(f"block conditions fail: {verdict.reason}")
    rep.update(command="blockdiag", input_digest=digest(A), applies=verdict.applies,
               combined_nd=verdict.combined_nd,
               blocks=[{"epsilon": b.epsilon, "nd": b.nd, "nd_equals_epsilon": b.nd_equals_eps_known,
                        "inertia": [b.inertia.n_plus, b.inertia.n_minus, b.inertia.n_zero],
                        "source": b.source} for b in verdict.per_block],
               defect=_defect_field(lower, upper), notes=notes)
    emit(rep)
    return EXIT_OK


def cmd_fixtures(args):
    try:
        fx = fixtures.get_fixture(args.name)
    except KeyError as exc:
        raise CliError(str(exc.args[0]), EXIT_METHOD)
    written = {}
    out = {}
    for key, val in fx.items():
        if key == "blocks":
            mats = {f"block{i + 1}": B for i, B in enumerate(val)}
        else:
            mats = {key: val}
        for label, M in mats.items():
            out[label] = matrix_to_json(M)
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                path = Path(args.out) / f"{args.name}_{label}.json"
                write_matrix(path, M)
                written[label] = str(path)
    emit({"command": "fixtures", "name": args.name, "matrices": out, "written": written})
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    tol = default_tol()
    p = argparse.ArgumentParser(prog="normdefect", description="Normal-defect analysis of square matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_tol(sp):
        sp.add_argument("--tol", type=float, default=tol, help=f"relative tolerance (default {tol:g})")
        return sp

    def with_search(sp, restarts=16):
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iters", type=int, default=400)
        return sp

    a = with_search(with_tol(sub.add_parser("analyze", help="bounds, inertia and shape-specific verdicts")))
    a.add_argument("path")
    a.add_argument("--estimate", action="store_true", help="also search for smaller completions")
    a.set_defaults(func=cmd_analyze)

    c = with_tol(sub.add_parser("complete", help="build a normal completion"))
    c.add_argument("path")
    c.add_argument("--method", default="auto",
                   choices=["auto", "superdiag4", "shift", "trivial", "family", "dilation"])
    c.add_argument("--family", type=int, choices=[1, 2, 3])
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_complete)

    v = with_tol(sub.add_parser("verify", help="check a claimed normal completion"))
    v.add_argument("path_a")
    v.add_argument("path_ext")
    v.set_defaults(func=cmd_verify)

    s = with_search(with_tol(sub.add_parser("search", help="numerically search for a completion of size n+k")), 64)
    s.add_argument("path")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--success-tol", type=float, default=1e-8)
    s.add_argument("--real-only", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_search)

    b = with_tol(sub.add_parser("blockdiag", help="block-diagonal additivity check"))
    b.add_argument("paths", nargs="+")
    b.add_argument("--known-nd", help="comma-separated nd per block ('?' to derive)")
    b.set_defaults(func=cmd_blockdiag)

    f = sub.add_parser("fixtures", help="emit the worked example matrices")
    f.add_argument("name", choices=list(fixtures.FIXTURE_NAMES))
    f.add_argument("--out", help="directory to write MatrixFiles into")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"normdefect: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
