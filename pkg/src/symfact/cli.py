"""Command-line front end.

JSON goes to stdout (or --out); human-readable summaries go to stderr.
Exit codes are a stable contract: 0 ok, 2 verification failure, 3 parse
error, 4 size-cap error, 5 precondition/numeric failure.
"""

import argparse
import json
import sys

import numpy as np

from . import core, factors, krylov, sos
from .core import (HankelGen, dense_from_json, dense_to_json,
                   generator_from_json, generator_to_json, hankel_materialize,
                   toeplitz_materialize)
from .displacement import displacement_factor, hankel_inverse_factor
from .errors import (DimensionError, NumericError, ParseError,
                     PreconditionError, SizeCapError)
from .hankel import hankel_factor
from .toeplitz import hermitian_toeplitz_factor

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_PARSE = 3
EXIT_SIZE = 4
EXIT_PRECONDITION = 5


def _say(msg):
    print(msg, file=sys.stderr)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}",
                         f"line {exc.lineno}")


def _emit(doc, out):
    text = json.dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_vector(path):
    doc = _load_json(path)
    if not isinstance(doc, list):
        raise ParseError("vector file must be a JSON array", "$")
    return core._decode_scalars(doc, "$")


def _load_sparse(path):
    """Coordinate triplets, one 'row col value' per line, or a JSON object."""
    with open(path) as fh:
        head = fh.read(1)
    if head == "{" or head == "[":
        doc = _load_json(path)
        if isinstance(doc, dict) and doc.get("kind") == "dense":
            return krylov.SparseMatrix.from_dense(dense_from_json(doc).real)
        if not isinstance(doc, dict):
            raise ParseError("sparse JSON must be an object", "$")
        trip = doc.get("triplets", [])
        n = doc.get("n")
        if not isinstance(n, int):
            raise ParseError("sparse JSON needs integer n", "$.n")
        rows = [t[0] for t in trip]
        cols = [t[1] for t in trip]
        vals = [t[2] for t in trip]
        return krylov.SparseMatrix(n, doc.get("cols", n), rows, cols, vals)
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'row col value'", f"line {lineno}")
            try:
                rows.append(int(parts[0]))
                cols.append(int(parts[1]))
                vals.append(float(parts[2]))
            except ValueError as exc:
                raise ParseError(str(exc), f"line {lineno}")
    n = max(max(rows, default=-1), max(cols, default=-1)) + 1
    return krylov.SparseMatrix(n, n, rows, cols, vals)


def _target_matrix(kind, doc, cap):
    if kind in ("hankel", "inverse-hankel"):
        gen = generator_from_json(doc)
        if not isinstance(gen, HankelGen):
            raise ParseError("expected a hankel generator", "$.kind")
        H = hankel_materialize(gen, cap)
        if kind == "hankel":
            return gen, H
        return gen, np.linalg.inv(H.astype(float))
    if kind == "toeplitz":
        gen = generator_from_json(doc)
        if isinstance(gen, HankelGen):
            raise ParseError("expected a toeplitz generator", "$.kind")
        return gen, toeplitz_materialize(gen, cap)
    if kind == "displacement":
        M = dense_from_json(doc)
        return M, np.real(M)
    raise ParseError(f"unknown factor kind {kind!r}", "$")


def cmd_factor(args):
    doc = _load_json(args.input)
    source, target = _target_matrix(args.kind, doc, args.cap) if args.verify \
        else (None, None)
    if args.kind in ("hankel", "toeplitz", "inverse-hankel") and source is None:
        source = generator_from_json(doc)
    if args.kind == "displacement" and source is None:
        source = dense_from_json(doc)

    if args.kind == "hankel":
        pair = hankel_factor(source)
    elif args.kind == "toeplitz":
        pair = hermitian_toeplitz_factor(source)
    elif args.kind == "displacement":
        pair = displacement_factor(np.real(source), r=args.r)
    else:
        pair = hankel_inverse_factor(source)

    _emit(factors.pair_to_doc(pair), args.out)
    _say(f"factored {args.kind}: nrows={pair.nrows} "
         f"ncols(B)={pair.B.ncols} ncols(C)={pair.C.ncols}")
    if args.debug_levels and args.kind == "hankel":
        levels = hankel_factor(source, collect_levels=True).stats["level_states"]
        dump = [{"level": st.level, "block_order": st.block_order,
                 "gens": [core._encode_scalars(row) for row in st.gens]}
                for st in levels]
        with open(args.debug_levels, "w") as fh:
            json.dump(dump, fh)
        _say(f"wrote level generators to {args.debug_levels}")
    if args.verify:
        rec = pair.reconstruct(args.cap)
        denom = max(np.linalg.norm(target), 1e-300)
        err = float(np.linalg.norm(rec - target) / denom)
        _say(f"relative reconstruction error: {err:.3e}")
        if err > args.tol:
            _say(f"verification FAILED (tol {args.tol:.1e})")
            return EXIT_VERIFY
    return EXIT_OK


def cmd_apply(args):
    try:
        pair = factors.pair_from_doc(_load_json(args.factor))
        x = _load_vector(args.vector)
        y = pair.apply_gram(x)
    except DimensionError as exc:
        raise ParseError(str(exc))
    _emit(core._encode_scalars(y), args.out)
    return EXIT_OK


def cmd_verify(args):
    doc = _load_json(args.input)
    pair = factors.pair_from_doc(_load_json(args.factor))
    kind = args.kind
    if kind is None:
        kind = "hankel" if pair.provenance in ("hankel_factor", "") else None
        mapping = {"hankel_factor": "hankel",
                   "hermitian_toeplitz_factor": "toeplitz",
                   "displacement_factor": "displacement",
                   "hankel_inverse_factor": "inverse-hankel"}
        kind = mapping.get(pair.provenance, "hankel")
    _, target = _target_matrix(kind, doc, args.cap)
    rec = pair.reconstruct(args.cap)
    denom = max(np.linalg.norm(target), 1e-300)
    err = float(np.linalg.norm(rec - target) / denom)
    _emit({"kind": kind, "relative_error": err, "tol": args.tol}, args.out)
    _say(f"relative reconstruction error: {err:.3e}")
    return EXIT_OK if err <= args.tol else EXIT_VERIFY


def cmd_sos(args):
    if args.coeffs.endswith(".json"):
        doc = _load_json(args.coeffs)
        if not isinstance(doc, list):
            raise ParseError("polynomial JSON must be an array", "$")
        coeffs = [float(c) for c in doc]
    else:
        try:
            coeffs = [float(c) for c in args.coeffs.split(",") if c.strip()]
        except ValueError as exc:
            raise ParseError(f"bad coefficient list: {exc}")
    poly = sos.Polynomial(np.asarray(coeffs))
    terms = sos.sos_decompose(poly)
    residual = sos.verify_decomposition(poly, terms)
    doc = {"terms": [{"sign": t.sign, "coeffs": core._encode_scalars(t.coeffs)}
                     for t in terms],
           "residual": residual}
    _emit(doc, args.out)
    _say(f"{len(terms)} terms, residual {residual:.3e}")
    return EXIT_OK


def cmd_krylov(args):
    A = _load_sparse(args.matrix)
    n = A.shape[0]
    if args.s is None or n % args.s:
        raise PreconditionError(f"--s must divide n = {n}")
    m = n // args.s
    G = krylov.random_sparse(n, args.s, seed=args.seed)
    spec = krylov.KrylovSpec(A, G, m)
    K = krylov.build_krylov(spec)
    rng = np.random.default_rng(args.seed)
    B = rng.standard_normal((n, args.r))
    A.reset_stats(), G.reset_stats()
    KB = krylov.apply_K(spec, B)
    counts = {"A": dict(A.stats), "G": dict(G.stats)}
    KtB = krylov.apply_K_transpose(spec, B)
    err_k = float(np.abs(KB - K @ B).max() / max(np.abs(K @ B).max(), 1e-300))
    err_kt = float(np.abs(KtB - K.T @ B).max() / max(np.abs(K.T @ B).max(), 1e-300))
    doc = {"n": n, "s": args.s, "m": m,
           "apply_K_rel_err": err_k, "apply_Kt_rel_err": err_kt,
           "apply_counts": counts}
    if A.symmetry_residual() == 0.0:
        T = krylov.build_block_hankel(spec)
        doc["block_hankel_displacement_rank"] = krylov.block_shift_displacement_rank(
            T, args.s)
    _emit(doc, args.out)
    _say(f"apply_K rel err {err_k:.2e}; apply_K^T rel err {err_kt:.2e}")
    return EXIT_OK


def cmd_bench(args):
    import time

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    rows = []
    prev = None
    for n in sizes:
        gen = rng.standard_normal(2 * n - 1)
        best = np.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            pair = hankel_factor(HankelGen(n, gen))
            best = min(best, time.perf_counter() - t0)
        ratio = best / prev if prev else None
        prev = best
        rows.append({"n": n, "seconds": best, "doubling_ratio": ratio,
                     "ncols_B": pair.B.ncols, "ncols_C": pair.C.ncols})
        _say(f"n={n:>7} time={best * 1e3:8.2f} ms"
             + (f" ratio={ratio:.2f}" if ratio else ""))
    _emit({"kind": args.kind, "rows": rows}, args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="symfact",
                                description="symmetric structured-matrix factorizations")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factor", help="factor a structured matrix")
    f.add_argument("kind", choices=["hankel", "toeplitz", "displacement",
                                    "inverse-hankel"])
    f.add_argument("input", help="generator or dense JSON file")
    f.add_argument("--out", help="write the factor pair here (default stdout)")
    f.add_argument("--verify", action="store_true",
                   help="materialize and check the reconstruction")
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--cap", type=int, default=core.DESK_CAP)
    f.add_argument("--r", type=int, default=2,
                   help="claimed displacement rank (displacement kind)")
    f.add_argument("--debug-levels", help="dump per-level generators (hankel)")
    f.set_defaults(func=cmd_factor)

    a = sub.add_parser("apply", help="apply B B* - C C* to a vector")
    a.add_argument("factor")
    a.add_argument("vector")
    a.add_argument("--out")
    a.set_defaults(func=cmd_apply)

    v = sub.add_parser("verify", help="check a factor file against its source")
    v.add_argument("input")
    v.add_argument("factor")
    v.add_argument("--kind", choices=["hankel", "toeplitz", "displacement",
                                      "inverse-hankel"])
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--cap", type=int, default=core.DESK_CAP)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sos", help="difference-of-squares certificate")
    s.add_argument("coeffs", help="comma-separated ascending coefficients "
                                  "or a .json array file")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sos)

    k = sub.add_parser("krylov", help="block-Krylov apply equivalence demo")
    k.add_argument("matrix", help="triplet text file or JSON")
    k.add_argument("--s", type=int, required=True, help="block width")
    k.add_argument("--r", type=int, default=4, help="batch width")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out")
    k.set_defaults(func=cmd_krylov)

    b = sub.add_parser("bench", help="factorization scaling table")
    b.add_argument("kind", choices=["hankel"])
    b.add_argument("--sizes", default="4096,8192,16384,32768")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        _say(f"parse error: {exc}")
        return EXIT_PARSE
    except SizeCapError as exc:
        _say(f"size error: {exc}")
        return EXIT_SIZE
    except (PreconditionError, NumericError) as exc:
        _say(f"precondition failed: {exc}")
        return EXIT_PRECONDITION
    except DimensionError as exc:
        _say(f"parse error: {exc}")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
