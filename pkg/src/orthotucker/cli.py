"""Command-line front end.

Reports are line-oriented ``key: value`` text on stdout (or ``--out``);
wall time goes to stderr so that reports are byte-identical across runs.
Exit codes: 0 success, 1 usage error, 2 bad input.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import binary_sym, spectral
from .cumulants import cumulant_tensor, parse_csv
from .decomposition import decompose, decompose_sym, relative_distance
from .errors import DimensionError, InputFormatError, OrthogonalityError, SymmetryError
from .manifold import OptimizerConfig, default_workers
from .patterns import pattern_V, pattern_Vdiag, pattern_Vperp, pattern_Vsym
from .synthetic import planted, planted_sym
from .tns import format_tns, parse_tns


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, str):
        return x
    return " ".join(fmt(v) for v in x)


class Report:
    def __init__(self, command: str):
        self.lines = [f"command: {command}"]

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key}: {fmt(value)}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


# -- input helpers ------------------------------------------------------------

def _read_text(path: str, flag: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    p = Path(path)
    try:
        return p.read_text(), str(p)
    except OSError as exc:
        raise InputFormatError(f"{flag} {path}: cannot read ({exc.strerror})") from None


def _load_tensor(path: str):
    text, source = _read_text(path, "input")
    return parse_tns(text, source)


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        max_iters=args.max_iter,
        grad_tol=args.tol,
        starts=args.starts,
        seed=args.seed,
        workers=args.workers,
    )


def _echo_config(rep: Report, cfg: OptimizerConfig) -> None:
    rep.add("seed", cfg.seed)
    rep.add("starts", cfg.starts)
    rep.add("max_iter", cfg.max_iters)
    rep.add("grad_tol", cfg.grad_tol)


# -- subcommands --------------------------------------------------------------

def cmd_decompose(args) -> str:
    tf = _load_tensor(args.input)
    sym = args.sym or tf.sym
    cfg = _config(args)
    dec = decompose_sym(tf.tensor, cfg, odeco=args.odeco) if sym else decompose(
        tf.tensor, cfg, odeco=args.odeco, tuple_seeded=not args.haar_only
    )
    rep = Report("decompose")
    _echo_config(rep, cfg)
    rep.add("shape", tf.tensor.shape)
    rep.add("symmetric", sym)
    rep.add("odeco", args.odeco)
    rep.add("haar_only", args.haar_only)
    rep.add("relative_distance", dec.relative_distance)
    rep.add("residual", dec.residual)
    rep.add("singular_values", dec.singular_values)
    rep.add("flags", "; ".join(dec.flags) if dec.flags else "none")
    modes = [0] if sym else range(len(dec.Q))
    for k in modes:
        for i, row in enumerate(dec.Q[k]):
            rep.add(f"Q{k + 1}[{i + 1}]", row)
    return rep.text()


def cmd_distance(args) -> str:
    tf = _load_tensor(args.input)
    sym = args.sym or tf.sym
    cfg = _config(args)
    value, res = relative_distance(
        tf.tensor, symmetric=sym, odeco=args.odeco, config=cfg, tuple_seeded=not args.haar_only
    )
    rep = Report("distance")
    _echo_config(rep, cfg)
    rep.add("shape", tf.tensor.shape)
    rep.add("symmetric", sym)
    rep.add("target", ("X_sym" if sym else "X") + ("_odeco" if args.odeco else ""))
    rep.add("haar_only", args.haar_only)
    rep.add("relative_distance", value)
    rep.add("converged", res.converged)
    return rep.text()


def cmd_cumulant(args) -> str:
    text, source = _read_text(args.csv, "--csv")
    data = parse_csv(text, source)
    K = cumulant_tensor(data, args.order)
    return format_tns(K, sym=True)


def _parse_vectors(spec: str, flag: str) -> list[np.ndarray]:
    groups = [g for g in spec.replace("\n", ";").split(";") if g.strip()]
    return [np.array(_floats(g, flag)) for g in groups]


def cmd_verify(args) -> str:
    tf = _load_tensor(args.input)
    if args.vectors_file:
        text, _ = _read_text(args.vectors_file, "--vectors-file")
        vecs = _parse_vectors(text, "--vectors-file")
    else:
        vecs = _parse_vectors(args.vectors, "--vectors")
    lam, res = spectral.svt_residual(tf.tensor, vecs)
    rep = Report("verify")
    rep.add("shape", tf.tensor.shape)
    rep.add("lambda", lam)
    rep.add("residual", res)
    rep.add("singular_vector_tuple", res <= args.tol)
    return rep.text()


_NAMED = {"I": spectral.I2, "P": spectral.P2}


def _parse_q(tokens: list[str]) -> list[np.ndarray]:
    out = []
    for tok in tokens:
        key = tok.strip()
        neg = key.startswith("-") and key[1:] in _NAMED
        if key.lstrip("-") in _NAMED:
            M = _NAMED[key.lstrip("-")]
            out.append(-M if neg else M.copy())
            continue
        vals = _floats(key, "--q")
        if len(vals) != 4:
            raise UsageError(f"--q: {tok!r} must be I, P or four comma-separated entries (row-major)")
        out.append(np.array(vals).reshape(2, 2))
    return out


def cmd_mq(args) -> str:
    if args.q:
        Q = _parse_q(args.q)
    elif args.random:
        rng = np.random.default_rng(args.seed)
        from .tensor_core import haar_orthogonal

        Q = [haar_orthogonal(2, rng) for _ in range(args.random)]
    else:
        raise UsageError("mq: give --q or --random")
    M = spectral.build_MQ(Q)
    rep = Report("mq")
    rep.add("d", M.d)
    rep.add("rows", " ".join(M.label(r) for r in M.rows))
    rep.add("columns", " ".join(M.label(c) for c in M.cols))
    for r, row in zip(M.rows, M.matrix):
        rep.add(f"M[{M.label(r)}]", row)
    rep.add("rank", spectral.rank_MQ(M))
    if all(spectral.is_signed_permutation(Qk) for Qk in Q):
        bits = spectral.iQ(Q)
        rep.add("iQ", "".join(map(str, bits)))
        rep.add("iQ_weight", sum(bits))
        rep.add("expected_rank", spectral.expected_codim(M.d, sum(bits)))
    return rep.text()


def cmd_member2d(args) -> str:
    toks = [t for t in args.t.replace(" ", "").split(",") if t]
    if len(toks) != args.d + 1:
        raise UsageError(f"--t: expected d+1 = {args.d + 1} values, got {len(toks)}")
    if args.exact:
        try:
            t = [Fraction(tok) for tok in toks]
        except ValueError:
            raise UsageError(f"--t: {args.t!r} is not a list of rationals") from None
    else:
        t = _floats(args.t, "--t")
    mem = binary_sym.membership_value(t, exact=args.exact)
    rep = Report("member2d")
    rep.add("d", args.d)
    rep.add("t", [fmt(x) for x in t])
    rep.add("exact", args.exact)
    rep.add("r", mem.value)
    rep.add("r_normalized", mem.normalized)
    rep.add("verdict", "on variety" if mem.on_variety else "off variety")
    rep.add("flags", "; ".join(mem.flags) if mem.flags else "none")
    return rep.text()


def cmd_pattern(args) -> str:
    shape = tuple(args.shape)
    if args.kind == "V":
        P = pattern_V(shape)
    elif args.kind == "V_perp":
        P = pattern_Vperp(shape)
    elif args.kind == "V_diag":
        P = pattern_Vdiag(shape)
    else:
        if len(set(shape)) != 1:
            raise UsageError(f"--shape: V_sym needs equal dimensions, got {shape}")
        P = pattern_Vsym(shape[0], len(shape))
    rep = Report("pattern")
    rep.add("shape", shape)
    rep.add("kind", P.kind)
    rep.add("listed", "zero coordinates" if P.kind in ("V", "V_sym") else "free coordinates")
    rep.add("count", len(P))
    rep.add("dim", P.dim)
    for idx in P.indices:
        rep.add("index", [i + 1 for i in idx])
    return rep.text()


def cmd_gen(args) -> str:
    shape = tuple(args.shape)
    if args.sym:
        if len(set(shape)) != 1:
            raise UsageError(f"--shape: --sym needs equal dimensions, got {shape}")
        p = planted_sym(shape[0], len(shape), seed=args.seed, gap=args.gap)
    else:
        if list(shape) != sorted(shape):
            raise UsageError(f"--shape: dimensions must be non-decreasing, got {shape}")
        p = planted(shape, seed=args.seed, gap=args.gap, odeco=args.odeco)
    return format_tns(p.T, sym=args.sym)


def cmd_dim_check(args) -> str:
    r = binary_sym.dim_check(tuple(args.shape), symmetric=args.sym, seed=args.seed)
    rep = Report("dim-check")
    rep.add("shape", r.shape)
    rep.add("symmetric", r.symmetric)
    rep.add("expected", r.expected)
    rep.add("measured", r.measured)
    rep.add("match", r.ok)
    return rep.text()


def cmd_codim_table(args) -> str:
    r = spectral.codim_table_check(args.d, exhaustive=args.exhaustive)
    rep = Report("codim-table")
    rep.add("d", r.d)
    for row in r.rows:
        rep.add(
            f"iQ={''.join(map(str, row.bits))}",
            f"weight {row.weight} expected {row.expected} measured {row.measured}",
        )
    rep.add("sym_hadamard_ranks", r.sym_ranks)
    rep.add("sym_hadamard_expected", r.sym_expected)
    rep.add("sym_reduced_column", r.sym_row_vector)
    rep.add("match", r.ok)
    return rep.text()


# -- parser -------------------------------------------------------------------

def _positive(kind):
    def conv(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {s!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s!r}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this path as well as stdout")
    common.add_argument("--seed", type=int, default=0)

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--starts", type=_positive(int), default=20)
    opt.add_argument("--max-iter", type=_positive(int), default=2000)
    opt.add_argument("--tol", type=_positive(float), default=1e-9, help="gradient-norm stopping tolerance")
    opt.add_argument("--workers", type=_positive(int), default=default_workers())
    opt.add_argument("--sym", action="store_true", help="treat the input as symmetric")
    opt.add_argument("--odeco", action="store_true", help="restrict the core to diagonal tensors")
    opt.add_argument("--haar-only", action="store_true",
                     help="skip the singular-tuple start and use only Haar-random starts")

    p = _Parser(prog="orthotucker", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("decompose", parents=[common, opt], help="structured Tucker decomposition")
    s.add_argument("input", nargs="?", default="-", help="TNS file, '-' for stdin")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("distance", parents=[common, opt], help="relative distance to X, X_sym or their odeco parts")
    s.add_argument("input", nargs="?", default="-")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("cumulant", parents=[common], help="k-statistic cumulant tensor of CSV samples")
    s.add_argument("--order", type=int, choices=(2, 3, 4), required=True)
    s.add_argument("--csv", required=True, help="CSV file, '-' for stdin")
    s.set_defaults(func=cmd_cumulant)

    s = sub.add_parser("verify", parents=[common], help="residual of a candidate singular vector tuple")
    s.add_argument("input", help="TNS file, '-' for stdin")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--vectors", help="vectors separated by ';', entries by ','")
    g.add_argument("--vectors-file", help="one vector per line")
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("mq", parents=[common], help="the matrix M_Q for binary formats")
    s.add_argument("--q", nargs="+", help="per mode: I, P, -I, -P or a,b,c,d (row-major)")
    s.add_argument("--random", type=int, metavar="D", help="random Q in O(2)^D")
    s.set_defaults(func=cmd_mq)

    s = sub.add_parser("member2d", parents=[common], help="membership in the closure of X_sym, n = 2")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--t", required=True, help="t_0,...,t_d")
    s.add_argument("--exact", action="store_true", help="rational arithmetic")
    s.set_defaults(func=cmd_member2d)

    s = sub.add_parser("pattern", parents=[common], help="list a sparsity pattern (1-based indices)")
    s.add_argument("--shape", type=int, nargs="+", required=True)
    s.add_argument("--kind", choices=("V", "V_sym", "V_diag", "V_perp"), default="V")
    s.set_defaults(func=cmd_pattern)

    s = sub.add_parser("gen", parents=[common], help="synthetic tensor Q . S with S in V")
    s.add_argument("--shape", type=int, nargs="+", required=True)
    s.add_argument("--sym", action="store_true")
    s.add_argument("--odeco", action="store_true")
    s.add_argument("--gap", type=_positive(float), default=0.1)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("dim-check", parents=[common], help="Jacobian rank against the dimension formula")
    s.add_argument("--shape", type=int, nargs="+", required=True)
    s.add_argument("--sym", action="store_true")
    s.set_defaults(func=cmd_dim_check)

    s = sub.add_parser("codim-table", parents=[common], help="rank of M_Q over signed permutations")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--exhaustive", action="store_true")
    s.set_defaults(func=cmd_codim_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        out = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"orthotucker {args.command}: error: {exc}\n")
        return 1
    except (InputFormatError, DimensionError, SymmetryError, OrthogonalityError, ValueError) as exc:
        sys.stderr.write(f"orthotucker {args.command}: error: {exc}\n")
        return 2
    sys.stdout.write(out)
    sys.stdout.flush()
    if args.out:
        try:
            Path(args.out).write_text(out)
        except OSError as exc:
            sys.stderr.write(f"orthotucker {args.command}: error: --out {args.out}: {exc.strerror}\n")
            return 2
    sys.stderr.write(f"wall_time_s: {time.perf_counter() - start:.3f}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
