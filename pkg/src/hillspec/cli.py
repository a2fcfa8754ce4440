"""hillspec command line.  Exit codes: 0 ok, 2 config error, 3 computation error, 4 no_basis with --assert-basis."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .pipeline import ConfigError, RunConfig, run
from .report import emit

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_NO_BASIS = 0, 2, 3, 4


def _complex_pair(text: str) -> complex:
    try:
        re, im = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected <re>,<im>, got '{text}'") from exc
    return complex(re, im)


def _key_value(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got '{text}'")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hillspec", description="Hill operator spectra and Riesz-basis diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def output(p):
        p.add_argument("--out", choices=["json", "csv"], default="json")
        p.add_argument("--file", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("spectrum", help="disc eigenvalues of the truncated matrix")
    p.add_argument("--potential", required=True)
    p.add_argument("--bc", choices=["per+", "per-", "dir"], required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--trunc", type=int, default=160)
    p.add_argument("--tol", type=float, default=1e-10, help="backward-error tolerance")
    output(p)

    p = sub.add_parser("beta", help="alpha_n, beta_n^- and beta_n^+ at one point z")
    p.add_argument("--potential", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", type=_complex_pair, default=0j)
    p.add_argument("--radius-j", type=int, default=None)
    p.add_argument("--depth", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--per-term", action="store_true")
    output(p)

    p = sub.add_parser("solve", help="roots of the basic equation")
    p.add_argument("--potential", required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--cross-validate", action="store_true")
    p.add_argument("--trunc", type=int, default=160)
    output(p)

    p = sub.add_parser("riesz", help="Riesz-basis criteria over an index range")
    p.add_argument("--potential", required=True)
    p.add_argument("--parity", choices=["even", "odd"], required=True)
    p.add_argument("--criterion", choices=["1", "2", "3", "makin"], required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--window", type=float, default=10.0)
    p.add_argument("--assert-basis", action="store_true")
    output(p)

    p = sub.add_parser("asym", help="asymptotic-law ratio tables")
    p.add_argument("--potential", required=True)
    p.add_argument("--law", required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    output(p)

    p = sub.add_parser("weights", help="structural checks of a weight sequence")
    p.add_argument("--family", required=True)
    p.add_argument("--check", required=True, help="sub|slow|subexp|concave|factorize[:omega=<weightspec>]")
    p.add_argument("--kmax", type=int, default=2048)
    output(p)

    p = sub.add_parser("reproduce", help="run a pinned preset end to end")
    p.add_argument("preset", choices=["example1", "example2", "ex1", "ex2", "sawtooth", "mathieu"])
    p.add_argument("--set", type=_key_value, action="append", default=[], metavar="KEY=VALUE")
    output(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, out_format=args.out, out_path=args.file)
    c = args.command
    if c in ("spectrum", "beta", "solve", "riesz", "asym"):
        cfg.potential_spec = args.potential
    if c in ("spectrum", "solve", "riesz", "asym"):
        cfg.n_min, cfg.n_max = args.n_min, args.n_max
    if c == "spectrum":
        cfg.bc, cfg.trunc_N, cfg.tol = args.bc, args.trunc, args.tol
    elif c == "beta":
        cfg.n, cfg.z, cfg.J, cfg.K_max, cfg.tol, cfg.per_term = args.n, args.z, args.radius_j, args.depth, args.tol, args.per_term
    elif c == "solve":
        cfg.cross_validate, cfg.trunc_N = args.cross_validate, args.trunc
    elif c == "riesz":
        cfg.parity, cfg.criterion, cfg.window, cfg.assert_basis = args.parity, args.criterion, args.window, args.assert_basis
    elif c == "asym":
        cfg.law = args.law
    elif c == "weights":
        cfg.weight_spec, cfg.check, cfg.kmax = args.family, args.check, args.kmax
    elif c == "reproduce":
        cfg.preset, cfg.preset_params = args.preset, dict(args.set)
    return cfg


def _fail(code: int, kind: str, exc: BaseException) -> int:
    print(json.dumps({"error": {"code": kind, "type": type(exc).__name__, "message": str(exc)}}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        config.validate()
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    try:
        env = run(config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return _fail(EXIT_COMPUTE, "computation", exc)
    text = emit(env, config.out_format)
    if config.out_path:
        with open(config.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config.assert_basis and env.payload.get("verdict") == "no_basis":
        return EXIT_NO_BASIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
