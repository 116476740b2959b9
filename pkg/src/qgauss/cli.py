"""``qgauss`` command line.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numeric or
domain error.  Reports go to stdout (or ``--out``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fourier, gaussian, moments, qms, serialize, verify
from .errors import QGaussError
from .gaussian import NoiseMatrix
from .states import parse_complex, parse_kv, parse_state

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dim(text):
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dimension {text!r}") from None
    if d < 2:
        raise argparse.ArgumentTypeError("dimension must be >= 2")
    return d


def _complex(text):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _state(text):
    try:
        return parse_state(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text):
    s = int(text)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


def _floats(text, k):
    vals = [float(v) for v in text.split(",")]
    if len(vals) not in k:
        raise ValueError(f"expected {' or '.join(map(str, k))} comma-separated numbers, got {text!r}")
    return vals


def parse_channel(text):
    """``NAME:ARGS`` to ``(name, params)`` for :func:`qgauss.qms.apply_channel_exact`.

    Grammar::

        coherent:u=RE,IM | squeeze:r=F,theta=F | bosonic:mu=M1,M2,c=C11,C12,C22
        | qms:z=RE,IM,t=F
    """
    name, _, rest = text.partition(":")
    kv = parse_kv(rest)
    try:
        if name == "coherent" and set(kv) == {"u"}:
            return name, {"u": parse_complex(kv["u"])}
        if name == "squeeze" and "r" in kv and set(kv) <= {"r", "theta"}:
            zeta = float(kv["r"]) * np.exp(1j * float(kv.get("theta", 0.0)))
            return name, {"zeta": complex(zeta)}
        if name == "bosonic" and "c" in kv and set(kv) <= {"mu", "c"}:
            c = _floats(kv["c"], (3, 4))
            C = [[c[0], c[1]], [c[1], c[2]]] if len(c) == 3 else [c[:2], c[2:]]
            mu = _floats(kv.get("mu", "0,0"), (2,))
            return name, {"noise": NoiseMatrix(np.array(C), np.array(mu))}
        if name == "qms" and set(kv) == {"z", "t"}:
            t = float(kv["t"])
            if t < 0:
                raise ValueError("t must be nonnegative")
            return name, {"z": parse_complex(kv["z"]), "t": t}
    except (TypeError, ValueError) as exc:
        if isinstance(exc, QGaussError):
            raise
        raise ValueError(f"bad channel {text!r}: {exc}") from None
    raise ValueError(f"bad channel {text!r}")


def _params_json(g):
    return {"w": [g.w.real, g.w.imag], "S": np.asarray(g.S).tolist()}


def build_parser():
    p = _Parser(prog="qgauss", description="One-mode Gaussian states in truncated Fock space.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("charfn", help="characteristic function on a rectangular grid (CSV)")
    c.add_argument("--state", type=_state, required=True)
    c.add_argument("--grid", required=True, help="RE_MIN,RE_MAX,IM_MIN,IM_MAX,N")
    c.add_argument("--dim", type=_dim, default=60)
    c.add_argument("--out", default="-")
    c.add_argument("--exact", action="store_true", help="closed form from (w, S); Gaussian states only")

    ch = sub.add_parser("channel", help="apply a Gaussian channel; prints (w, S) JSON")
    ch.add_argument("--apply", required=True, dest="channel", help="NAME:ARGS")
    ch.add_argument("--state", type=_state, required=True)
    mode = ch.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--dim", type=_dim)
    ch.add_argument("--out", default="-")

    m = sub.add_parser("moments", help="three-route moment report (JSON)")
    m.add_argument("--state", type=_state, required=True)
    m.add_argument("--z", type=_complex, required=True)
    m.add_argument("--n-max", type=int, default=6)
    m.add_argument("--dim", type=_dim, default=60)
    m.add_argument("--out", default="-")

    v = sub.add_parser("verify", help="run a verification suite (JSON report)")
    v.add_argument("--suite", choices=[*verify.SUITES, "all"], default="all")
    v.add_argument("--dim", type=_dim, default=60)
    v.add_argument("--tol-scale", type=float, default=1.0)
    v.add_argument("--seed", type=_seed, default=0)

    s = sub.add_parser("simulate", help="Monte Carlo simulation")
    ssub = s.add_subparsers(dest="model", required=True, parser_class=_Parser)
    q = ssub.add_parser("qms", help="Brownian Weyl semigroup")
    q.add_argument("--state", type=_state, required=True)
    q.add_argument("--z", type=_complex, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--samples", type=int, default=10_000)
    q.add_argument("--seed", type=_seed, default=0)
    q.add_argument("--dim", type=_dim, default=60)
    q.add_argument("--out", default="-")
    return p


def cmd_charfn(args):
    try:
        re0, re1, im0, im1, n = _floats(args.grid, (5,))
    except ValueError as exc:
        raise UsageError(f"--grid: {exc}") from None
    if n < 1 or n != int(n):
        raise UsageError("--grid: N must be a positive integer")
    n = int(n)
    X, Y = np.meshgrid(np.linspace(re0, re1, n), np.linspace(im0, im1, n), indexing="ij")
    z = (X + 1j * Y).ravel()
    if args.exact:
        g = args.state.gaussian()
        if g is None:
            raise UsageError(f"--exact needs a Gaussian state, got {args.state.kind!r}")
        F = gaussian.char_fn(g, z)
    else:
        F = fourier.qft(args.state.density_matrix(args.dim), z)
    serialize.write_text(args.out, serialize.charfn_csv(z, F))
    return EXIT_OK


def cmd_channel(args):
    try:
        name, params = parse_channel(args.channel)
    except QGaussError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    g = args.state.gaussian()
    exact = args.exact or (args.dim is None and g is not None)
    if exact:
        if g is None:
            raise UsageError(f"--exact needs a Gaussian state, got {args.state.kind!r}")
        out = qms.apply_channel_exact(g, name, params)
    else:
        rho = qms.apply_channel_matrix(args.state.density_matrix(args.dim or 60), name, params)
        out = moments.estimate_wS(rho)
    serialize.write_text(args.out, serialize.dumps(_params_json(out)))
    return EXIT_OK


def cmd_moments(args):
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    rho = args.state.density_matrix(args.dim)
    report = moments.moment_report(rho, args.z, args.n_max, params=args.state.gaussian())
    serialize.write_text(args.out, serialize.dumps([r.to_json() for r in report]))
    return EXIT_OK


def cmd_verify(args):
    if not (args.tol_scale > 0 and math.isfinite(args.tol_scale)):
        raise UsageError("--tol-scale must be a positive number")
    report = verify.run_suite(args.suite, args.dim, args.tol_scale, args.seed)
    serialize.write_text("-", serialize.dumps(report.to_json()))
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_simulate(args):
    rho = args.state.density_matrix(args.dim)
    cfg = qms.McConfig(args.samples, args.seed, args.t, args.z)
    result = qms.qms_mc(rho, cfg)
    serialize.write_text(args.out, serialize.dumps(result.to_json()))
    return EXIT_OK


_COMMANDS = {
    "charfn": cmd_charfn,
    "channel": cmd_channel,
    "moments": cmd_moments,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
}


# options whose values may start with '-' (e.g. --grid -2,2,-2,2,41)
_VALUE_OPTIONS = {"--grid", "--z", "--apply", "--state", "--t"}


def _glue_values(argv):
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    """Execute one invocation and return its exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qgauss: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QGaussError, ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        print(f"qgauss: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
