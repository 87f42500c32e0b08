"""Command line front end.

Subcommands: validate, diamond, fidelity, continuity, tradeoff, and
experiment {separation | randomizing | sweep}. Channels come from JSON
files in the ChannelFile schema (see serialize). Human-readable output
goes to stdout; --out writes the machine-readable report (JSON, or CSV
for experiment tables with --format csv).

Exit codes: 0 success, 1 numerical failure (solver breakdown or a
violated bound), 2 validation failure (file is not a channel), 64 usage.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .continuity import verify_continuity
from .errors import (
    BadParameters,
    ChancalcError,
    DimensionMismatch,
    InvalidState,
    NotAFactorization,
    NotCP,
    NotCPTP,
    NotHermiticityPreserving,
)
from .experiments import (
    _plain,
    experiment_randomizing,
    experiment_separation,
    experiment_sweep,
)
from .linalg import hermitian_part, partial_trace
from .metrics import DEFAULT_MULTISTART, channel_fidelity, diamond_norm
from .serialize import load_channel
from .tradeoff import verify_tradeoff

EX_OK = 0
EX_NUMERICAL = 1
EX_INVALID = 2
EX_USAGE = 64

CONTINUITY_SLACK = 1e-6
TRADEOFF_SLACK = 1e-5


class _UsageError(Exception):
    pass


class _ValidationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run() owns the code."""

    def error(self, message):
        raise _UsageError(message)


def _load(path):
    try:
        return load_channel(path)
    except (BadParameters, NotCPTP, NotCP, InvalidState) as exc:
        raise _ValidationFailure(f"{path}: {exc}") from exc


def _emit(args, payload) -> None:
    """Write the machine-readable report when --out was given."""
    if not getattr(args, "out", None):
        return
    if getattr(args, "format", "json") == "csv":
        raise _UsageError("--format csv is only available for experiment reports")
    with open(args.out, "w") as fh:
        json.dump(_plain(payload), fh, indent=2)
        fh.write("\n")


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, (bool, np.bool_)):
        return "yes" if v else "no"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _print_table(columns, rows) -> None:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [
        max(len(c), *(len(row[i]) for row in cells)) if cells else len(c)
        for i, c in enumerate(columns)
    ]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip())
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip())


def _zero_safe(x: float, digits: int = 6) -> float:
    """Round for display; maps -0.0 to 0.0 so boundary values print clean."""
    return round(float(x), digits) + 0.0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        T = _load(args.channel)
    except _ValidationFailure as exc:
        print(f"not a channel: {exc}")
        _emit(args, {"valid": False, "reason": str(exc)})
        return EX_INVALID
    J = hermitian_part(T.choi)
    w = np.linalg.eigvalsh(J)
    red = partial_trace(J, (T.d_in, T.d_out), keep=1)
    tp_dev = float(np.abs(red - np.eye(T.d_in)).max())
    print(f"valid channel: {T.d_in} -> {T.d_out}, Kraus rank {len(T.kraus)}")
    print(f"min Choi eigenvalue {_zero_safe(w[0]):.6f}")
    print(f"trace preservation deviation {tp_dev:.3e}")
    _emit(
        args,
        {
            "valid": True,
            "d_in": T.d_in,
            "d_out": T.d_out,
            "kraus_rank": len(T.kraus),
            "min_choi_eigenvalue": float(w[0]),
            "tp_deviation": tp_dev,
        },
    )
    return EX_OK


def cmd_diamond(args) -> int:
    A = _load(args.channel)
    if args.other is not None:
        B = _load(args.other)
        lin = A.base - B.base
        what = "diamond distance"
    else:
        lin = A.base
        what = "diamond norm"
    res = diamond_norm(
        lin,
        method=args.method,
        multistart=args.multistart,
        seed=args.seed,
        tol=args.tol,
        jobs=args.jobs,
    )
    print(f"{what} {res.value:.9f}   (method {args.method})")
    cert = res.certificate
    if "sdp_gap" in cert:
        print(f"sdp gap {cert['sdp_gap']:.3e}, status {cert['status']}")
    if args.method == "both":
        print(f"variational value {cert['variational_value']:.9f}, "
              f"agreed {str(bool(cert['agreed'])).lower()}")
    _emit(args, {"value": res.value, "method": args.method, "certificate": cert})
    return EX_OK


def cmd_fidelity(args) -> int:
    T1, T2 = _load(args.channel), _load(args.other)
    F, witness, U, info = channel_fidelity(
        T1, T2, multistart=args.multistart, seed=args.seed, with_stats=True
    )
    print(f"channel fidelity {F:.9f}")
    print(f"duality gap {info['duality_gap']:.3e}")
    _emit(
        args,
        {
            "fidelity": F,
            "duality_gap": info["duality_gap"],
            "lower_bound": info["lower_bound"],
        },
    )
    return EX_OK


def cmd_continuity(args) -> int:
    T1, T2 = _load(args.channel), _load(args.other)
    rep = verify_continuity(
        T1, T2, multistart=args.multistart, seed=args.seed, tol=args.tol,
        jobs=args.jobs,
    )
    ineq = rep.inequalities
    print(f"dilation gap {rep.gap:.9f}")
    print(f"cb distance  {rep.cb:.9f}")
    print(f"fidelity     {rep.fidelity:.9f}")
    print(f"gap^2 <= cb   residual {ineq['left']:+.3e}")
    print(f"cb <= 2 gap   residual {ineq['right']:+.3e}")
    print(f"Bures identity deviation {ineq['identity']:.3e}")
    ok = (
        ineq["left"] >= -CONTINUITY_SLACK
        and ineq["right"] >= -CONTINUITY_SLACK
        and ineq["identity"] <= CONTINUITY_SLACK
    )
    print("bounds hold" if ok else "BOUND VIOLATED")
    _emit(
        args,
        {
            "gap": rep.gap,
            "cb": rep.cb,
            "fidelity": rep.fidelity,
            "inequalities": dict(ineq),
            "holds": bool(ok),
        },
    )
    return EX_OK if ok else EX_NUMERICAL


def cmd_tradeoff(args) -> int:
    T = _load(args.channel)
    rep = verify_tradeoff(
        T, multistart=args.multistart, seed=args.seed, tol=args.tol,
        jobs=args.jobs,
    )
    ineq = rep.inequalities
    print(f"cb distance of environment to a constant  {rep.cb_env:.9f}")
    print(f"best decoding distance bd                 {rep.best_decode:.9f}")
    print(f"bd^2/4 <= cb_env   residual {ineq['left']:+.3e}")
    print(f"cb_env <= 2 sqrt(bd)   residual {ineq['right']:+.3e}")
    ok = ineq["left"] >= -TRADEOFF_SLACK and ineq["right"] >= -TRADEOFF_SLACK
    print("bounds hold" if ok else "BOUND VIOLATED")
    _emit(
        args,
        {
            "cb_env": rep.cb_env,
            "best_decode": rep.best_decode,
            "inequalities": dict(ineq),
            "rounds": rep.details["rounds"],
            "holds": bool(ok),
        },
    )
    return EX_OK if ok else EX_NUMERICAL


def cmd_experiment(args) -> int:
    if args.which == "separation":
        rep = experiment_separation(
            nu_max=args.nu_max,
            seed=args.seed,
            tol=args.tol,
            multistart=args.multistart,
            jobs=args.jobs,
        )
        ok = rep.verdicts["induced_all_ok"] and rep.verdicts["diamond_all_ok"]
    elif args.which == "randomizing":
        rep = experiment_randomizing(
            args.nu,
            args.mu,
            args.trials,
            eps_report=not args.no_eps,
            seed=args.seed,
            ascent_starts=args.eps_starts,
            jobs=args.jobs,
        )
        ok = rep.verdicts["witness_all_ok"]
    else:
        rep = experiment_sweep(
            args.pairs,
            dims=(args.dim, args.d_env),
            seed=args.seed,
            tol=args.tol,
            multistart=args.multistart,
            jobs=args.jobs,
        )
        ok = rep.verdicts["all_ok"]
    print(f"experiment {rep.name}  (seed {rep.seed}, {rep.wall_time_s:.2f}s)")
    _print_table(rep.columns, rep.rows)
    for key, val in rep.verdicts.items():
        print(f"{key}: {_fmt(val) if not isinstance(val, dict) else json.dumps(_plain(val))}")
    if getattr(args, "out", None):
        if args.format == "csv":
            with open(args.out, "w") as fh:
                fh.write("\n".join(rep.csv_lines()) + "\n")
        else:
            with open(args.out, "w") as fh:
                json.dump(rep.to_dict(), fh, indent=2)
                fh.write("\n")
    return EX_OK if ok else EX_NUMERICAL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--tol", type=float, default=1e-9, help="solver tolerance")
    common.add_argument(
        "--multistart", type=int, default=DEFAULT_MULTISTART,
        help="starts for variational searches",
    )
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--out", help="write machine-readable report here")
    common.add_argument(
        "--format", choices=("json", "csv"), default="json",
        help="report format for --out (csv for experiment tables only)",
    )

    parser = _Parser(
        prog="chancalc",
        description="numerical calculus for finite-dimensional quantum channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a channel file")
    p.add_argument("channel", help="ChannelFile JSON path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "diamond", parents=[common],
        help="diamond norm of a channel or of a difference of two",
    )
    p.add_argument("channel")
    p.add_argument("other", nargs="?", default=None)
    p.add_argument(
        "--method", choices=("sdp", "variational", "both"), default="sdp"
    )
    p.set_defaults(func=cmd_diamond)

    p = sub.add_parser(
        "fidelity", parents=[common], help="operational fidelity of two channels"
    )
    p.add_argument("channel")
    p.add_argument("other")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser(
        "continuity", parents=[common],
        help="dilation gap against cb distance for two channels",
    )
    p.add_argument("channel")
    p.add_argument("other")
    p.set_defaults(func=cmd_continuity)

    p = sub.add_parser(
        "tradeoff", parents=[common],
        help="information-disturbance bounds for one channel",
    )
    p.add_argument("channel")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("experiment", parents=[common], help="preset studies")
    p.add_argument("which", choices=("separation", "randomizing", "sweep"))
    p.add_argument("--nu-max", type=int, default=8, help="separation: largest nu")
    p.add_argument("--nu", type=int, default=16, help="randomizing: dimension")
    p.add_argument("--mu", type=int, default=32, help="randomizing: unitaries")
    p.add_argument("--trials", type=int, default=20, help="randomizing: trials")
    p.add_argument(
        "--eps-starts", type=int, default=64,
        help="randomizing: ascent starts for the epsilon estimate",
    )
    p.add_argument(
        "--no-eps", action="store_true",
        help="randomizing: skip the epsilon estimate",
    )
    p.add_argument("--pairs", type=int, default=100, help="sweep: channel pairs")
    p.add_argument("--dim", type=int, default=2, help="sweep: system dimension")
    p.add_argument("--d-env", type=int, default=4, help="sweep: Kraus rank cap")
    p.set_defaults(func=cmd_experiment)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except _ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_INVALID
    except BadParameters as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (
        NotCPTP,
        NotCP,
        DimensionMismatch,
        NotHermiticityPreserving,
        NotAFactorization,
        InvalidState,
    ) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EX_INVALID
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (ChancalcError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EX_NUMERICAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
