"""Command-line front end: ``python -m convdom <command> [flags]``.

Every command prints a JSON summary on stdout.  With ``--out DIR`` it also
writes its CSV/JSON artifacts and an echo of the effective configuration
(``config.json``) into ``DIR``.

Exit codes: 0 success, 2 usage or precondition error, 3 numerical failure
(singular sections, non-converging envelopes, failed property checks),
4 resource limit.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .algebra import (SupportOverflow, adjoint, cd_norm, compose, random_cdmatrix, scale,
                      shift, to_dense, toeplitz)
from .envelopes import Weight, grs_diagnostic, induced_weight_v, ratio_condition, ugrs_diagnostic
from .groups import (GroupError, GroupSpec, OutOfRadius, ResourceLimit, growth_fit,
                     parse_group)
from .inversion import (INCONSISTENT, NotContractive, SingularSection, TestMatrixSpec,
                        envelope_convergence_study, lp_condition_experiment, study_sections)
from .representations import (PowerIterationWarning, check_intertwining, interior_bivector,
                              opnorm_estimate, specrad_L_estimate)
from .verify import LEVELS, run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_RESOURCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# -- argument helpers ---------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_coefficients(text: str, group: GroupSpec) -> dict:
    """``"1,1"`` (Z1 coefficients at 0, 1, ...) or ``"0=2;1=1;-1=1"`` (element=value pairs)."""
    if "=" not in text:
        if group.name != "Z1":
            raise UsageError("plain coefficient lists are only accepted on Z1; use elem=value;...")
        return {(k,): v for k, v in enumerate(_float_list(text))}
    out = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        elem, _, val = part.partition("=")
        out[group.parse_element(elem)] = complex(val.strip().replace("i", "j"))
    return out


def _group(args, max_radius: int | None) -> GroupSpec:
    if args.max_radius is not None:
        max_radius = args.max_radius
    try:
        return parse_group(args.group, max_radius=max_radius,
                           allow_out_of_hypothesis=args.allow_out_of_hypothesis)
    except GroupError as exc:
        raise UsageError(str(exc)) from None


def _budget(args, needed: int) -> int | None:
    """Radius budget large enough for ``needed`` on enumeration-cheap groups."""
    kind = args.group.strip().upper()
    return max(needed, 12) if kind.startswith("Z") or kind == "F2" else max(needed, 10)


def _weight(args) -> Weight | None:
    if args.weight is None:
        return None
    try:
        return Weight.parse(args.weight)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    io.write_json(p / "config.json", cfg)
    return p


# -- commands -------------------------------------------------------------------------

def cmd_ball(args) -> dict:
    g = _group(args, _budget(args, args.n))
    sizes = [(n, len(g.ball(n))) for n in range(1, args.n + 1)]
    try:
        D = growth_fit(sizes, min_radius=1, min_points=2)
    except ValueError:
        D = None
    out = _outdir(args)
    result = {"group": g.name, "sizes": [s for _, s in sizes], "growth_degree": D,
              "fit": "centered log-log, radii >= 1"}
    if out:
        io._write_csv(out / "ball.csv", ["n", "size"], sizes)
        io.write_json(out / "growth_fit.json", {"group": g.name, "growth_degree": D})
    return result


def cmd_weights(args) -> dict:
    w = _weight(args)
    if w is None:
        raise UsageError("weights needs --weight")
    g = _group(args, _budget(args, args.table_n))
    x = g.generators[0]
    grs = grs_diagnostic(w, g, x, args.N)
    ugrs = ugrs_diagnostic(w, g, args.N)
    ratio = ratio_condition(w, g, args.table_n, args.ratio_c)
    v = induced_weight_v(w, g, args.table_n)
    result = {
        "group": g.name, "weight": str(w),
        "grs": {"x": g.format_element(x), "verdict": grs.verdict, "method": grs.method,
                "last": float(grs.values[-1])},
        "ugrs": {"verdict": ugrs.verdict, "method": ugrs.method, "last": float(ugrs.values[-1])},
        "ratio": {"max": ratio.max_ratio, "within": ratio.within, "method": ratio.method},
        "v": [[n, val] for n, val in v.table() if n >= 0],
    }
    out = _outdir(args)
    if out:
        full = dict(result, grs_values=grs.values, ugrs_values=ugrs.values,
                    ratios={str(k): r for k, r in ratio.ratios.items()})
        io.write_json(out / "weights.json", full)
    return result


def cmd_verify(args) -> dict:
    g = _group(args, None)
    if g.name == "H3":
        g = g.with_max_radius(max(g.max_radius, 12))
    checks = run_suite(g, args.seed, args.level)
    result = {"group": g.name, "seed": args.seed, "level": args.level,
              "checks": [c.to_dict() for c in checks], "ok": all(c.ok for c in checks)}
    out = _outdir(args)
    if out:
        io.write_json(out / "verify.json", result)
    if not result["ok"]:
        raise NumericalFailure(result)
    return result


def _spec_from_args(args, g: GroupSpec) -> TestMatrixSpec:
    return TestMatrixSpec(g, shape=args.shape, rate=args.rate, s=args.s,
                          support_radius=args.support_radius, mass=args.mass,
                          phases=args.phases, hermitian=args.hermitian, identity=args.identity)


def cmd_invert(args) -> dict:
    radii = sorted(args.radii)
    margin = args.margin
    g = _group(args, _budget(args, 2 * max(radii) + 2 * args.support_radius))
    w = _weight(args)
    if args.toeplitz:
        coeffs = parse_coefficients(args.toeplitz, g)
        A = toeplitz(g, coeffs, max(radii))
        report = study_sections(lambda n: A, g, radii, margin, w, args.jobs)
        report.spec = {"group": g.name, "toeplitz": {g.format_element(z): [c.real, c.imag]
                                                     for z, c in _sorted_coeffs(coeffs)}}
        source = A
    else:
        spec = _spec_from_args(args, g)
        report = envelope_convergence_study(spec, radii, margin, args.seed, w, args.jobs)
        source = spec
    result = report.to_dict()
    if args.p:
        table = lp_condition_experiment(source, args.p, radii, seed=args.seed, jobs=args.jobs)
        result["conditions"] = table.to_dict()
    out = _outdir(args)
    if out:
        io.write_json(out / "report.json", result)
        for n, env in zip(report.radii, report.envelopes):
            io.write_envelope_curve(out / f"envelope_r{n}.csv", env)
    if report.verdict == INCONSISTENT:
        raise NumericalFailure(result)
    return result


def _sorted_coeffs(coeffs: dict):
    return sorted(((z, complex(c)) for z, c in coeffs.items()))


def cmd_spectral(args) -> dict:
    g = _group(args, None)
    reach = 2 ** args.kmax * 2 * 2 + args.section
    g = g.with_max_radius(max(g.max_radius, reach)) if g.kind != "heisenberg" else g
    if args.toeplitz:
        f = toeplitz(g, parse_coefficients(args.toeplitz, g), args.section)
    elif args.shift:
        f = shift(g, g.parse_element(args.shift), args.section)
    else:
        f = random_cdmatrix(g, 1, 1, np.random.default_rng(args.seed))
        f = scale(1.0 / cd_norm(f), f)
    est = specrad_L_estimate(compose(adjoint(f), f), args.kmax)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PowerIterationWarning)
        op = opnorm_estimate(to_dense(f, g.ball(args.section)))
    est.opnorm = op * op
    est.notes += [f"operator norm: {w.message} (last iterate reported)" for w in caught
                  if issubclass(w.category, PowerIterationWarning)]
    result = est.to_dict()
    result["notes"] = est.notes
    out = _outdir(args)
    if out:
        io.write_json(out / "spectral.json", est.to_dict())
    return result


def cmd_intertwine(args) -> dict:
    g = _group(args, None)
    if g.name == "H3":
        g = g.with_max_radius(max(g.max_radius, 12))
    rng = np.random.default_rng(args.seed)
    ball = g.ball(args.radius)
    diffs = []
    for _ in range(args.trials):
        f = random_cdmatrix(g, args.diag_radius, args.radius + 1, rng)
        xi = interior_bivector(ball, args.support, rng)
        diffs.append(check_intertwining(f, xi))
    result = {"group": g.name, "radius": args.radius, "trials": args.trials,
              "diffs": diffs, "max": max(diffs), "ok": max(diffs) <= args.tol}
    out = _outdir(args)
    if out:
        io.write_json(out / "intertwine.json", result)
    if not result["ok"]:
        raise NumericalFailure(result)
    return result


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="Z1", help="Z1, Z2, Z3, H3 or F2")
    common.add_argument("--weight", default=None, help='e.g. "poly:s=2", "exp:c=0.7"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="directory for CSV/JSON artifacts")
    common.add_argument("--jobs", type=int, default=1, help="radii processed in parallel")
    common.add_argument("--allow-out-of-hypothesis", action="store_true",
                        help="permit groups without polynomial growth (F2)")
    common.add_argument("--max-radius", type=int, default=None, help="ball enumeration budget")

    p = argparse.ArgumentParser(prog="convdom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ball", parents=[common], help="ball sizes and growth degree")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_ball)

    s = sub.add_parser("weights", parents=[common], help="weight diagnostics")
    s.add_argument("--N", type=int, default=1000, help="length of the GRS/UGRS sequences")
    s.add_argument("--table-n", type=int, default=8, help="radius for ratios and v(n)")
    s.add_argument("--ratio-c", type=float, default=None)
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("verify", parents=[common], help="randomized property suites")
    s.add_argument("--level", choices=sorted(LEVELS), default="quick")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("invert", parents=[common], help="finite-section inverse envelopes")
    s.add_argument("--radii", type=_int_list, required=True)
    s.add_argument("--margin", type=int, default=None)
    s.add_argument("--toeplitz", default=None, help='constant diagonals, "2,1" or "0=2;1=1;-1=1"')
    s.add_argument("--shape", choices=["geometric", "polynomial"], default="geometric")
    s.add_argument("--rate", type=float, default=0.5)
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--support-radius", type=int, default=2)
    s.add_argument("--mass", type=float, default=0.5)
    s.add_argument("--phases", choices=["random", "positive", "toeplitz"], default="random")
    s.add_argument("--hermitian", action="store_true")
    s.add_argument("--identity", type=float, default=1.0)
    s.add_argument("--p", type=lambda t: [math.inf if v.strip() == "inf" else int(v)
                                          for v in t.split(",")], default=None,
                   help='condition numbers, e.g. "1,2,inf"')
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("spectral", parents=[common], help="spectral-radius estimates")
    s.add_argument("--toeplitz", default=None)
    s.add_argument("--shift", default=None, help="element z for f = lambda(z)")
    s.add_argument("--kmax", type=int, default=4)
    s.add_argument("--section", type=int, default=None,
                   help="radius of the section used for the operator norm")
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("intertwine", parents=[common], help="intertwining checks")
    s.add_argument("--trials", type=int, default=25)
    s.add_argument("--radius", type=int, default=5)
    s.add_argument("--support", type=int, default=2)
    s.add_argument("--diag-radius", type=int, default=2)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_intertwine)
    return p


def _defaults(args):
    if getattr(args, "command", None) == "spectral" and args.section is None:
        args.section = 200 if args.group.strip().upper() == "Z1" else 6
    if getattr(args, "command", None) == "intertwine" and args.group.strip().upper() == "H3":
        if args.radius == 5:
            args.radius, args.support = 4, 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    _defaults(args)
    try:
        result = args.func(args)
    except NumericalFailure as exc:
        print(io.dumps(exc.args[0]))
        return EXIT_NUMERIC
    except (ResourceLimit, SupportOverflow, OutOfRadius) as exc:
        print(f"convdom: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SingularSection as exc:
        print(f"convdom: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, GroupError, NotContractive, ValueError) as exc:
        print(f"convdom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(io.dumps(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
