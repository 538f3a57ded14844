"""Command-line front end.

Exit codes: 0 when the requested analysis ran (verdicts, including "no" and
"indeterminate", never drive the exit status), 2 for malformed specs or
invalid usage, 3 when a spec without ``allow_non_cptp`` fails the CPTP check.

The default seed comes from ``CHAN_ATLAS_SEED`` and is overridden by
``--seed``; all randomness in the analyses derives from it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .channels import NotCptpError, identity_channel
from .entropy import entropy_additivity_gap, image_additivity_gap, min_output_entropy
from .formats import SpecFormatError, load_channel
from .pipeline import (
    _classification_stage,
    _fixed_point_stage,
    _image_stage,
    _jsonable,
    report_json,
    run_pipeline,
)
from .plotdata import boundary_rows, write_boundary_csv, write_boundary_svg

ENV_SEED = "CHAN_ATLAS_SEED"


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _build_parser():
    p = argparse.ArgumentParser(
        prog="chan-atlas",
        description="Analyze finite-dimensional quantum channels: image geometry, "
                    "classification, entropies, fixed points.")
    p.add_argument("--seed", type=_u64, default=None,
                   help=f"RNG seed (default: ${ENV_SEED} or 0)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="tolerance for classification verdicts (default 1e-9)")
    p.add_argument("--format", choices=("json", "text"), default="text",
                   help="output rendering (default text)")
    p.add_argument("--bits", action="store_true",
                   help="render floats bit-exactly (C99 hex) in text output")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sc = sub.add_parser("classify", help="CQ / eCQ / EB / image-additivity verdicts")
    sc.add_argument("spec")
    sc.set_defaults(func=cmd_classify)

    si = sub.add_parser("image", help="planar boundary samples (CSV, optional SVG)")
    si.add_argument("spec")
    si.add_argument("--out", required=True, help="CSV output path")
    si.add_argument("--svg", help="also render a cosmetic SVG here")
    si.add_argument("--points", type=int, default=256)
    si.set_defaults(func=cmd_image)

    sd = sub.add_parser("decompose", help="vertex detection and polytopic decomposition")
    sd.add_argument("spec")
    sd.add_argument("--directions", type=int, default=400)
    sd.set_defaults(func=cmd_decompose)

    se = sub.add_parser("entropy", help="minimal output entropies")
    se.add_argument("spec")
    se.add_argument("--p", type=float, action="append",
                    help="Renyi order, repeatable (default 1 and 2)")
    se.set_defaults(func=cmd_entropy)

    sa = sub.add_parser("additivity", help="minimal output entropy additivity gap")
    sa.add_argument("spec")
    sa.add_argument("--pair", required=True, help="spec of the partner channel")
    sa.add_argument("--p", type=float, action="append")
    sa.set_defaults(func=cmd_additivity)

    sg = sub.add_parser("image-additivity", help="joint versus product support gap")
    sg.add_argument("spec")
    sg.add_argument("--pair", help="partner spec (default: identity on d_in)")
    sg.add_argument("--directions", type=int, default=40)
    sg.set_defaults(func=cmd_image_additivity)

    sf = sub.add_parser("fixed-points", help="Cesaro projection and fixed-point blocks")
    sf.add_argument("spec")
    sf.set_defaults(func=cmd_fixed_points)

    sr = sub.add_parser("report", help="full pipeline report (canonical JSON)")
    sr.add_argument("spec")
    sr.add_argument("--out", help="write the report here instead of stdout")
    sr.add_argument("--timings", action="store_true",
                    help="attach wall-clock timings (breaks byte reproducibility)")
    sr.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.seed is None:
        env = os.environ.get(ENV_SEED, "")
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            print(f"error: {ENV_SEED}={env!r} is not an integer", file=sys.stderr)
            return 2
    try:
        args.func(args)
    except NotCptpError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except SpecFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


# -- rendering ----------------------------------------------------------


def _fmt_float(x, bits=False):
    if bits:
        return float(x).hex()
    return f"{float(x):.12g}"


def _text_lines(payload, prefix="", bits=False):
    lines = []
    for key, val in payload.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            lines.extend(_text_lines(val, prefix=f"{name}.", bits=bits))
        elif isinstance(val, float):
            lines.append(f"{name}: {_fmt_float(val, bits)}")
        elif isinstance(val, list) and val and all(isinstance(v, (int, float)) for v in val):
            lines.append(f"{name}: [" + ", ".join(
                _fmt_float(v, bits) if isinstance(v, float) else str(v) for v in val) + "]")
        elif isinstance(val, list) and val and all(isinstance(v, dict) for v in val):
            for i, v in enumerate(val):
                lines.extend(_text_lines(v, prefix=f"{name}[{i}].", bits=bits))
        elif isinstance(val, list):
            lines.append(f"{name}: {len(val)} item(s)")
        else:
            lines.append(f"{name}: {val}")
    return lines


def _emit(args, payload):
    payload = _jsonable(payload)
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(_text_lines(payload, bits=args.bits)))


# -- subcommands --------------------------------------------------------


def cmd_classify(args):
    t = load_channel(args.spec)
    _emit(args, _classification_stage(t, args.seed, 400, tol=args.tol))


def cmd_image(args):
    t = load_channel(args.spec)
    rows = boundary_rows(t, n_points=args.points)
    write_boundary_csv(args.out, rows)
    written = {"csv": args.out, "points": int(rows.shape[0])}
    if args.svg:
        write_boundary_svg(args.svg, rows)
        written["svg"] = args.svg
    _emit(args, written)


def cmd_decompose(args):
    t = load_channel(args.spec)
    _emit(args, _image_stage(t, args.seed, args.directions))


def cmd_entropy(args):
    t = load_channel(args.spec)
    ps = args.p or [1.0, 2.0]
    rows = []
    for p in ps:
        r = min_output_entropy(t, p=p, seed=args.seed)
        rows.append({"p": float(p), "value": r.value, "converged": r.converged})
    _emit(args, {"min_output": rows})


def cmd_additivity(args):
    t1 = load_channel(args.spec)
    t2 = load_channel(args.pair)
    ps = args.p or [1.0, 2.0]
    rows = []
    for p in ps:
        g = entropy_additivity_gap(t1, t2, p=p, seed=args.seed)
        rows.append({"p": float(p), "gap": g.gap,
                     "single_first": g.single_first.value,
                     "single_second": g.single_second.value,
                     "joint": g.joint.value})
    _emit(args, {"additivity": rows})


def cmd_image_additivity(args):
    t1 = load_channel(args.spec)
    t2 = load_channel(args.pair) if args.pair else identity_channel(t1.d_in)
    rep = image_additivity_gap(t1, t2, n_directions=args.directions, seed=args.seed)
    _emit(args, {"max_gap": rep.max_gap, "lhs": rep.lhs, "rhs": rep.rhs,
                 "certified_positive": rep.certified,
                 "n_directions": rep.n_directions})


def cmd_fixed_points(args):
    t = load_channel(args.spec)
    _emit(args, _fixed_point_stage(t, args.seed))


def cmd_report(args):
    t = load_channel(args.spec)
    report = run_pipeline(t, seed=args.seed, include_timings=args.timings)
    try:
        from .pipeline import validate_report

        validate_report(report)
    except ImportError:
        pass
    text = report_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"wrote report to {args.out}")
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
