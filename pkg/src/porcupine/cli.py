"""Batch command line: ``porcupine <command> [--family cf.json] [options]``.

Exit status: 0 success, 1 analysis-negative outcome (validation failure,
no kink, construction not found), 2 usage or configuration error.
JSON output keeps a fixed key order and rounds floats to 12 significant
digits, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .domains import (approximations, classify_fiber, domain_at_depth,
                      nontrivial_family)
from .fiber_maps import CANONICAL, ConstructionError, ParameterError, pair_from_dict, validate
from .itinerary import Interval, PreconditionError, expanding_fixed_point, periodic_point_near, sweep
from .skew3d import (EscapeError, HorseshoeModel, Point3, lift_periodic, spine, trajectory,
                     verify_cycle)
from .spectrum import (ORBIT_COLUMNS, NotFoundError, default_threads, enumerate_orbits,
                       finite_time_exponent, fixed_points, gap_estimate, near_zero_negative,
                       near_zero_positive, spectrum_sample)
from .symbolic import Word, parse_seq
from .thermo import phase_transition, pressure_curve

SIG = 12
FORMATS = ("json", "csv", "jsonl")


class UsageError(Exception):
    """Bad command line or configuration (exit 2)."""


class Negative(Exception):
    """The analysis ran but its outcome is negative (exit 1); carries the payload."""

    def __init__(self, payload, message: str):
        super().__init__(message)
        self.payload = payload


# ------------------------------------------------------------ formatting

def _num(v):
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return None
        return float(f"{v:.{SIG}g}")
    return v


def clean(obj):
    """Recursively round floats and turn tuples into lists, keeping key order."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return _num(obj)


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, allow_nan=False) + "\n"


def _cell(v):
    v = _num(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return f"{v:.{SIG}g}"
    return v


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def to_jsonl(rows) -> str:
    return "".join(json.dumps(clean(r), allow_nan=False) + "\n" for r in rows)


def progress(msg: str) -> None:
    print(f"[porcupine] {msg}", file=sys.stderr, flush=True)


# ------------------------------------------------------------ config

def load_family(source: str | None) -> dict:
    if source is None:
        return dict(CANONICAL)
    text = source
    if not source.lstrip().startswith("{"):
        if not os.path.isfile(source):
            raise UsageError(f"family file not found: {source}")
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed family JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("family JSON must be an object")
    return doc


def build_model(doc: dict, args) -> HorseshoeModel:
    m = dict(doc.get("model") or {})
    if getattr(args, "sigma_s", None) is not None:
        m["sigma_s"] = args.sigma_s
    if getattr(args, "sigma_u", None) is not None:
        m["sigma_u"] = args.sigma_u
    try:
        return HorseshoeModel(Fraction(str(m.get("sigma_s", "1/3"))),
                              Fraction(str(m.get("sigma_u", "3"))))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad horseshoe parameters: {exc}") from None


def _interval(lo: float, hi: float) -> Interval:
    if not lo < hi:
        raise UsageError("need lo < hi")
    return Interval(lo, hi)


def _seq(text: str):
    try:
        return parse_seq(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _word(text: str) -> Word:
    try:
        return Word.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------ commands
# Each returns (payload, rows, columns); rows feed csv/jsonl output.

def cmd_validate(pair, args, ctx):
    rep = validate(pair, resolution=args.resolution, tolerance=args.tolerance)
    payload = rep.to_dict()
    rows = [c.to_dict() for c in rep.checks]
    out = (payload, rows, ("name", "passed", "margin", "witness", "detail"))
    if not rep.all_pass:
        raise Negative(out, f"conditions failed: {', '.join(rep.failures)}")
    return out


def cmd_lyap(pair, args, ctx):
    if (args.seq is None) == (args.word is None):
        raise UsageError("give exactly one of --seq or --word")
    src = _seq(args.seq) if args.seq is not None else _word(args.word)
    val = finite_time_exponent(pair, src, args.x, args.n)
    row = {"itinerary": str(src), "x": args.x, "n": args.n, "exponent": val}
    return row, [row], ("itinerary", "x", "n", "exponent")


def cmd_fixed_points(pair, args, ctx):
    orbs = fixed_points(pair, _word(args.word), grid=args.grid)
    rows = [o.to_dict() for o in orbs]
    return {"word": args.word, "orbits": rows}, rows, ORBIT_COLUMNS[:-1]


def cmd_domain(pair, args, ctx):
    d = classify_fiber(pair, _seq(args.seq), args.max_depth, args.width_tol)
    row = d.to_dict()
    return row, [row], ("seq", "depth", "lo", "hi", "bound", "status", "reason")


def cmd_fiber(pair, args, ctx):
    seq = _seq(args.seq)
    apps = approximations(pair, seq, args.depth)
    rows = [{"depth": m, "lo": J.lo, "hi": J.hi, "width": J.width}
            for m, J in enumerate(apps, start=1)]
    return {"seq": str(seq), "approximations": rows}, rows, ("depth", "lo", "hi", "width")


def cmd_family(pair, args, ctx):
    J = _interval(args.lo, args.hi)
    seqs = nontrivial_family(pair, J, None if args.right is None else _word(args.right),
                             count=args.count, levels=args.levels)
    rows = []
    for s in seqs:
        dom = domain_at_depth(pair, s.left_core)
        rows.append({"seq": str(s), "lo": dom.lo, "hi": dom.hi, "contains_J": dom.contains(J, 0.0)})
    return {"J": [J.lo, J.hi], "sequences": rows}, rows, ("seq", "lo", "hi", "contains_J")


def cmd_sweep(pair, args, ctx):
    H = _interval(args.lo, args.hi)
    res = sweep(pair, H)
    payload = {"H": [H.lo, H.hi], "word": str(res.word), "m": res.m, "k": res.k,
               "prefix_used": res.prefix_used,
               "chain_length": 0 if res.chain is None else res.chain.i_J,
               "image": [res.final.lo, res.final.hi]}
    if args.fixed_point:
        orb = expanding_fixed_point(pair, H)
        payload["expanding_fixed_point"] = orb.to_dict()
    return payload, [payload], ("word", "m", "k", "prefix_used", "chain_length")


def cmd_near_zero(pair, args, ctx):
    fn = near_zero_negative if args.sign == "negative" else near_zero_positive
    try:
        orb = fn(pair, args.eps, m_max=args.m_max)
    except NotFoundError as exc:
        best = None if exc.best is None else exc.best.to_dict()
        raise Negative(({"found": False, "best": best}, [], ()), str(exc)) from None
    row = dict(orb.to_dict(), period=orb.period, residual=orb.residual)
    return row, [row], ("word", "fix", "multiplier", "exponent", "stability", "period")


def _enum(pair, n, ctx):
    progress(f"enumerating periodic orbits up to period {n} on {ctx['threads']} thread(s)")
    t0 = time.perf_counter()
    enumerate_orbits(pair, n, threads=ctx["threads"])
    progress(f"enumeration done in {time.perf_counter() - t0:.1f} s")


def cmd_gap(pair, args, ctx):
    _enum(pair, args.nmax, ctx)
    g = gap_estimate(pair, args.nmax, threads=ctx["threads"])
    payload = g.to_dict()
    rows = payload["history"]
    out = (payload, rows, ("n", "beta_tilde_n"))
    if not g.margin > 0:
        raise Negative(out, "no spectral gap at this depth")
    return out


def cmd_spectrum(pair, args, ctx):
    _enum(pair, args.nmax, ctx)
    entries = spectrum_sample(pair, args.nmax, threads=ctx["threads"])
    rows = [e.to_dict() for e in entries]
    return {"n_max": args.nmax, "orbits": rows}, rows, ORBIT_COLUMNS


def cmd_pressure(pair, args, ctx):
    _enum(pair, args.n, ctx)
    c = pressure_curve(pair, args.t_lo, args.t_hi, args.steps, args.n, args.theta,
                       threads=ctx["threads"])
    rows = [{"t": t, "pressure": v, "slope": c.slopes[i] if i < len(c.slopes) else None}
            for i, (t, v) in enumerate(zip(c.t_grid, c.values))]
    return c.to_dict(), rows, ("t", "pressure", "slope")


def cmd_transition(pair, args, ctx):
    _enum(pair, args.n, ctx)
    k = phase_transition(pair, args.n, args.t_lo, args.t_hi, args.theta, threads=ctx["threads"])
    g = gap_estimate(pair, args.n, threads=ctx["threads"])
    payload = dict(k.to_dict(), log_beta=math.log(pair.beta), beta_tilde_n=g.beta_tilde_n,
                   n=args.n)
    out = (payload, [payload], ("t_Q", "D_minus", "D_plus", "jump", "detected"))
    if not k.detected:
        raise Negative(out, "no kink detected")
    return out


def cmd_spine(pair, args, ctx):
    model = ctx["model"]
    rows = [spine(model, pair, _seq(s), args.max_depth, args.width_tol).to_dict()
            for s in args.seq]
    return {"model": model.to_dict(), "spines": rows}, rows, \
        ("seq", "xs", "xu", "lo", "hi", "status")


def cmd_cycle(pair, args, ctx):
    rep = verify_cycle(ctx["model"], pair, samples=args.samples)
    payload = rep.to_dict()
    out = (payload, payload["checks"], ("name", "passed", "detail"))
    if not rep.ok:
        raise Negative(out, "cycle checks failed")
    return out


def cmd_periodic_near(pair, args, ctx):
    orb = periodic_point_near(pair, args.x, args.eps)
    lifted = lift_periodic(ctx["model"], pair, orb)
    row = dict(lifted.to_dict(), period=orb.period, distance=abs(orb.fix - args.x))
    return row, [row], ("word", "x", "multiplier", "index", "period", "distance")


def cmd_orbit(pair, args, ctx):
    try:
        p = Point3(Fraction(args.xs), Fraction(args.xu), args.x)
    except (ValueError, ZeroDivisionError, ParameterError) as exc:
        raise UsageError(f"bad start point: {exc}") from None
    rows = list(trajectory(ctx["model"], pair, p, args.steps))
    payload = {"model": ctx["model"].to_dict(), "trajectory": rows}
    out = (payload, rows, ("t", "xs", "xu", "x", "rectangle"))
    if rows and rows[-1].get("event") == "escape":
        raise Negative(out, f"orbit escaped at t = {rows[-1]['t']}")
    return out


COMMANDS = {
    "validate": cmd_validate, "lyap": cmd_lyap, "fixed-points": cmd_fixed_points,
    "domain": cmd_domain, "fiber": cmd_fiber, "family": cmd_family, "sweep": cmd_sweep,
    "near-zero": cmd_near_zero, "gap": cmd_gap, "spectrum": cmd_spectrum,
    "pressure": cmd_pressure, "transition": cmd_transition, "spine": cmd_spine,
    "cycle": cmd_cycle, "periodic-near": cmd_periodic_near, "orbit": cmd_orbit,
}


# ------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--family", help="family JSON file or inline JSON object (default: canonical)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: PORCUPINE_THREADS or all cores)")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="porcupine", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"porcupine {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        return p

    p = add("validate", "check the defining conditions of a family")
    p.add_argument("--resolution", type=float, default=1e-4)
    p.add_argument("--tolerance", type=float, default=0.0)

    p = add("lyap", "finite-time fiber exponent along an itinerary")
    p.add_argument("--seq")
    p.add_argument("--word")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("fixed-points", "fixed points of the composition along a word")
    p.add_argument("--word", required=True)
    p.add_argument("--grid", type=int, default=2048)

    for name, help_ in (("domain", "classify the admissible domain of a sequence"),
                        ("spine", "spines of the porcupine over base points")):
        p = add(name, help_)
        p.add_argument("--seq", required=True, action="append" if name == "spine" else "store")
        p.add_argument("--max-depth", type=int, default=256)
        p.add_argument("--width-tol", type=float, default=1e-8)

    p = add("fiber", "nested finite-depth domains of a sequence")
    p.add_argument("--seq", required=True)
    p.add_argument("--depth", type=int, default=64)

    p = add("family", "sequences whose domains contain [lo, hi]")
    p.add_argument("--lo", type=float, default=0.3)
    p.add_argument("--hi", type=float, default=0.4)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--right", default=None, help="right core word (tail all zeros)")

    p = add("sweep", "word sending [lo, hi] over the fundamental domain")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--fixed-point", action="store_true",
                   help="also report the expanding fixed point of the chain map")

    p = add("near-zero", "periodic orbit with exponent close to zero")
    p.add_argument("--sign", choices=("negative", "positive"), required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--m-max", type=int, default=400)

    for name, help_ in (("gap", "largest non-excluded periodic exponent"),
                        ("spectrum", "periodic exponents up to a period")):
        p = add(name, help_)
        p.add_argument("--nmax", type=int, default=12)

    for name, help_ in (("pressure", "periodic-orbit pressure on a grid"),
                        ("transition", "phase transition of the pressure")):
        p = add(name, help_)
        p.add_argument("--n", type=int, default=12)
        p.add_argument("--t-lo", type=float, default=-3.0)
        p.add_argument("--t-hi", type=float, default=1.0)
        p.add_argument("--theta", type=float, default=None)
        if name == "pressure":
            p.add_argument("--steps", type=int, default=200)

    p = add("cycle", "finite checks of the heterodimensional cycle")
    p.add_argument("--samples", type=int, default=20)

    p = add("periodic-near", "index-2 periodic point near a fiber coordinate")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.025)

    p = add("orbit", "trajectory of a point of the cube")
    p.add_argument("--xs", required=True, help="base stable coordinate (decimal or p/q)")
    p.add_argument("--xu", required=True, help="base unstable coordinate (decimal or p/q)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)

    for name in ("spine", "cycle", "periodic-near", "orbit"):
        sp = sub.choices[name]
        sp.add_argument("--sigma-s", default=None)
        sp.add_argument("--sigma-u", default=None)
    return ap


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.threads
    return default_threads()


def _render(fmt, command, family, payload, rows, columns) -> str:
    if fmt == "json":
        return dumps({"command": command, "family": family, "result": payload})
    if fmt == "jsonl":
        return to_jsonl(rows)
    if not columns:
        return ""
    return to_csv(columns, rows)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"porcupine: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:          # --help / --version
        return int(exc.code or 0)
    status = 0
    try:
        doc = load_family(args.family)
        family = {k: doc[k] for k in ("beta", "lambda", "c1", "shape_controls", "model") if k in doc}
        pair = pair_from_dict(doc)
        ctx = {"threads": _threads(args)}
        if args.command in ("spine", "cycle", "periodic-near", "orbit"):
            ctx["model"] = build_model(doc, args).require(pair)
        try:
            payload, rows, columns = COMMANDS[args.command](pair, args, ctx)
        except Negative as neg:
            (payload, rows, columns), status = neg.payload, 1
            print(f"porcupine: {neg}", file=sys.stderr)
        except (NotFoundError, ConstructionError, EscapeError) as exc:
            print(f"porcupine: {exc}", file=sys.stderr)
            payload, rows, columns, status = {"error": str(exc)}, [], (), 1
    except (UsageError, ParameterError, PreconditionError) as exc:
        print(f"porcupine: error: {exc}", file=sys.stderr)
        return 2
    text = _render(args.format, args.command, family, payload, rows, columns)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
