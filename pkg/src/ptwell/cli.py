"""Command-line front end: ``ptwell {scan,critical,trace,crossings,atlas,verify}``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .continuation import (Branch, _is_mpoint, complex_continuation, detect_ep, mpoint_crossing_xi,
                           track_branch)
from .curves import (atlas_min, critical_sequence, crossing_points, is_monotone,
                     numeric_limit_xi, trace_curve)
from .errors import ParameterError, PtwellError
from .partition import classify, partition, rational_approx
from .secular import ModelParams
from .verify import run_verify, with_replaced_ids

SVG_NOTE = "SVG diagrams use raw (k, xi) and (xi, E) coordinates; no display rescaling."
TRACE_NOTE = ("Branch 0 starts at the requested xi=0 level k0.  When k0 sits on a vertical "
              "M line it stays real for all xi; the fragile branch crossing it is traced "
              "as well, so the exceptional point reported is the one that branch reaches.")


def _float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {s!r}")
    return v


def _range(s):
    parts = s.split(":")
    if len(parts) == 1:
        v = _float(parts[0])
        return v, v, None
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected lo:hi or lo:hi:step, got {s!r}")
    vals = [_float(x) for x in parts]
    return vals[0], vals[1], vals[2] if len(vals) == 3 else None


def _tol(s):
    name, _, val = s.partition("=")
    return name, _float(val)


def _params(args, xi=0.0):
    return ModelParams(args.a, xi)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(payload):
    sys.stdout.write(io.dumps(payload))


# scan --------------------------------------------------------------------

def cmd_scan(args):
    _params(args)
    if args.samples < 2:
        raise ParameterError("--samples must be >= 2")
    part = partition(args.a, args.k_max)
    curves = [trace_curve(sub, part.a, args.samples) for sub in part.intervals]
    rows = []
    for c in curves:
        rows.extend((c.interval.index, c.kind.value, k, x) for k, x in zip(c.k, c.xi))
    rows.sort(key=lambda r: (r[0], r[2]))
    out = _out(args)
    io.write_csv(out / "curves.csv", io.CURVE_FIELDS, rows)
    mpts = []
    for m in part.mpoints:
        mpts.append({"k": m.k, "l": m.l, "line_kind": classify(m).value,
                     "xi_cross": mpoint_crossing_xi(m.k, part.a)})
    doc = {
        "manifest": io.manifest("scan", {"a": args.a, "k_max": args.k_max,
                                         "samples_per_interval": args.samples}, [SVG_NOTE]),
        "rational": None if part.rational is None else [part.rational.P, part.rational.Q],
        "curves": [{
            "interval_id": c.interval.index, "lo": c.interval.lo, "hi": c.interval.hi,
            "lo_type": c.interval.lo_type.value, "hi_type": c.interval.hi_type.value,
            "line_kind": c.kind.value, "xi_max": c.xi_max, "k_at_max": c.k_at_max,
        } for c in curves],
        "mpoints": mpts,
        "files": ["curves.csv"] + (["scan.svg"] if args.svg else []),
    }
    io.write_json(out / "curves.json", doc)
    if args.svg:
        _scan_svg(out / "scan.svg", curves, part, args.k_max)
    return {"command": "scan", "curves": len(curves), "mpoints": len(mpts)}


def _scan_svg(path, curves, part, k_max):
    finite = [x for c in curves for x in c.xi if math.isfinite(x)]
    # robust-mixed curves diverge; clip the view at a few fragile heights
    y_top = max(4.0, min(max(finite, default=4.0), 40.0))
    plot = io.SvgPlot((0.0, k_max), (0.0, 1.1 * y_top), x_label="k", y_label="xi")
    colours = {"fragile": "steelblue", "robust-mixed": "darkred"}
    for c in curves:
        plot.polyline(c.k, c.xi, kind=c.kind.value, stroke=colours[c.kind.value],
                      data_interval=c.interval.index)
    for m in part.mpoints:
        plot.vline(m.k, kind="robust-vertical", stroke="green", stroke_dasharray="4 2")
    io.write_svg(path, [plot], title="xi(k)")


# critical ----------------------------------------------------------------

def cmd_critical(args):
    _params(args)
    if args.n_max < 1:
        raise ParameterError("--n-max must be >= 1")
    seq = critical_sequence(args.a, args.n_max, args.samples)
    entries = [{"n": e.n, "xi_crit": e.xi_crit, "k_merge": e.k_merge, "k_low": e.k_low,
                "k_high": e.k_high, "xi_cross": e.xi_cross} for e in seq.entries]
    mono, inv = is_monotone(seq) if seq.entries else (True, None)
    best = min(entries, key=lambda e: e["xi_crit"]) if entries else None
    doc = {
        "manifest": io.manifest("critical", {"a": args.a, "n_max": args.n_max,
                                             "samples_per_interval": args.samples},
                                ["Entries are the first n_max merging level pairs, lowest "
                                 "first; n is the 0-based excitation of the upper level."]),
        "rational": None if seq.rational is None else [seq.rational.P, seq.rational.Q],
        "entries": entries,
        "monotone": mono,
        "first_inversion": inv,
        "min_entry": best,
    }
    io.write_json(_out(args) / "critical.json", doc)
    return {"command": "critical", "entries": len(entries), "monotone": mono}


# trace -------------------------------------------------------------------

def _snap_k0(k0):
    n = int(round(2 * k0 / math.pi))
    if n < 1 or abs(k0 - n * math.pi / 2) > 1e-6:
        raise ParameterError(f"k0={k0!r} is not an unperturbed level n*pi/2")
    return n * math.pi / 2


def _schedule(xi_max, steps):
    if not xi_max > 0:
        raise ParameterError("--xi-max must be > 0")
    if steps < 2:
        raise ParameterError("--steps must be >= 2")
    return np.linspace(0.0, xi_max, steps + 1)


def _fold_partner(a, br, sched, k0, next_id):
    """Find the xi=0 level whose branch halts at the same fold as ``br``."""
    k_h = br.k[-1]
    for d in sorted({j * math.pi / 2 for j in range(-6, 7) if j}, key=abs):
        k1 = k0 + d
        if k1 <= 0 or _is_mpoint(k1, a):
            continue
        try:
            other = track_branch(a, k1, sched, branch_id=next_id)
        except PtwellError:
            continue
        if other.halted and abs(other.k[-1] - k_h) < 1e-2 and abs(other.xi[-1] - br.xi[-1]) < 0.5:
            return other
    return None


def _fold_from(a, br, sched, k0, branches):
    """Given a halted branch, locate its exceptional point and continue the pair."""
    partner = _fold_partner(a, br, sched, k0, len(branches))
    if partner is not None:
        branches.append(partner)
        pair = (br, partner)
    else:
        stub = Branch(len(branches), float("nan"))
        stub.append(br.xi[-1], br.u[-1], "real")
        pair = (br, stub)
    ep = detect_ep(a, pair, (0.0, float(sched[-1])))
    if ep is None:
        raise PtwellError(f"branch from k0={br.start_k} halted at xi={br.xi[-1]} without a fold")
    if ep.kind != "fold":
        return ep
    ids = (len(branches), len(branches) + 1)
    ep_c = with_replaced_ids(ep, ids)
    rest = [x for x in sched if x > ep.xi_c]
    b1, b2 = complex_continuation(a, ep_c, [ep.xi_c] + rest)
    branches.extend([b1, b2])
    return ep


def cmd_trace(args):
    p = _params(args)
    k0 = _snap_k0(args.k0)
    sched = _schedule(args.xi_max, args.steps)
    a = p.a
    branches = [track_branch(a, k0, sched, branch_id=0)]
    events, ep = [], None
    if _is_mpoint(k0, a):
        xc = mpoint_crossing_xi(k0, a)
        if xc is not None and xc <= args.xi_max:
            events.append({"kind": "crossing", "xi": xc, "k": k0, "branch_id": 0})
            for d in (-math.pi / 2, math.pi / 2, -math.pi, math.pi):
                k1 = k0 + d
                if k1 <= 0 or _is_mpoint(k1, a):
                    continue
                cand = track_branch(a, k1, sched, branch_id=1)
                if any(abs(km - k0) < 1e-9 for _, km in cand.crossings):
                    branches.append(cand)
                    break
    for br in list(branches):
        for xc, km in br.crossings:
            events.append({"kind": "crossing", "xi": xc, "k": km, "branch_id": br.id})
    for br in list(branches):
        if br.halted and ep is None:
            ep = _fold_from(a, br, sched, br.start_k, branches)
    rows = []
    for br in branches:
        for x, u, st in zip(br.xi, br.u, br.status):
            E = -u * u
            rows.append((br.id, x, u.real + 0.0, u.imag + 0.0, E.real + 0.0, E.imag + 0.0, st))
    rows.sort(key=lambda r: (r[0], r[1]))
    out = _out(args)
    io.write_csv(out / "branch.csv", io.BRANCH_FIELDS, rows)
    ep_doc = None
    if ep is not None:
        ep_doc = {"xi_c": ep.xi_c, "k_c": ep.k_c, "kind": ep.kind, "residual": ep.residual}
    events = sorted({(e["branch_id"], e["xi"], e["k"]): e for e in events}.values(),
                    key=lambda e: (e["xi"], e["branch_id"]))
    doc = {
        "manifest": io.manifest("trace", {"a": a, "k0": k0, "k0_requested": args.k0,
                                          "xi_max": args.xi_max, "steps": args.steps},
                                [TRACE_NOTE, SVG_NOTE]),
        "branches": [{"branch_id": b.id, "start_k": b.start_k, "halted": b.halted,
                      "points": len(b)} for b in branches],
        "exceptional_point": ep_doc,
        "crossings": events,
        "no_ep_in_range": ep is None,
    }
    io.write_json(out / "trace.json", doc)
    if args.svg:
        _trace_svg(out / "trace.svg", branches, ep, args.xi_max, events)
    return {"command": "trace", "branches": len(branches), "no_ep_in_range": ep is None}


def _trace_svg(path, branches, ep, xi_max, events):
    re_e = [e.real for b in branches for e in b.E]
    im_e = [e.imag for b in branches for e in b.E]
    im_top = max(1.0, max(abs(v) for v in im_e))
    top = io.SvgPlot((0.0, xi_max), (min(re_e), max(re_e)), x_label="xi", y_label="Re E")
    bottom = io.SvgPlot((0.0, xi_max), (-im_top, im_top), x_label="xi", y_label="Im E",
                        y_offset=420)
    for b in branches:
        st = "complex" if "complex" in b.status else "real"
        top.polyline(b.xi, b.E.real, kind=st, data_branch=b.id)
        bottom.polyline(b.xi, b.E.imag, kind=st, data_branch=b.id)
    if ep is not None:
        top.marker(ep.xi_c, ep.k_c**2, kind="exceptional-point", fill="red")
        bottom.marker(ep.xi_c, 0.0, kind="exceptional-point", fill="red")
    for e in events:
        top.marker(e["xi"], e["k"] ** 2, kind="crossing", fill="green")
    io.write_svg(path, [top, bottom], title="E(xi)")


# crossings ---------------------------------------------------------------

def cmd_crossings(args):
    _params(args)
    if args.l_max < 1:
        raise ParameterError("--l-max must be >= 1")
    r = rational_approx(args.a)
    notes, entries = [], []
    if r is None:
        notes.append("no rational detected: no M points, no crossings")
    else:
        for c in crossing_points(r, args.l_max):
            lim = numeric_limit_xi(r.value, c.k_cross)
            entries.append({"l": c.l, "P": c.P, "Q": c.Q, "k_cross": c.k_cross,
                            "xi_cross": c.xi_cross, "numeric_limit": lim,
                            "deviation": abs(lim - c.xi_cross) / c.xi_cross})
    doc = {
        "manifest": io.manifest("crossings", {"a": args.a, "l_max": args.l_max}, notes),
        "rational": None if r is None else [r.P, r.Q],
        "crossings": entries,
    }
    io.write_json(_out(args) / "crossings.json", doc)
    return {"command": "crossings", "crossings": len(entries)}


# atlas -------------------------------------------------------------------

def cmd_atlas(args):
    lo, hi, step = args.a
    step = step if step is not None else args.step
    if step is None:
        step = 1.0 if lo == hi else None
    if step is None or not step > 0:
        raise ParameterError("atlas needs a positive --step (or lo:hi:step)")
    res = atlas_min(lo, hi, step, args.n_max)
    rows = [(r.a, r.xi_min, r.n_min, r.error or "") for r in res.rows]
    out = _out(args)
    io.write_csv(out / "atlas.csv", io.ATLAS_FIELDS, rows)
    doc = {
        "manifest": io.manifest("atlas", {"a_lo": lo, "a_hi": hi, "step": step,
                                          "n_max": args.n_max}),
        "a_star": res.a_star, "xi_star": res.xi_star, "n_star": res.n_star,
        "grid_min": {"a": res.grid_a, "xi": res.grid_xi},
        "rows": len(rows),
        "failed": sum(1 for r in res.rows if r.error),
    }
    io.write_json(out / "atlas.json", doc)
    return {"command": "atlas", "rows": len(rows), "a_star": res.a_star, "xi_star": res.xi_star}


# verify ------------------------------------------------------------------

def cmd_verify(args):
    p = ModelParams(args.a, args.xi)
    if not args.k_max > 0:
        raise ParameterError("--k-max must be > 0")
    tol = dict(args.tol) if args.tol else None
    report = run_verify(p, args.k_max, tol)
    doc = {"manifest": io.manifest("verify", {"a": args.a, "xi": args.xi, "k_max": args.k_max,
                                              "tolerances": report["tolerances"]}),
           "report": report, "passed": report["passed"]}
    io.write_json(_out(args) / "verify.json", doc)
    return {"command": "verify", "passed": report["passed"], "violations": report["violations"]}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptwell", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", default=".", help="output directory")
        sp.set_defaults(func=fn)
        return sp

    sp = common("scan", cmd_scan, "spectral curves xi(k) per subinterval")
    sp.add_argument("--a", type=_float, required=True)
    sp.add_argument("--k-max", type=_float, default=12.0)
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--svg", action="store_true")

    sp = common("critical", cmd_critical, "critical couplings of merging pairs")
    sp.add_argument("--a", type=_float, required=True)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--samples", type=int, default=256)

    sp = common("trace", cmd_trace, "continue a level in xi through its exceptional point")
    sp.add_argument("--a", type=_float, required=True)
    sp.add_argument("--k0", type=_float, required=True)
    sp.add_argument("--xi-max", type=_float, default=8.0)
    sp.add_argument("--steps", type=int, default=400)
    sp.add_argument("--svg", action="store_true")

    sp = common("crossings", cmd_crossings, "closed-form crossing couplings at M points")
    sp.add_argument("--a", type=_float, required=True)
    sp.add_argument("--l-max", type=int, default=3)

    sp = common("atlas", cmd_atlas, "minimal critical coupling over a range of a")
    sp.add_argument("--a", type=_range, required=True, help="lo:hi or lo:hi:step")
    sp.add_argument("--step", type=_float, default=None)
    sp.add_argument("--n-max", type=int, default=8)

    sp = common("verify", cmd_verify, "oracle cross-checks and invariants")
    sp.add_argument("--a", type=_float, required=True)
    sp.add_argument("--xi", type=_float, default=0.0)
    sp.add_argument("--k-max", type=_float, default=12.0)
    sp.add_argument("--tol", type=_tol, action="append", help=argparse.SUPPRESS)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = args.func(args)
    except PtwellError as exc:
        err = {"schema": io.SCHEMA, "error": {"type": type(exc).__name__, "message": str(exc),
                                              "exit_code": exc.exit_code}}
        sys.stderr.write(io.dumps(err))
        return exc.exit_code
    _emit({"schema": io.SCHEMA, "result": summary})
    if summary.get("passed") is False:
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
