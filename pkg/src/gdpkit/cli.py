"""Command-line front end: ``gdpkit <verb> [options]``.

Exit status is 0 on success, 2 on usage or input-file errors and 1 when a
computation reaches a negative verdict (mu above the search ceiling). The
verdict is still printed.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import compose, gdpt, identify, profiles, transform

FORMATS = ("csv", "json", "pretty")
FORMAT_ENV = "GDPKIT_FORMAT"
CURVE_POINTS = 256
CURVE_START = 1e-3


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_profile_args(p):
    g = p.add_argument_group("profile")
    g.add_argument("--family", choices=("laplace", "sgd", "icea", "pure", "gaussian", "optimal"))
    g.add_argument("--profile-file", help="CSV with header eps,delta")
    g.add_argument("--eps-pure", type=float, help="laplace: sensitivity/scale")
    g.add_argument("--sensitivity", type=float, default=1.0)
    g.add_argument("--scale", type=float)
    g.add_argument("--A", type=float, default=2.0)
    g.add_argument("--B", type=float, default=1.0)
    g.add_argument("--sigma", type=float, default=2.0)
    g.add_argument("--m", type=int, default=20)
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--eps0", type=float, help="pure / optimal: per-step eps")
    g.add_argument("--k", type=int, default=1, help="optimal: number of compositions")
    g.add_argument("--mu", type=float, help="gaussian: mu")
    g.add_argument("--refine", action="store_true", help="tighten with the implication order")


def _build_profile(a):
    if (a.family is None) == (a.profile_file is None):
        raise UsageError("give exactly one of --family and --profile-file")
    if a.profile_file is not None:
        try:
            p = profiles.load_profile_csv(a.profile_file)
        except OSError as e:
            raise UsageError(f"cannot read {a.profile_file}: {e.strerror}") from None
        except profiles.ProfileFormatError as e:
            raise UsageError(f"{a.profile_file}: {e}") from None
    elif a.family == "laplace":
        if a.scale is not None:
            p = profiles.laplace_profile(sensitivity=a.sensitivity, scale=a.scale)
        else:
            p = profiles.laplace_profile(2.0 if a.eps_pure is None else a.eps_pure)
    elif a.family == "sgd":
        p = profiles.sgd_profile(a.A, a.B, a.sigma)
    elif a.family == "icea":
        p = profiles.icea_profile(a.m, a.n)
    elif a.family == "pure":
        p = profiles.pure_dp_profile(_need(a.eps0, "--eps0"))
    elif a.family == "gaussian":
        p = profiles.gaussian_profile(_need(a.mu, "--mu"))
    else:
        p = compose.optimal_profile_pure(_need(a.eps0, "--eps0"), a.k)
    if a.refine:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", profiles.RefinementWarning)
            p = profiles.refine(p)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    return p


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this family")
    return value


def _num(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return _num(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)):
            yield key, ";".join(_num(x) if not isinstance(x, (list, tuple)) else ":".join(map(_num, x)) for x in v)
        else:
            yield key, _num(v)


def _emit_record(rec, fmt, out):
    if fmt == "json":
        out.write(json.dumps(_jsonable(rec), indent=2, sort_keys=False) + "\n")
        return
    pairs = list(_flatten(rec))
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow([k for k, _ in pairs])
        w.writerow([v for _, v in pairs])
    else:
        width = max(len(k) for k, _ in pairs)
        for k, v in pairs:
            out.write(f"{k.ljust(width)}  {v}\n")


def _emit_table(header, rows, fmt, out, meta=None):
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) for v in r])
    elif fmt == "json":
        rec = dict(meta or {})
        rec["columns"] = list(header)
        rec["rows"] = [list(r) for r in rows]
        out.write(json.dumps(_jsonable(rec), indent=2) + "\n")
    else:
        if meta:
            for k, v in _flatten(meta):
                out.write(f"# {k}: {v}\n")
        cells = [list(header)] + [[_num(v) for v in r] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
        for row in cells:
            out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")


def _curve_eps(eps_max):
    if not eps_max > CURVE_START:
        raise UsageError(f"--eps-max must exceed {CURVE_START}")
    return np.geomspace(CURVE_START, eps_max, CURVE_POINTS)


def _cmd_profile(a, fmt, out):
    p = _build_profile(a)
    eps = _curve_eps(a.eps_max)
    vals = np.asarray(p(eps))
    _emit_table(["eps", "value"], zip(eps.tolist(), vals.tolist()), fmt, out, {"profile": p.label})
    return 0


def _cmd_gdpt(a, fmt, out):
    p = _build_profile(a)
    eps = _curve_eps(a.eps_max)
    try:
        lo, hi = gdpt.gdpt_curve(p, eps, margin=a.margin, mu_max=a.mu_max)
    except gdpt.CeilingExceeded as e:
        return _ceiling(e, fmt, out)
    mid = 0.5 * (lo + hi)
    _emit_table(["eps", "value"], zip(eps.tolist(), mid.tolist()), fmt, out, {"profile": p.label})
    return 0


def _ceiling(e, fmt, out):
    _emit_record({"verdict": "ceiling_exceeded", "eps": e.eps, "delta": e.delta, "mu_max": e.mu_max}, fmt, out)
    print(f"error: {e}", file=sys.stderr)
    return 1


def _measure(p, a):
    cfg = gdpt.MeasurementConfig(eps_h=a.eps_h, c=a.c, mu_max=a.mu_max, seed=a.seed, strategy=a.strategy)
    return gdpt.head_measure(p, cfg)


def _cmd_measure(a, fmt, out):
    p = _build_profile(a)
    try:
        r = _measure(p, a)
    except gdpt.CeilingExceeded as e:
        return _ceiling(e, fmt, out)
    _emit_record({"profile": p.label, **r.to_dict()}, fmt, out)
    return 0


def _cmd_identify(a, fmt, out):
    p = _build_profile(a)
    th = identify.TrendThresholds(converge_rel=a.converge_rel, diverge_growth=a.diverge_growth)
    if a.numeric:
        est = identify.tail_limit(p, th, numeric=True)
        verdict = "gdp" if est.finite else ("not_gdp" if est.trend == "diverging" else "inconclusive")
        cls = identify.Classification(verdict, est.mu_t, est)
    else:
        cls = identify.classify(p, th)
    rec = {"profile": p.label, **cls.to_dict()}
    if a.check_mu is not None:
        q = identify.HeadTailQuery(a.boundary, a.check_mu, a.side)
        rec["condition"] = {
            "side": a.side,
            "boundary_eps": a.boundary,
            "mu": a.check_mu,
            "result": identify.check_condition(p, q, a.c, mu_max=a.mu_max, seed=a.seed, thresholds=th),
        }
    _emit_record(rec, fmt, out)
    return 0


def _cmd_amplify(a, fmt, out):
    p = _build_profile(a)
    if a.gamma is None and a.clip_eps_h is None:
        raise UsageError("give --gamma and/or --clip-eps-h")
    if a.clip_eps_h is not None:
        p = transform.clip_rectify(p, transform.ClipRectifySpec(a.clip_eps_h))
    if a.gamma is not None:
        p = transform.poisson_subsample(p, transform.SubsampleSpec(a.gamma))
    cls = identify.classify(p)
    rec = {"profile": p.label, "verdict": cls.verdict, "mu_t": cls.mu_lower_bound}
    try:
        r = _measure(p, a)
    except gdpt.CeilingExceeded as e:
        rec.update({"measurement": "ceiling_exceeded", "eps": e.eps, "delta": e.delta, "mu_max": e.mu_max})
        _emit_record(rec, fmt, out)
        print(f"error: {e}", file=sys.stderr)
        return 1
    rec.update(r.to_dict())
    _emit_record(rec, fmt, out)
    return 0


def _cmd_compose(a, fmt, out):
    if a.mus is None:
        raise UsageError("--mus is required")
    mus = a.mus * a.repeat
    mu = compose.gdp_compose(mus)
    rec = {"mu": mu}
    if a.deltas:
        if not mu > 0:
            raise UsageError("composed mu is 0; every delta is met at eps = 0")
        rec["eps"] = {f"{d:g}": compose.eps_for_gdp(mu, d) for d in a.deltas}
    _emit_record(rec, fmt, out)
    return 0


def _cmd_table(a, fmt, out):
    s = compose.CompositionScenario(a.eps, a.k, tuple(a.deltas))
    cfg = gdpt.MeasurementConfig(eps_h=a.eps_h, c=a.c, mu_max=a.mu_max, seed=a.seed)
    try:
        rep = compose.build_report(s, cfg, curve_points=a.curve_points)
    except gdpt.CeilingExceeded as e:
        return _ceiling(e, fmt, out)
    if fmt == "csv":
        out.write(rep.to_csv())
    elif fmt == "json":
        out.write(json.dumps(_jsonable(rep.to_dict()), indent=2) + "\n")
    else:
        header, *rows = list(csv.reader(io.StringIO(rep.to_csv())))
        _emit_table(header, rows, fmt, out, {"eps": s.eps, "k": s.k})
    return 0


def _parser():
    top = argparse.ArgumentParser(prog="gdpkit", description="Gaussian differential privacy accounting.")
    top.add_argument("--format", choices=FORMATS, help=f"output format (default from ${FORMAT_ENV})")
    sub = top.add_subparsers(dest="verb", required=True, metavar="verb")

    def measurement(p, eps_h):
        p.add_argument("--eps-h", type=float, default=eps_h)
        p.add_argument("--c", type=float, default=1000.0)
        p.add_argument("--mu-max", type=float, default=gdpt.DEFAULT_MU_MAX)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--strategy", choices=("naive", "shuffled"), default="shuffled")

    def fmt_arg(p):
        p.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)

    p = sub.add_parser("profile", help="sample a privacy profile")
    _add_profile_args(p)
    p.add_argument("--eps-max", type=float, default=20.0)
    fmt_arg(p)

    p = sub.add_parser("gdpt", help="sample the GDP transformation of a profile")
    _add_profile_args(p)
    p.add_argument("--eps-max", type=float, default=20.0)
    p.add_argument("--margin", type=float, default=1e-9)
    p.add_argument("--mu-max", type=float, default=gdpt.DEFAULT_MU_MAX)
    fmt_arg(p)

    p = sub.add_parser("measure", help="bracket the optimal mu on [0, eps_h]")
    _add_profile_args(p)
    measurement(p, 10.0)
    fmt_arg(p)

    p = sub.add_parser("identify", help="classify a profile as GDP or not")
    _add_profile_args(p)
    p.add_argument("--numeric", action="store_true", help="ignore known analytic limits")
    p.add_argument("--converge-rel", type=float, default=0.01)
    p.add_argument("--diverge-growth", type=float, default=0.10)
    p.add_argument("--check-mu", type=float, help="also test the head/tail condition for this mu")
    p.add_argument("--boundary", type=float, default=100.0, help="eps_h for head, eps_t for tail")
    p.add_argument("--side", choices=("head", "tail"), default="head")
    p.add_argument("--c", type=float, default=1000.0)
    p.add_argument("--mu-max", type=float, default=gdpt.DEFAULT_MU_MAX)
    p.add_argument("--seed", type=int, default=0)
    fmt_arg(p)

    p = sub.add_parser("amplify", help="subsample and/or clip-and-rectify, then measure")
    _add_profile_args(p)
    p.add_argument("--gamma", type=float, help="Poisson sampling rate")
    p.add_argument("--clip-eps-h", type=float, help="head horizon for clip-and-rectify")
    measurement(p, 100.0)
    fmt_arg(p)

    p = sub.add_parser("compose", help="compose GDP guarantees")
    p.add_argument("--mus", type=_floats)
    p.add_argument("--repeat", type=int, default=1, help="repeat the --mus list this many times")
    p.add_argument("--deltas", type=_floats, help="also report eps for these deltas")
    fmt_arg(p)

    p = sub.add_parser("table", help="k-fold composition table across accountants")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--deltas", type=_floats, default=[1e-1, 1e-2, 1e-3, 1e-4])
    p.add_argument("--curve-points", type=int, default=64)
    measurement(p, 10.0)
    fmt_arg(p)
    return top


_DEFAULT_FORMAT = {"profile": "csv", "gdpt": "csv", "table": "csv"}
_COMMANDS = {
    "profile": _cmd_profile,
    "gdpt": _cmd_gdpt,
    "measure": _cmd_measure,
    "identify": _cmd_identify,
    "amplify": _cmd_amplify,
    "compose": _cmd_compose,
    "table": _cmd_table,
}


def main(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = _parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    fmt = a.format or os.environ.get(FORMAT_ENV) or _DEFAULT_FORMAT.get(a.verb, "json")
    if fmt not in FORMATS:
        print(f"error: {FORMAT_ENV}={fmt!r} is not one of {', '.join(FORMATS)}", file=sys.stderr)
        return 2
    buf = io.StringIO()
    try:
        code = _COMMANDS[a.verb](a, fmt, buf)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
