"""Batch command-line front end.

    evlab gallery [--json]
    evlab scan    --op NAME [--param k=v ...] [--n N] --mu-min A --mu-max B [--steps S] [--out FILE]
    evlab refine  --op NAME --probe-mu MU [--n-list 50,100,200,400] [--out FILE]
    evlab check   --suite NAME [--seed K] [--out FILE]
    evlab oracle  --name NAME [--n-list ...] [--n N] [--mu MU] [--op NAME] [--out FILE]

Exit codes: 0 ok / consistent with predictions, 1 usage error, 2 numeric
failure, 3 computed verdict contradicts the predicted one (or a check failed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__, oracles
from .errors import EvlabError
from .gallery import DEFAULT_N, DEFAULT_PARAMS, OPERATOR_NAMES, PARAMETER_KEYS, Verdict, build
from .principles import (DEFAULT_THRESHOLDS, SKIPPED, STRONG_NEGATIVE, STRONG_POSITIVE, build_spectral_data,
                         refinement_study, scan)
from .report import dumps, make_report, window_pair, write_report
from .suites import SUITE_NAMES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3

DEFAULT_N_LIST = {
    "graph": (25, 50, 100, 200), "odd_order": (31, 63, 127, 255), "delay": (16, 32, 64, 128),
}
INTERVAL_N_LIST = (50, 100, 200, 400)

ORACLE_NAMES = ("dirichlet_green", "thermostat", "periodic_first_order", "neumann_constant")
ORACLE_OPERATOR = {"dirichlet_green": "dirichlet", "thermostat": "thermostat", "periodic_first_order": "odd_order"}
DECLARED_ORDER = 2.0
ORDER_SLACK = 0.3
SPECTRAL_TOL = 1e-6
IDENTITY_TOL = 1e-8

THRESHOLD_FLAGS = {
    "eps_cls": float, "uniform_low": float, "uniform_high": float, "divergent_growth": float,
    "min_doublings": int, "proximity_fraction": float, "collapse_ratio": float,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument validation


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _n_list(text):
    values = [_positive_int(t) for t in text.split(",") if t.strip()]
    if not values or len(set(values)) != len(values):
        raise argparse.ArgumentTypeError(f"need distinct positive integers, got {text!r}")
    return tuple(sorted(values))


def _param_value(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    try:
        return json.loads(text)
    except ValueError:
        return text


def parse_params(items):
    params = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = _param_value(value.strip())
    return params


def thresholds_from(args):
    overrides = {k: getattr(args, k) for k in THRESHOLD_FLAGS if getattr(args, k, None) is not None}
    th = replace(DEFAULT_THRESHOLDS, **overrides)
    if not (th.eps_cls >= 0 and 0 < th.uniform_low <= 1 <= th.uniform_high and th.divergent_growth > 1
            and th.min_doublings >= 1 and th.proximity_fraction >= 0 and 0 < th.collapse_ratio <= 1):
        raise UsageError(f"inconsistent thresholds: {th.as_dict()}")
    return th


def operator_spec(args):
    if args.op not in OPERATOR_NAMES:
        raise UsageError(f"--op must be one of {', '.join(OPERATOR_NAMES)}")
    params = parse_params(args.param)
    if args.edges is not None:
        if args.op != "graph":
            raise UsageError("--edges applies to --op graph only")
        params["edges"] = args.edges
    unknown = set(params) - set(PARAMETER_KEYS.get(args.op, ()))
    if unknown:
        raise UsageError(f"operator {args.op!r} takes no parameter(s) {sorted(unknown)}")
    return args.op, {**DEFAULT_PARAMS.get(args.op, {}), **params}


# ---------------------------------------------------------------------------
# prediction comparison

_SIDES = (("uniform_max", 1, STRONG_POSITIVE), ("uniform_antimax", -1, STRONG_NEGATIVE))


def scan_verdicts(op, rep):
    """Compare a scan with the predictions: a predicted principle needs a window on its side, a
    predicted failure needs zero strong points there.  Unsampled sides are not judged."""
    out = []
    for principle, side, strong in _SIDES:
        predicted = getattr(op.predicted, principle)
        sampled = [r for r in rep.records if side * (r.mu - rep.lambda0) > 0 and r.classification != SKIPPED]
        window = rep.right_window if side > 0 else rep.left_window
        n_strong = sum(r.classification == strong for r in sampled)
        if predicted == Verdict.UNTESTED or not sampled:
            consistent = None
        elif predicted == Verdict.HOLDS:
            consistent = window is not None
        else:
            consistent = n_strong == 0
        out.append({"principle": principle, "predicted": predicted.value, "sampled_points": len(sampled),
                    "strong_points": n_strong, "window": window_pair(window), "consistent": consistent})
    return out


def refine_verdicts(op, study, thresholds):
    """A predicted principle needs the margin on the probe's side to keep its strict sign and stay within
    the uniformity band under refinement; a predicted failure needs the opposite."""
    side = 1 if study.probe_mu > op.lambda0 else -1
    principle = "uniform_max" if side > 0 else "uniform_antimax"
    key = "lower_margin" if side > 0 else "upper_margin"
    values = np.array([getattr(m, key) for m in study.meshes])
    signed = side * values
    stable = bool(signed[0] > 0 and np.all(signed > 0)
                  and np.all((values / values[0] >= thresholds.uniform_low)
                             & (values / values[0] <= thresholds.uniform_high)))
    predicted = getattr(op.predicted, principle)
    consistent = None if predicted == Verdict.UNTESTED else stable == (predicted == Verdict.HOLDS)
    return [{"principle": principle, "predicted": predicted.value, "margin": key,
             "margin_values": values.tolist(), "margin_stable": stable, "refinement_verdict": study.verdict,
             "consistent": consistent}]


def _mismatch(verdicts):
    return any(v["consistent"] is False for v in verdicts)


# ---------------------------------------------------------------------------
# commands


def cmd_gallery(args):
    rows = []
    for name in OPERATOR_NAMES:
        op = build(name, 7 if name == "odd_order" else (16 if name == "delay" else None))
        rows.append({
            "name": name, "params": DEFAULT_PARAMS.get(name, {}), "parameter_keys": list(PARAMETER_KEYS.get(name, ())),
            "default_n": DEFAULT_N[name], "lambda0": op.lambda0, **op.predicted.as_dict(),
        })
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=2, default=float) + "\n")
        return EXIT_OK
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        params = ",".join(f"{k}={v}" for k, v in r["params"].items()) or "-"
        verdicts = []
        for key, label in (("uniform_max", "max"), ("uniform_antimax", "antimax")):
            if r[key] != "untested":
                verdicts.append(f"{label} {r[key]}")
        print(f"{r['name']:<{width}}  n={r['default_n']:<4} {params:<28} {'; '.join(verdicts) or 'no prediction':<28}"
              f"  ({r['notes']})")
    return EXIT_OK


def _config(args, **extra):
    base = {"command": args.command}
    base.update(extra)
    return base


def cmd_scan(args, th):
    name, params = operator_spec(args)
    op = build(name, args.n, **params)
    sd = build_spectral_data(op)
    mu_min = sd.lambda0 - sd.gap / 2 if args.mu_min is None else args.mu_min
    mu_max = sd.lambda0 + sd.gap / 2 if args.mu_max is None else args.mu_max
    if not mu_min < mu_max:
        raise UsageError(f"--mu-min must be below --mu-max ({mu_min} >= {mu_max})")
    rep = scan(op, mu_min, mu_max, args.steps, thresholds=th, spectral=sd)
    verdicts = scan_verdicts(op, rep)
    config = _config(args, op=name, params=params, n=op.grid.n, mu_min=mu_min, mu_max=mu_max, steps=args.steps,
                     thresholds=th.as_dict())
    doc = make_report(
        "scan", config, records=[r.as_dict() for r in rep.records],
        windows={"right": window_pair(rep.right_window), "left": window_pair(rep.left_window)},
        verdicts=verdicts, citations=[op.predicted.notes],
        checks=[{"lambda0": rep.lambda0, "gap": rep.gap,
                 "counts": {c: rep.count(c) for c in (STRONG_POSITIVE, STRONG_NEGATIVE, "mixed", SKIPPED)}}],
        ok=not _mismatch(verdicts))
    summary = (f"scan {name} n={op.grid.n}: lambda0={rep.lambda0:.6g} right window={window_pair(rep.right_window)} "
               f"left window={window_pair(rep.left_window)}")
    return doc, summary, (EXIT_MISMATCH if _mismatch(verdicts) else EXIT_OK), True


def cmd_refine(args, th):
    name, params = operator_spec(args)
    if args.probe_mu is None:
        raise UsageError("refine needs --probe-mu")
    n_list = args.n_list or DEFAULT_N_LIST.get(name, INTERVAL_N_LIST)
    for n in n_list:  # validate every mesh before computing anything
        build(name, n, **params)
    study = refinement_study(name, params, args.probe_mu, n_list, track=args.track, thresholds=th)
    op = build(name, n_list[0], **params)
    verdicts = refine_verdicts(op, study, th)
    config = _config(args, op=name, params=params, n_list=list(n_list), probe_mu=args.probe_mu, track=args.track,
                     thresholds=th.as_dict())
    checks = [{"verdict": study.verdict, "tracked": study.tracked, "ratios": list(study.ratios),
               "growth": list(study.growth), "meshes": [m.as_dict() for m in study.meshes]}]
    doc = make_report("refine", config, verdicts=verdicts, citations=[op.predicted.notes], checks=checks,
                      ok=not _mismatch(verdicts))
    summary = f"refine {name} at mu={args.probe_mu}: verdict {study.verdict} (growth {np.round(study.growth, 3).tolist()})"
    return doc, summary, (EXIT_MISMATCH if _mismatch(verdicts) else EXIT_OK), False


def cmd_check(args, th):
    if args.suite not in SUITE_NAMES:
        raise UsageError(f"--suite must be one of {', '.join(SUITE_NAMES)}")
    results = run_suite(args.suite, args.seed)
    checks = [{"suite": s, **rep.as_dict()} for s, rep in results]
    ok = all(rep.ok for _, rep in results)
    doc = make_report("check", _config(args, suite=args.suite, seed=args.seed), checks=checks, ok=ok)
    failed = [f"{s}/{rep.name}[{rep.details.get('operator', '')}]" for s, rep in results if not rep.ok]
    summary = f"check {args.suite}: {len(results) - len(failed)}/{len(results)} passed" + (
        f"; failed: {', '.join(failed)}" if failed else "")
    return doc, summary, (EXIT_OK if ok else EXIT_MISMATCH), False


def cmd_oracle(args, th):
    name = args.name
    if name not in ORACLE_NAMES:
        raise UsageError(f"--name must be one of {', '.join(ORACLE_NAMES)}")
    expected_op = ORACLE_OPERATOR.get(name)
    if args.op is not None and expected_op is not None and args.op != expected_op:
        raise UsageError(f"oracle {name!r} compares against operator {expected_op!r}, not {args.op!r}")
    params = parse_params(args.param)
    if name in ("dirichlet_green", "thermostat"):
        n_list = args.n_list or (50, 100, 200)
        if len(n_list) < 2:
            raise UsageError("a convergence study needs at least two meshes")
        kwargs = {}
        if name == "thermostat":
            kwargs["beta"] = float(params.pop("beta", DEFAULT_PARAMS["thermostat"]["beta"]))
            for n in n_list:
                build("thermostat", n, beta=kwargs["beta"])
        if params:
            raise UsageError(f"unknown oracle parameter(s) {sorted(params)}")
        fn = oracles.dirichlet_error if name == "dirichlet_green" else oracles.thermostat_error
        study = oracles.convergence_study(fn, n_list, **kwargs)
        ok = study["order"] >= DECLARED_ORDER - ORDER_SLACK
        result = {"oracle": name, **kwargs, **study, "declared_order": DECLARED_ORDER, "ok": ok}
        config = _config(args, name=name, n_list=list(n_list), params=kwargs)
        summary = f"oracle {name}: observed order {study['order']:.3f} (errors {study['errors']})"
    elif name == "periodic_first_order":
        n = args.n or DEFAULT_N["odd_order"]
        mu = 1.0 if args.mu is None else args.mu
        if mu == 0:
            raise UsageError("--mu must be nonzero")
        build("odd_order", n, ell=0)
        err = oracles.periodic_first_order_error(n, mu)
        ok = err <= SPECTRAL_TOL
        result = {"oracle": name, "n": n, "mu": mu, "sup_error": err, "tolerance": SPECTRAL_TOL, "ok": ok}
        config = _config(args, name=name, n=n, mu=mu)
        summary = f"oracle {name}: sup error {err:.3e} at n={n}, mu={mu}"
    else:
        op_name = args.op or "neumann"
        if op_name not in OPERATOR_NAMES:
            raise UsageError(f"--op must be one of {', '.join(OPERATOR_NAMES)}")
        op = build(op_name, args.n, **{**DEFAULT_PARAMS.get(op_name, {}), **params})
        ones = np.ones(op.n)
        scale = np.max(np.sum(np.abs(op.matrix), axis=1))
        if np.max(np.abs(op.matrix @ ones)) > 1e-10 * scale:
            raise UsageError(f"operator {op_name!r} does not annihilate constants")
        mu = -0.1 if args.mu is None else args.mu
        if mu == 0:
            raise UsageError("--mu must be nonzero")
        err = oracles.constant_identity_error(op, mu)
        ok = err <= IDENTITY_TOL
        result = {"oracle": name, "operator": op_name, "n": op.grid.n, "mu": mu, "sup_error": err,
                  "tolerance": IDENTITY_TOL, "ok": ok}
        config = _config(args, name=name, op=op_name, n=op.grid.n, mu=mu)
        summary = f"oracle {name} on {op_name}: sup error {err:.3e} at mu={mu}"
    doc = make_report("oracle", config, checks=[result], ok=ok)
    return doc, summary, (EXIT_OK if ok else EXIT_MISMATCH), False


COMMANDS = {"scan": cmd_scan, "refine": cmd_refine, "check": cmd_check, "oracle": cmd_oracle}


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser():
    p = _Parser(prog="evlab", description="Numerical lab for uniform (anti-)maximum principles.")
    p.add_argument("--version", action="version", version=f"evlab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gallery", help="list the operator gallery")
    g.add_argument("--json", action="store_true", help="machine-readable census")

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here (scan also writes a CSV beside it)")
        sp.add_argument("--json", action="store_true", help="print the full report to stdout")
        for flag, conv in THRESHOLD_FLAGS.items():
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag,
                            type=_positive_int if conv is int else _finite, default=None)

    def operator_args(sp, required=True):
        sp.add_argument("--op", required=required, help=f"one of {', '.join(OPERATOR_NAMES)}")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
        sp.add_argument("--edges", help='graph edge list, e.g. "0-1:1,0-2:1.5,0-3:2"')

    s = sub.add_parser("scan", help="classify R(mu) on a mu-grid")
    operator_args(s)
    s.add_argument("--n", type=_positive_int)
    s.add_argument("--mu-min", type=_finite)
    s.add_argument("--mu-max", type=_finite)
    s.add_argument("--steps", type=_positive_int, default=50)
    common(s)

    r = sub.add_parser("refine", help="margins of R(probe_mu) under mesh refinement")
    operator_args(r)
    r.add_argument("--probe-mu", type=_finite)
    r.add_argument("--n-list", type=_n_list)
    r.add_argument("--track", choices=("auto", "lower_margin", "upper_margin", "c_hat"), default="auto")
    common(r)

    c = sub.add_parser("check", help="run a seeded check suite")
    c.add_argument("--suite", default="all", help=f"one of {', '.join(SUITE_NAMES)}")
    c.add_argument("--seed", type=int, default=0)
    common(c)

    o = sub.add_parser("oracle", help="compare discretizations with closed-form resolvents")
    o.add_argument("--name", required=True, help=f"one of {', '.join(ORACLE_NAMES)}")
    operator_args(o, required=False)
    o.add_argument("--n", type=_positive_int)
    o.add_argument("--n-list", type=_n_list)
    o.add_argument("--mu", type=_finite)
    common(o)
    return p


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: gallery, scan, refine, check or oracle")
        if args.command == "gallery":
            return cmd_gallery(args)
        if getattr(args, "steps", 2) < 2:
            raise UsageError("--steps must be at least 2")
        th = thresholds_from(args)
        doc, summary, code, with_csv = COMMANDS[args.command](args, th)
    except UsageError as exc:
        print(f"evlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"evlab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EvlabError, ValueError, KeyError) as exc:
        print(f"evlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc["timing"] = {"elapsed_seconds": round(time.perf_counter() - started, 6)}
    if args.out:
        for path in write_report(args.out, doc, with_csv=with_csv):
            print(f"wrote {path}", file=sys.stderr)
    if args.json:
        sys.stdout.write(dumps(doc))
    else:
        print(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
