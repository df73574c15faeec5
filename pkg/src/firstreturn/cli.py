"""Command-line front end.

Exit status: 0 on success, 1 on domain or validation errors (including
bad flags), 2 on resource errors.  Errors go to stderr as
``error[<kind>]: <message>``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import asymptotics, compositions, montecarlo, series, walk
from .emit import Table, emit, format_exact, write_output
from .errors import DomainError, FirstReturnError, ResourceError, ValidationError
from .laws import StepSpec, law_to_json, load_law

__all__ = ["main", "build_parser", "RunConfig"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error[usage]: {message}\n")
        raise SystemExit(1)


@dataclass
class RunConfig:
    """Validated parameters for one command."""

    command: str
    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    out: str = "csv"
    output: str | None = None
    verify: bool = False

    def __getattr__(self, name):
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name) from None


# (flag, dest, type, default, help); defaults are applied after --config merging
_OPTS: dict[tuple[str, str], list[tuple]] = {
    ("compositions", "count"): [
        ("--n", "n", int, None, "largest n"),
        ("--k-max", "k_max", int, None, "largest k (two-variable table)"),
        ("--two-var", "two_var", bool, False, "emit f(n,k) instead of f(n)"),
        ("--oracle", "oracle", bool, False, "cross-check small n by brute force"),
    ],
    ("compositions", "oracle"): [("--n", "n", int, None, "n (<= 14)")],
    ("compositions", "probability"): [("--n", "n", int, None, "n")],
    ("series", "thm1"): [("--order", "order", int, None, "truncation order")],
    ("series", "thm1-2d"): [
        ("--order-x", "order_x", int, None, "order in x"),
        ("--order-y", "order_y", int, None, "order in y"),
    ],
    ("series", "check-legendre"): [
        ("--n", "n", int, None, "degree"),
        ("--y", "y", Fraction, None, "rational y, e.g. 1/2"),
    ],
    ("series", "master-check"): [
        ("--order-x", "order_x", int, 20, "order in x"),
        ("--order-y", "order_y", int, 20, "order in y"),
    ],
    ("walk", "validate"): [("--law", "law", str, None, "law name or JSON file")],
    ("walk", "table"): [
        ("--law", "law", str, None, "law name or JSON file"),
        ("--n", "n", int, None, "largest n"),
        ("--mode", "mode", str, "exact", "exact or float"),
    ],
    ("walk", "killed"): [
        ("--law", "law", str, None, "law name or JSON file"),
        ("--n", "n", int, None, "largest n"),
        ("--radius", "radius", int, 10, "window |x| <= radius"),
        ("--mode", "mode", str, "exact", "exact or float"),
    ],
    ("walk", "charfun"): [
        ("--law", "law", str, None, "law name or JSON file"),
        ("--n", "n", int, None, "step count"),
        ("--x", "x", int, 0, "target site"),
        ("--points", "points", int, None, "quadrature nodes (default: alias-free)"),
    ],
    ("walk", "regularity"): [
        ("--law", "law", str, None, "law name or JSON file"),
        ("--n", "n", int, None, "largest n"),
        ("--radius", "radius", int, 50, "window |x| <= radius"),
    ],
    ("simulate", "game"): [
        ("--faces", "faces", int, 6, "faces per die"),
        ("--trials", "trials", int, None, "number of games"),
        ("--horizon", "horizon", int, 1000, "rolls before censoring"),
        ("--seed", "seed", int, 0, "64-bit seed"),
        ("--workers", "workers", int, 1, "worker processes"),
        ("--exact-upto", "exact_upto", int, 1000, "attach exact a_n for n up to this"),
    ],
    ("simulate", "walk"): [
        ("--law", "law", str, None, "law name, JSON file, or geom2-diff (untruncated)"),
        ("--trials", "trials", int, None, "number of walks"),
        ("--horizon", "horizon", int, 1000, "steps before censoring"),
        ("--seed", "seed", int, 0, "64-bit seed"),
        ("--workers", "workers", int, 1, "worker processes"),
        ("--exact-upto", "exact_upto", int, 1000, "attach exact a_n for n up to this"),
    ],
    ("simulate", "pairs"): [
        ("--n", "n", int, None, "n"),
        ("--samples", "samples", int, None, "number of pairs"),
        ("--seed", "seed", int, 0, "64-bit seed"),
    ],
    ("simulate", "poissonized"): [
        ("--n", "n", int, None, "n"),
        ("--samples", "samples", int, None, "number of compositions"),
        ("--seed", "seed", int, 0, "64-bit seed"),
    ],
    ("asympt", "report"): [
        ("--quantity", "quantity", str, None, "one of " + ", ".join(asymptotics.QUANTITIES)),
        ("--law", "law", str, None, "law (walk quantities)"),
        ("--n", "n", int, None, "largest n"),
        ("--mode", "mode", str, "float", "exact or float"),
        ("--correction", "correction", float, 0.5, "exponent of the n^-beta correction removed"),
    ],
}

_JSON_ONLY = {"series", "asympt"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="firstreturn", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    groups.required = True
    subs: dict[str, argparse._SubParsersAction] = {}
    for (cmd, sub), opts in _OPTS.items():
        if cmd not in subs:
            g = groups.add_parser(cmd, help=f"{cmd} commands")
            subs[cmd] = g.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
            subs[cmd].required = True
        sp = subs[cmd].add_parser(sub)
        for flag, dest, typ, default, helptext in opts:
            if typ is bool:
                sp.add_argument(flag, dest=dest, action="store_const", const=True, default=None,
                                help=helptext)
            else:
                sp.add_argument(flag, dest=dest, type=_typed(typ, flag), default=None,
                                help=helptext + (f" (default {default})" if default is not None else ""))
        default_out = "json" if cmd in _JSON_ONLY else "csv"
        sp.add_argument("--out", choices=("csv", "json"), default=default_out, help="output format")
        sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")
        sp.add_argument("--verify", action="store_true", help="check invariants before emitting")
        sp.add_argument("--config", default=None, help="JSON file with parameter values")
    return p


def _typed(typ, flag):
    def conv(text):
        try:
            return typ(text)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"invalid value for {flag}: {text!r}") from None
    return conv


def _load_config(path: str, known: dict[str, tuple]) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for k, v in doc.items():
        typ = known[k][2]
        try:
            out[k] = typ(v) if typ is not bool else bool(v)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ValidationError(f"config key {k}: invalid value {v!r}") from None
    return out


def _positive(cfg: RunConfig, *names: str) -> None:
    for name in names:
        v = cfg.params.get(name)
        if v is not None and v < 1:
            raise DomainError(f"--{name.replace('_', '-')} must be >= 1, got {v}")


def make_config(ns: argparse.Namespace) -> RunConfig:
    opts = _OPTS[(ns.command, ns.subcommand)]
    known = {dest: o for o in opts for dest in [o[1]]}
    params = {}
    if ns.config:
        params.update(_load_config(ns.config, known))
    for dest in known:
        v = getattr(ns, dest)
        if v is not None:
            params[dest] = v
    missing = []
    for flag, dest, _typ, default, _h in opts:
        if dest not in params:
            if default is None and _typ is not bool and dest not in ("k_max", "points", "law"):
                missing.append(flag)
            params[dest] = default
    if missing:
        raise ValidationError(f"missing required option(s): {', '.join(missing)}")
    if ns.command in _JSON_ONLY and ns.out != "json" and ns.command == "series":
        raise ValidationError("series commands emit JSON only")
    cfg = RunConfig(ns.command, ns.subcommand, params, ns.out, ns.output, ns.verify)
    _positive(cfg, "n", "order", "order_x", "order_y", "trials", "horizon", "samples",
              "workers", "faces", "k_max", "points")
    if params.get("mode") not in (None, "exact", "float"):
        raise DomainError(f"--mode must be exact or float, got {params['mode']!r}")
    if params.get("correction") is not None and not params["correction"] > 0:
        raise DomainError("--correction must be positive")
    if params.get("seed") is not None and not 0 <= params["seed"] < 2**64:
        raise DomainError("--seed must be a 64-bit unsigned value")
    if params.get("radius") is not None and params["radius"] < 0:
        raise DomainError("--radius must be >= 0")
    return cfg


def _fail_verify(problems: list[str]) -> None:
    if problems:
        raise DomainError("verification failed: " + "; ".join(problems[:5]))


# --- compositions -----------------------------------------------------------

def _cmd_compositions_count(cfg: RunConfig):
    n = cfg.n
    if cfg.two_var:
        k_max = cfg.k_max or n
        table = compositions.irreducible_counts2(n, k_max)
        rows = []
        for m in range(1, n + 1):
            for k in range(1, min(m, k_max) + 1):
                f, t = table.f2[(m, k)], table.totals2[(m, k)]
                p = Fraction(f, t)
                rows.append((m, k, f, t, p.numerator, p.denominator))
    else:
        table = compositions.irreducible_counts1(n)
        rows = [(m, None, table.f1[m], table.totals1[m], table.p_exact[m].numerator,
                 table.p_exact[m].denominator) for m in range(1, n + 1)]
    if cfg.verify:
        _fail_verify(table.verify())
    if cfg.oracle:
        upto = min(n, 12)
        bad = []
        for m in range(1, upto + 1):
            f, row = compositions.brute_force_irreducible(m)
            if cfg.two_var:
                if any(row[k] != table.f2[(m, k)] for k in range(1, min(m, table.k_max) + 1)):
                    bad.append(f"n={m}")
            elif f != table.f1[m]:
                bad.append(f"n={m}")
        if bad:
            raise DomainError("brute-force oracle disagrees at " + ", ".join(bad))
        sys.stderr.write(f"oracle: brute force agrees for n <= {upto}\n")
    return Table(["n", "k", "f", "total", "p_num", "p_den"], rows)


def _cmd_compositions_oracle(cfg: RunConfig):
    f, row = compositions.brute_force_irreducible(cfg.n)
    rows = [(cfg.n, k, row[k], compositions.total_pairs2(cfg.n, k)) for k in sorted(row)]
    rows.append((cfg.n, None, f, compositions.total_pairs1(cfg.n)))
    return Table(["n", "k", "f", "total"], rows)


def _cmd_compositions_probability(cfg: RunConfig):
    t = compositions.irreducible_counts1(cfg.n)
    p = t.p(cfg.n)
    if cfg.verify:
        _fail_verify(t.verify())
    return Table(["n", "f", "total", "p_num", "p_den", "p", "n_times_p"],
                 [(cfg.n, t.f(cfg.n), t.totals1[cfg.n], p.numerator, p.denominator,
                   float(p), float(p * cfg.n))])


# --- series -------------------------------------------------------------------

def _cmd_series_thm1(cfg: RunConfig):
    s = series.thm1_series(cfg.order)
    if cfg.verify:
        _fail_verify([] if s.is_integral() else ["non-integral coefficient"])
    return [format_exact(c) for c in s.coeffs]


def _cmd_series_thm1_2d(cfg: RunConfig):
    s = series.thm1_series_2d(cfg.order_x, cfg.order_y)
    if cfg.verify:
        _fail_verify([] if s.is_integral() else ["non-integral coefficient"])
    return [[format_exact(c) for c in row] for row in s.coeffs]


def _cmd_series_check_legendre(cfg: RunConfig):
    ok, lhs, rhs = series.legendre_identity_check(cfg.n, cfg.y)
    if not ok:
        raise DomainError(f"Legendre identity fails at n={cfg.n}, y={cfg.y}: {lhs} != {rhs}")
    return {"n": cfg.n, "y": format_exact(cfg.y), "lhs": format_exact(lhs),
            "rhs": format_exact(rhs), "equal": ok}


def _cmd_series_master_check(cfg: RunConfig):
    ok, bad = series.master_gf_check(cfg.order_x, cfg.order_y)
    if not ok:
        raise DomainError("master identity fails: " + "; ".join(bad[:5]))
    return {"order_x": cfg.order_x, "order_y": cfg.order_y, "ok": ok, "mismatches": bad}


# --- walk -----------------------------------------------------------------------

def _law(cfg: RunConfig) -> StepSpec:
    if not cfg.law:
        raise ValidationError("missing required option: --law")
    return load_law(cfg.law)


def _cmd_walk_validate(cfg: RunConfig):
    spec = _law(cfg)
    doc = law_to_json(spec)
    doc.update({
        "name": spec.name,
        "mean": format_exact(spec.mean),
        "variance": format_exact(spec.variance),
        "aperiodic": spec.aperiodic,
        "one_period_gcd": spec.one_period_gcd,
        "span": spec.span,
        "symmetric": spec.symmetric,
    })
    if spec.name.startswith("geom2-diff:"):
        doc["untruncated_variance"] = "4/1"
        doc["variance_shift"] = format_exact(spec.variance - 4)
    if spec.mean != 0:
        sys.stderr.write("warning: mean is not zero; asymptotic comparisons will refuse this law\n")
    if cfg.out == "csv":
        doc["support"] = json.dumps(doc["support"])
        return Table(list(doc), [tuple(doc.values())])
    return doc


def _cmd_walk_table(cfg: RunConfig):
    spec = _law(cfg)
    if spec.mean != 0:
        sys.stderr.write("warning: mean is not zero\n")
    rt = walk.return_table(spec, cfg.n, cfg.mode)
    if cfg.verify:
        _fail_verify(rt.verify())
    rows = [(n, rt.a_prime[n], rt.a[n], rt.Q[n]) for n in range(rt.n_max + 1)]
    return Table(["n", "a_prime", "a", "Q"], rows,
                 {"law": spec.name, "mode": rt.mode, "truncated_mass": rt.truncated_mass})


def _cmd_walk_killed(cfg: RunConfig):
    spec = _law(cfg)
    kt = walk.killed_table(spec, cfg.n, cfg.radius, cfg.mode)
    if cfg.verify:
        _fail_verify(kt.verify(walk.return_table(spec, cfg.n, cfg.mode)))
    r = kt.radius
    rows = [(n, x, kt.q[n, x + r], kt.Qx[n, x + r], kt.delta[n, x + r])
            for n in range(kt.n_max + 1) for x in range(-r, r + 1)]
    return Table(["n", "x", "q", "Qx", "delta"], rows,
                 {"law": spec.name, "mode": kt.mode, "truncated_mass": kt.truncated_mass})


def _cmd_walk_charfun(cfg: RunConfig):
    spec = _law(cfg)
    val = walk.charfun_return(spec, cfg.n, cfg.x, cfg.points)
    ref = None
    for s in walk.step_power(spec, cfg.n, "float", 0.0):
        ref = s.prob(cfg.x)
    return Table(["n", "x", "quadrature", "convolution", "abs_diff"],
                 [(cfg.n, cfg.x, val, ref, abs(val - ref))])


def _cmd_walk_regularity(cfg: RunConfig):
    spec = _law(cfg)
    rep = walk.regularity_check(spec, cfg.n, cfg.radius)
    rows = []
    for i, n in enumerate(rep.n):
        rows.append((int(n), rep.first_return[i], float(rep.small_p[i].max()),
                     float(rep.large_p[i].max()), float(rep.small_q[i].max()),
                     float(rep.large_q[i].max())))
    return Table(["n", *rep.QUANTITIES], rows, {"law": spec.name, "radius": rep.radius})


# --- simulate ---------------------------------------------------------------------

def _sim_table(res: montecarlo.SimResult, exact) -> Table:
    freq, se = res.freq(), res.std_err()
    nz = np.nonzero(res.tau_histogram)[0]
    last = int(nz[-1]) if nz.size else 0
    rows = []
    for n in range(1, last + 1):
        ex = float(exact[n]) if exact is not None and n < len(exact) else None
        rows.append((n, int(res.tau_histogram[n]), float(freq[n]), ex, float(se[n])))
    c = res.censored / res.trials
    ex_tail = float(exact_tail) if (exact_tail := _tail(exact, res.horizon)) is not None else None
    rows.append(("censored", res.censored, c, ex_tail, math.sqrt(c * (1 - c) / res.trials)))
    return Table(["n", "count", "freq", "exact", "std_err"], rows,
                 {"trials": res.trials, "horizon": res.horizon, "seed": res.seed,
                  "block_size": res.block_size})


def _tail(exact, horizon):
    if exact is None or horizon >= len(exact):
        return None
    return 1.0 - float(np.sum(np.asarray(exact[1 : horizon + 1], dtype=float)))


def _cmd_simulate_game(cfg: RunConfig):
    res = montecarlo.simulate_game(cfg.faces, cfg.trials, cfg.horizon, cfg.seed, cfg.workers)
    exact = None
    if cfg.exact_upto:
        exact = walk.return_table(load_law(f"dice-diff:{cfg.faces}"),
                                  min(cfg.exact_upto, cfg.horizon), "float").a
    if cfg.verify:
        _fail_verify([] if res.tau_histogram.sum() + res.censored == res.trials else ["mass"])
    return _sim_table(res, exact)


def _cmd_simulate_walk(cfg: RunConfig):
    if not cfg.law:
        raise ValidationError("missing required option: --law")
    res = montecarlo.simulate_walk(cfg.law if cfg.law == "geom2-diff" else load_law(cfg.law),
                                   cfg.trials, cfg.horizon, cfg.seed, cfg.workers)
    exact = None
    if cfg.exact_upto and cfg.law != "geom2-diff":
        exact = walk.return_table(load_law(cfg.law), min(cfg.exact_upto, cfg.horizon), "float").a
    if cfg.verify:
        _fail_verify([] if res.tau_histogram.sum() + res.censored == res.trials else ["mass"])
    return _sim_table(res, exact)


def _cmd_simulate_pairs(cfg: RunConfig):
    count, _k = montecarlo.sample_pairs(cfg.n, cfg.samples, cfg.seed)
    p = count / cfg.samples
    exact = compositions.irreducible_counts1(cfg.n).p(cfg.n)
    return Table(["n", "samples", "count", "freq", "exact", "std_err"],
                 [(cfg.n, cfg.samples, count, p, float(exact),
                   math.sqrt(p * (1 - p) / cfg.samples))])


def _cmd_simulate_poissonized(cfg: RunConfig):
    counts, _m = montecarlo.poissonized_batch(cfg.n, cfg.samples, cfg.seed)
    hist = np.bincount(counts, minlength=cfg.n + 1)
    rows = []
    for t in range(1, cfg.n + 1):
        p = hist[t] / cfg.samples
        ex = Fraction(math.comb(cfg.n - 1, t - 1), 2 ** (cfg.n - 1))
        rows.append((t, int(hist[t]), float(p), float(ex), math.sqrt(p * (1 - p) / cfg.samples)))
    return Table(["parts", "count", "freq", "exact", "std_err"], rows,
                 {"n": cfg.n, "samples": cfg.samples, "seed": cfg.seed})


# --- asympt -------------------------------------------------------------------

def _cmd_asympt_report(cfg: RunConfig):
    q = cfg.quantity
    law = _law(cfg) if q in asymptotics.WALK_QUANTITIES else None
    rep = asymptotics.report(q, law, cfg.n, cfg.mode, correction=cfg.correction)
    doc = rep.to_dict()
    doc["tolerance_note"] = "no convergence rate is known; tolerances are engineering choices"
    if cfg.out == "csv":
        return Table(["n", "scaled"], [tuple(p) for p in rep.scaled_values],
                     {k: v for k, v in doc.items() if k != "scaled_values"})
    return doc


_HANDLERS: dict[tuple[str, str], Callable[[RunConfig], Any]] = {
    ("compositions", "count"): _cmd_compositions_count,
    ("compositions", "oracle"): _cmd_compositions_oracle,
    ("compositions", "probability"): _cmd_compositions_probability,
    ("series", "thm1"): _cmd_series_thm1,
    ("series", "thm1-2d"): _cmd_series_thm1_2d,
    ("series", "check-legendre"): _cmd_series_check_legendre,
    ("series", "master-check"): _cmd_series_master_check,
    ("walk", "validate"): _cmd_walk_validate,
    ("walk", "table"): _cmd_walk_table,
    ("walk", "killed"): _cmd_walk_killed,
    ("walk", "charfun"): _cmd_walk_charfun,
    ("walk", "regularity"): _cmd_walk_regularity,
    ("simulate", "game"): _cmd_simulate_game,
    ("simulate", "walk"): _cmd_simulate_walk,
    ("simulate", "pairs"): _cmd_simulate_pairs,
    ("simulate", "poissonized"): _cmd_simulate_poissonized,
    ("asympt", "report"): _cmd_asympt_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(ns)
        result = _HANDLERS[(cfg.command, cfg.subcommand)](cfg)
        write_output(emit(result, cfg.out), cfg.output)
    except ResourceError as exc:
        sys.stderr.write(f"error[{exc.kind}]: {exc}\n")
        return 2
    except MemoryError:
        sys.stderr.write("error[resource]: out of memory; try --mode float\n")
        return 2
    except FirstReturnError as exc:
        sys.stderr.write(f"error[{exc.kind}]: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
