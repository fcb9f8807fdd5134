"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 invariant violation,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .charsums import (gauss_all, gauss_direct, jacobi_direct, jacobi_via_gauss,
                       kloosterman_all, kloosterman_direct, moments)
from .equidist import BOUND_COLUMNS, angles_from_subsets, bound_report, discrepancy_exact
from .errors import BudgetExceeded, ConfigError, InvariantViolation, JacobiSumsError
from .field import build_field
from .harness import (EXPERIMENTS, RunConfig, build_subset, build_tail, expand_vary,
                      resolve_s, choose_K, run_experiment, run_named, sweep, write_rows)
from .verify import verify_suite

log = logging.getLogger("jacobisums")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_BUDGET = 0, 1, 2, 3

_CONFIG_FLAGS = ("p", "k", "modulus", "m", "a1", "a2", "tail", "k_policy", "s_policy",
                 "seed", "draws", "exact_cap", "constant", "output", "format", "workers")


def _field_args(ap):
    ap.add_argument("--p", type=int, required=True)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--modulus", help="comma-separated coefficients, lowest degree first")
    ap.add_argument("--seed", type=int, default=0)


def _config_args(ap):
    ap.add_argument("--config", help="run config file; its values override flags")
    ap.add_argument("--p", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--modulus")
    ap.add_argument("--m", type=int)
    ap.add_argument("--a1", help="full | random:SIZE | interval:LO:HI | explicit:J,J,...")
    ap.add_argument("--a2")
    ap.add_argument("--tail", help="none | random:R | full | explicit:J,..;J,..")
    ap.add_argument("--k-policy", dest="k_policy", help="fixed:K | e0 | e1")
    ap.add_argument("--s-policy", dest="s_policy", help="S | corollary:EPS")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--draws", type=int)
    ap.add_argument("--exact-cap", dest="exact_cap", type=int)
    ap.add_argument("--constant", type=float)
    ap.add_argument("--output", "-o")
    ap.add_argument("--format", choices=["csv", "json"])
    ap.add_argument("--workers", type=int)


def _modulus(text):
    return None if not text else tuple(int(c) for c in text.split(","))


def config_from_args(args) -> RunConfig:
    flags = {k: getattr(args, k) for k in _CONFIG_FLAGS if getattr(args, k, None) is not None}
    if args.config:
        cfg = RunConfig.from_file(args.config)
        overridden = [k for k, v in flags.items() if str(getattr(cfg, k)) != str(v)]
        if overridden:
            log.warning("config file %s overrides flags: %s", args.config, ", ".join(overridden))
        return cfg
    return RunConfig.from_dict({k: str(v) for k, v in flags.items()}).validate()


def _print_rows(rows, columns=None, out=None):
    out = out or sys.stdout
    if not rows:
        return
    columns = columns or list(rows[0])
    w = csv.DictWriter(out, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: repr(float(r[c])) if isinstance(r[c], float) else r[c] for c in columns})


def _complex_row(i, z):
    return {"index": i, "re": float(z.real), "im": float(z.imag)}


def cmd_field(args):
    F = build_field(args.p, args.k, modulus=_modulus(args.modulus), seed=args.seed)
    print(F.to_text())


def cmd_gauss(args):
    F = build_field(args.p, args.k, modulus=_modulus(args.modulus), seed=args.seed)
    if args.j is not None:
        vals = [(args.j, gauss_direct(F, args.j) if args.direct else gauss_all(F).values[args.j])]
    else:
        vals = list(enumerate(gauss_all(F).values))
    rows = [_complex_row(i, z) for i, z in vals]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            _print_rows(rows, out=fh)
    else:
        _print_rows(rows)


def cmd_jacobi(args):
    F = build_field(args.p, args.k, modulus=_modulus(args.modulus), seed=args.seed)
    idx = [int(x) for x in args.chars.split(",")]
    jv = jacobi_direct(F, idx) if args.direct else jacobi_via_gauss(gauss_all(F), idx)
    print(json.dumps({"q": F.q, "chars": idx, "re": jv.value.real, "im": jv.value.imag,
                      "abs": abs(jv.value), "angle": jv.angle}))


def cmd_kloosterman(args):
    F = build_field(args.p, args.k, modulus=_modulus(args.modulus), seed=args.seed)
    if args.a is not None:
        z = kloosterman_direct(F, args.n, args.a) if args.direct else \
            kloosterman_all(gauss_all(F), args.n).values[F.dlog(args.a)]
        print(json.dumps({"q": F.q, "n": args.n, "a": args.a, "re": z.real, "im": z.imag}))
        return
    kt = kloosterman_all(gauss_all(F), args.n)
    rows = [dict(_complex_row(t, z), a=int(F.exp_table[t])) for t, z in enumerate(kt.values)]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            _print_rows(rows, ["index", "a", "re", "im"], out=fh)
    else:
        _print_rows(rows, ["index", "a", "re", "im"])


def _subsets(cfg: RunConfig, draw: int = 0):
    F = build_field(cfg.p, cfg.k, modulus=cfg.modulus)
    gt = gauss_all(F)
    a1 = build_subset(cfg.a1, F.q, [cfg.seed, draw, 1])
    a2 = build_subset(cfg.a2, F.q, [cfg.seed, draw, 2])
    tail = build_tail(cfg.tail, F.q, cfg.m, [cfg.seed, draw, 3])
    return F, gt, a1, a2, tail


def cmd_moments(args):
    cfg = config_from_args(args)
    F, gt, a1, a2, tail = _subsets(cfg)
    nmax = args.nmax
    vals, count = moments(gt, a1, a2, tail, range(1, nmax + 1), method=args.method)
    rows = [{"n": n, "re": float(z.real), "im": float(z.imag), "abs": float(abs(z)), "count": count}
            for n, z in enumerate(vals, 1)]
    _print_rows(rows)


def cmd_discrepancy(args):
    if args.angles:
        th = np.loadtxt(args.angles, ndmin=1)
        rep = discrepancy_exact(th, args.exact_cap or 4096)
    else:
        cfg = config_from_args(args)
        F, gt, a1, a2, tail = _subsets(cfg)
        rep = discrepancy_exact(angles_from_subsets(gt, a1, a2, tail), cfg.exact_cap)
    print(json.dumps(rep.to_row()))


def cmd_bounds(args):
    cfg = config_from_args(args)
    F, gt, a1, a2, tail = _subsets(cfg)
    s = resolve_s(cfg.s_policy, F.q)
    K = choose_K(cfg.k_policy, F.q, len(a1), len(a2), s)
    rep = bound_report(gt, a1, a2, tail, s, K, cfg.constant, cfg.exact_cap)
    _print_rows(rep.rows(), BOUND_COLUMNS)


def cmd_run(args):
    cfg = config_from_args(args)
    rows = run_experiment(cfg)
    if not cfg.output:
        _print_rows(rows)


def cmd_sweep(args):
    cfg = config_from_args(args)
    rows, summary = sweep(cfg, expand_vary(args.vary or []))
    _emit_sweep(rows, summary, cfg.output, cfg.format)


def cmd_experiment(args):
    rows, summary = run_named(args.name)
    _emit_sweep(rows, summary, args.output, args.format or "csv")


def _emit_sweep(rows, summary, output, fmt):
    if output:
        write_rows(rows, output, fmt, summary)
        if fmt == "csv":
            with open(output + ".summary.json", "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=1, sort_keys=True)
    else:
        _print_rows(rows)
    print(json.dumps(summary, sort_keys=True), file=sys.stderr if not output else sys.stdout)


def cmd_verify(args):
    rep = verify_suite(args.level, args.seed)
    print(json.dumps(rep.summary(), indent=1, default=str))
    if not rep.passed:
        raise InvariantViolation(f"{len(rep.failures())} invariant(s) violated")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jacobisums", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage timings")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("field", help="build a field and print its record")
    _field_args(p)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("gauss", help="Gauss sums G(chi_j)")
    _field_args(p)
    p.add_argument("--j", type=int)
    p.add_argument("--direct", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_gauss)

    p = sub.add_parser("jacobi", help="one Jacobi sum")
    _field_args(p)
    p.add_argument("--chars", required=True, help="comma-separated character indices")
    p.add_argument("--direct", action="store_true")
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("kloosterman", help="Kloosterman sums Kl_n")
    _field_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--direct", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_kloosterman)

    p = sub.add_parser("moments", help="moments M^(n) of normalized Jacobi sums")
    _config_args(p)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--method", default="auto", choices=["auto", "direct", "convolution"])
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("discrepancy", help="arc discrepancy of Jacobi angles or a file of angles")
    _config_args(p)
    p.add_argument("--angles", help="text file with one angle in [0,1) per line")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("bounds", help="measured quantities against every bound")
    _config_args(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", help="run one experiment config")
    _config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a config over a grid of overrides")
    _config_args(p)
    p.add_argument("--vary", action="append", help="key=v1,v2,... (repeatable, cartesian)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("experiment", help="run a pre-configured experiment")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, JacobiSumsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
