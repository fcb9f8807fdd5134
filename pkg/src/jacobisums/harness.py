"""Reproducible experiment driver: configs, runs, sweeps.

A run builds the field, draws subsets for each requested draw, and emits
one row per draw with every parameter needed to recompute it.  Random
draws use PCG64 seeded with ``[seed, draw, stream]`` (stream 1 for A1,
2 for A2, 3 for the tail set B).
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import itertools
import json
import logging
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable, Sequence

import numpy as np

from . import characters as ch
from .charsums import GaussTable, gauss_all, moments
from .equidist import (EXACT_CAP, angles_from_subsets, bound_e0_rhs, bound_e1_rhs,
                       bound_eM1_rhs, bound_eM2_rhs, choose_K_e0, choose_K_e1, choose_s,
                       discrepancy_exact, erdos_turan_rhs, fitted_constant)
from .errors import ConfigError
from .field import FieldSpec, build_field

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
WORKERS_ENV = "JACOBISUMS_WORKERS"
FULL_TAIL_LIMIT = 2**20

RUN_COLUMNS = (
    "q", "p", "k", "modulus", "generator", "m", "draw", "seed",
    "a1_spec", "a2_spec", "tail_spec", "A1", "A2", "B", "count", "empty_convention",
    "s", "K", "D_exact", "D_star", "disc_method", "et_rhs", "e0_rhs", "e1_rhs",
    "C_e0", "C_e1", "max_ratio_eM1", "max_ratio_eM2", "abs_M1", "error",
)


@dataclass
class RunConfig:
    p: int = 101
    k: int = 1
    modulus: tuple[int, ...] | None = None
    m: int = 2
    a1: str = "full"
    a2: str = "full"
    tail: str = "none"
    tail_per_draw: bool = True
    k_policy: str = "fixed:16"
    s_policy: str = "1"
    seed: int = 0
    draws: int = 1
    exact_cap: int = EXACT_CAP
    constant: float = 1.0
    output: str = ""
    format: str = "csv"
    workers: int = 1

    @property
    def q(self) -> int:
        return self.p**self.k

    # -- validation -------------------------------------------------------

    def validate(self) -> "RunConfig":
        if self.m < 2:
            raise ConfigError("m must be >= 2", "m")
        if self.p**self.k < 3:
            raise ConfigError("q must be >= 3 for character subsets", "p")
        if self.draws < 0:
            raise ConfigError("draws must be >= 0", "draws")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json", "format")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", "workers")
        for name in ("a1", "a2"):
            parse_subset_spec(getattr(self, name), self.q, name)
        parse_tail_spec(self.tail, self.q, self.m)
        parse_k_policy(self.k_policy)
        parse_s_policy(self.s_policy)
        return self

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp["run"] = {"schema_version": str(SCHEMA_VERSION)}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "modulus":
                v = "" if v is None else ",".join(str(c) for c in v)
            cp["run"][f.name] = str(v)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unparseable config: {exc}") from None
        if "run" not in cp:
            raise ConfigError("missing [run] section")
        sec = dict(cp["run"])
        lines = _key_lines(text)
        version = sec.pop("schema_version", None)
        if version is None or int(version) != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}", "schema_version",
                              lines.get("schema_version"))
        return cls.from_dict(sec, lines).validate()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_dict(cls, values: dict, lines: dict | None = None) -> "RunConfig":
        lines = lines or {}
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r}", key, lines.get(key))
            try:
                kwargs[key] = _coerce(key, raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), key, lines.get(key)) from None
        return cls(**kwargs)

    def replace(self, **changes) -> "RunConfig":
        coerced = {k: _coerce(k, v) for k, v in changes.items()}
        return dataclasses.replace(self, **coerced)


def _key_lines(text: str) -> dict:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*([A-Za-z_0-9]+)\s*[=:]", line)
        if m:
            out.setdefault(m.group(1).lower(), i)
    return out


_INT_KEYS = {"p", "k", "m", "seed", "draws", "exact_cap", "workers"}


def _coerce(key: str, raw: Any):
    if not isinstance(raw, str):
        if key == "modulus" and raw is not None:
            return tuple(int(c) for c in raw)
        return raw
    raw = raw.strip()
    if key in _INT_KEYS:
        return int(raw)
    if key == "constant":
        return float(raw)
    if key == "tail_per_draw":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if key == "modulus":
        return tuple(int(c) for c in raw.split(",")) if raw and raw != "None" else None
    return raw


# ---------------------------------------------------------------------------
# config value grammars
# ---------------------------------------------------------------------------

def parse_size(expr: str, q: int) -> int:
    """Subset size: an integer, ``sqrtq``, ``q^X``, ``logq^X``, ``q/D`` or ``q-C``.

    Non-integer expressions are rounded up.
    """
    e = expr.strip().replace(" ", "")
    if re.fullmatch(r"\d+", e):
        return int(e)
    if e == "sqrtq":
        return math.ceil(math.sqrt(q))
    m = re.fullmatch(r"q\^([0-9.]+)", e)
    if m:
        return math.ceil(q ** float(m.group(1)))
    m = re.fullmatch(r"logq\^([0-9.]+)", e)
    if m:
        return math.ceil(math.log(q) ** float(m.group(1)))
    m = re.fullmatch(r"q/([0-9.]+)", e)
    if m:
        return math.ceil(q / float(m.group(1)))
    m = re.fullmatch(r"q-(\d+)", e)
    if m:
        return q - int(m.group(1))
    raise ValueError(f"bad size expression {expr!r}")


def parse_subset_spec(spec: str, q: int, name: str = "subset") -> tuple:
    kind, _, rest = spec.strip().partition(":")
    try:
        if kind == "full":
            return ("full",)
        if kind == "random":
            size = parse_size(rest, q)
            if not 1 <= size <= q - 2:
                raise ValueError(f"size {size} outside [1, {q - 2}]")
            return ("random", size)
        if kind == "interval":
            lo, hi = (int(x) for x in rest.split(":"))
            if not 1 <= lo <= hi <= q - 2:
                raise ValueError(f"interval [{lo}, {hi}] outside [1, {q - 2}]")
            return ("interval", lo, hi)
        if kind == "explicit":
            idx = [int(x) for x in rest.split(",") if x]
            if not idx or min(idx) < 1 or max(idx) > q - 2:
                raise ValueError(f"explicit indices must lie in [1, {q - 2}]")
            return ("explicit", idx)
    except ValueError as exc:
        raise ConfigError(str(exc), name) from None
    raise ConfigError(f"unknown subset spec {spec!r}", name)


def parse_tail_spec(spec: str, q: int, m: int) -> tuple:
    kind, _, rest = spec.strip().partition(":")
    if m == 2:
        if kind not in ("none", "full"):
            raise ConfigError("m = 2 takes tail = none", "tail")
        return ("none",)
    try:
        if kind == "random":
            r = int(rest)
            if not 1 <= r <= (q - 2) ** (m - 2):
                raise ValueError(f"cannot draw {r} tail vectors")
            return ("random", r)
        if kind == "full":
            if (q - 2) ** (m - 2) > FULL_TAIL_LIMIT:
                raise ValueError(f"full tail has {(q - 2) ** (m - 2)} vectors > {FULL_TAIL_LIMIT}")
            return ("full",)
        if kind == "explicit":
            vecs = [[int(x) for x in v.split(",")] for v in rest.split(";") if v]
            if not vecs or any(len(v) != m - 2 for v in vecs):
                raise ValueError(f"explicit tail vectors need {m - 2} entries")
            if any(not 1 <= x <= q - 2 for v in vecs for x in v):
                raise ValueError(f"tail entries must lie in [1, {q - 2}]")
            return ("explicit", vecs)
    except ValueError as exc:
        raise ConfigError(str(exc), "tail") from None
    raise ConfigError(f"unknown tail spec {spec!r} for m = {m}", "tail")


def parse_k_policy(policy: str) -> tuple:
    kind, _, rest = policy.strip().partition(":")
    if kind == "fixed":
        try:
            k = int(rest)
        except ValueError:
            raise ConfigError(f"bad K in {policy!r}", "k_policy") from None
        if k < 1:
            raise ConfigError("K must be >= 1", "k_policy")
        return ("fixed", k)
    if kind in ("e0", "e1"):
        return (kind,)
    raise ConfigError(f"unknown K policy {policy!r}", "k_policy")


def parse_s_policy(policy: str) -> tuple:
    kind, _, rest = policy.strip().partition(":")
    if kind == "corollary":
        try:
            eps = float(rest)
        except ValueError:
            raise ConfigError(f"bad epsilon in {policy!r}", "s_policy") from None
        if not 0 < eps <= 0.5:
            raise ConfigError("epsilon must lie in (0, 1/2]", "s_policy")
        return ("corollary", eps)
    try:
        s = int(kind)
    except ValueError:
        raise ConfigError(f"unknown s policy {policy!r}", "s_policy") from None
    if not 1 <= s <= 20:
        raise ConfigError("s must lie in [1, 20]", "s_policy")
    return ("fixed", s)


def build_subset(spec: str, q: int, seed) -> ch.CharSubset:
    parsed = parse_subset_spec(spec, q)
    if parsed[0] == "full":
        return ch.full_subset(q)
    if parsed[0] == "random":
        return ch.random_subset(q, parsed[1], seed)
    if parsed[0] == "interval":
        return ch.interval_subset(q, parsed[1], parsed[2])
    return ch.explicit_subset(q, parsed[1])


def build_tail(spec: str, q: int, m: int, seed) -> np.ndarray:
    parsed = parse_tail_spec(spec, q, m)
    if parsed[0] == "none":
        return ch.empty_tail()
    if parsed[0] == "random":
        return ch.random_tail(q, m, parsed[1], seed)
    if parsed[0] == "full":
        return ch.full_tail(q, m)
    return np.asarray(parsed[1], dtype=np.int64)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _field_and_gauss(p: int, k: int, modulus: tuple | None) -> tuple[FieldSpec, GaussTable]:
    t0 = time.perf_counter()
    fs = build_field(p, k, modulus=modulus)
    t1 = time.perf_counter()
    gt = gauss_all(fs)
    log.info("q=%d field %.3fs gauss %.3fs", fs.q, t1 - t0, time.perf_counter() - t1)
    return fs, gt


def choose_K(policy: str, q: int, a1: int, a2: int, s: int) -> int:
    parsed = parse_k_policy(policy)
    if parsed[0] == "fixed":
        return parsed[1]
    if parsed[0] == "e0":
        return max(1, math.floor(choose_K_e0(q, a1, s)))
    return max(1, math.floor(choose_K_e1(q, a1, a2)))


def resolve_s(policy: str, q: int) -> int:
    parsed = parse_s_policy(policy)
    return parsed[1] if parsed[0] == "fixed" else choose_s(q, parsed[1])


def run_draw(cfg: RunConfig, draw: int) -> dict:
    """Compute one output row."""
    fs, gt = _field_and_gauss(cfg.p, cfg.k, cfg.modulus)
    q = fs.q
    t0 = time.perf_counter()
    a1 = build_subset(cfg.a1, q, [cfg.seed, draw, 1])
    a2 = build_subset(cfg.a2, q, [cfg.seed, draw, 2])
    tail = build_tail(cfg.tail, q, cfg.m, [cfg.seed, draw if cfg.tail_per_draw else 0, 3])
    A1, A2, B = len(a1), len(a2), len(tail)
    s = resolve_s(cfg.s_policy, q)
    K = choose_K(cfg.k_policy, q, A1, A2, s)
    t1 = time.perf_counter()
    angles = angles_from_subsets(gt, a1, a2, tail)
    disc = discrepancy_exact(angles, cfg.exact_cap, overwrite=True)
    del angles
    t2 = time.perf_counter()
    moms, count = moments(gt, a1, a2, tail, range(1, K + 1))
    t3 = time.perf_counter()
    log.info("q=%d draw=%d subsets %.3fs discrepancy %.3fs moments %.3fs",
             q, draw, t1 - t0, t2 - t1, t3 - t2)
    e0 = bound_e0_rhs(q, A1, A2, s, cfg.constant)
    e1 = bound_e1_rhs(q, A1, A2, cfg.constant)
    ratio1 = max(abs(moms[n - 1]) / bound_eM1_rhs(q, A1, A2, B, s, n) for n in range(1, K + 1))
    ratio2 = max(abs(moms[n - 1]) / bound_eM2_rhs(q, A1, A2, B, n) for n in range(1, K + 1))
    empty = count == 0
    return {
        "q": q, "p": fs.p, "k": fs.k, "modulus": ",".join(map(str, fs.modulus)),
        "generator": fs.generator, "m": cfg.m, "draw": draw, "seed": cfg.seed,
        "a1_spec": cfg.a1, "a2_spec": cfg.a2, "tail_spec": cfg.tail,
        "A1": A1, "A2": A2, "B": B, "count": count, "empty_convention": int(empty),
        "s": s, "K": K, "D_exact": disc.d_exact, "D_star": disc.d_star,
        "disc_method": disc.method.value,
        "et_rhs": 1.0 if empty else erdos_turan_rhs(moms, count, K),
        "e0_rhs": e0, "e1_rhs": e1,
        "C_e0": disc.d_exact * cfg.constant / e0, "C_e1": disc.d_exact * cfg.constant / e1,
        "max_ratio_eM1": ratio1, "max_ratio_eM2": ratio2,
        "abs_M1": float(abs(moms[0])), "error": "",
    }


def _run_draw_star(args):
    return run_draw(*args)


def effective_workers(cfg: RunConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer", WORKERS_ENV) from None
    return cfg.workers


def run_experiment(cfg: RunConfig, write: bool = True) -> list[dict]:
    """Rows for every draw of ``cfg``, in draw order."""
    cfg.validate()
    workers = effective_workers(cfg)
    jobs = [(cfg, d) for d in range(cfg.draws)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_draw_star, jobs))
    else:
        rows = [run_draw(*j) for j in jobs]
    if write and cfg.output:
        write_rows(rows, cfg.output, cfg.format)
    return rows


def write_rows(rows: Sequence[dict], path, fmt: str = "csv", summary: dict | None = None) -> None:
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"rows": list(rows), "summary": summary or {}}, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(RUN_COLUMNS), extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({c: _fmt(row.get(c, "")) for c in RUN_COLUMNS})


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def expand_vary(vary: Iterable[str]) -> list[dict]:
    """``["p=101,1009", "m=2,3"]`` -> cartesian product of deltas."""
    keys, values = [], []
    for item in vary:
        key, _, vals = item.partition("=")
        if not vals:
            raise ConfigError(f"--vary needs key=v1,v2,...: {item!r}", key or None)
        keys.append(key.strip())
        values.append([v.strip() for v in vals.split(",")])
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)] if keys else []


def sweep(base: RunConfig, deltas: Sequence[dict]) -> tuple[list[dict], dict]:
    """Run every delta over ``base``; failed cells become error rows."""
    rows: list[dict] = []
    for delta in deltas:
        try:
            cfg = base.replace(**delta).validate()
            rows.extend(run_experiment(cfg, write=False))
        except Exception as exc:  # partial-failure policy: record and continue
            log.warning("sweep cell %s failed: %s", delta, exc)
            err = {c: "" for c in RUN_COLUMNS}
            err.update({k: v for k, v in delta.items() if k in RUN_COLUMNS})
            err["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(err)
    return rows, summarize(rows)


def summarize(rows: Sequence[dict]) -> dict:
    good = [r for r in rows if not r.get("error")]
    if not good:
        return {"rows": len(rows), "errors": len(rows)}
    d = np.array([r["D_exact"] for r in good], dtype=float)
    e1 = np.array([r["e1_rhs"] for r in good], dtype=float)
    e0 = np.array([r["e0_rhs"] for r in good], dtype=float)
    out = {
        "rows": len(rows), "errors": len(rows) - len(good),
        "fitted_C_e1": fitted_constant(d, e1), "fitted_C_e0": fitted_constant(d, e0),
        "max_ratio_eM1": max(r["max_ratio_eM1"] for r in good),
        "max_ratio_eM2": max(r["max_ratio_eM2"] for r in good),
        "slope_logD_vs_log_A1A2_over_q": float("nan"),
    }
    x = np.log(np.array([r["A1"] * r["A2"] / r["q"] for r in good], dtype=float))
    if np.unique(x).size >= 2 and np.all(d > 0):
        out["slope_logD_vs_log_A1A2_over_q"] = float(np.polyfit(x, np.log(d), 1)[0])
    return out


# ---------------------------------------------------------------------------
# pre-configured experiments
# ---------------------------------------------------------------------------

EXPERIMENTS: dict[str, tuple[RunConfig, list[dict]]] = {
    "e1-trend": (RunConfig(m=2, a1="full", a2="full", k_policy="e1"),
                 [{"p": "101"}, {"p": "1009"}, {"p": "10007"}]),
    "e0-trend": (RunConfig(m=2, a1="random:q^0.6", a2="random:logq^3", k_policy="e0",
                           s_policy="corollary:0.5", draws=5),
                 [{"p": "101"}, {"p": "1009"}, {"p": "10007"}]),
    # chi_2 = chi_{1}, chi_3 = chi_{2} held fixed while chi_1 runs over X_q
    "katz-fixed-tail": (RunConfig(m=3, a1="full", a2="explicit:1", tail="explicit:2",
                                  k_policy="fixed:16"),
                        [{"p": "101"}, {"p": "1009"}, {"p": "10007"}]),
    "moment-bounds": (RunConfig(m=3, a1="random:sqrtq", a2="random:q/10", tail="random:2",
                                k_policy="fixed:8", s_policy="2", draws=10),
                      [{"p": "101"}, {"p": "1009"}]),
}


def run_named(name: str) -> tuple[list[dict], dict]:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    base, deltas = EXPERIMENTS[name]
    return sweep(base, deltas)
