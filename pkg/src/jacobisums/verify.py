"""Self-check suite: oracle equivalences and bound inequalities at small scale."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import characters as ch
from .charsums import (gauss_all, gauss_direct, is_permutation, jacobi_direct,
                       jacobi_via_gauss, kloosterman_all, kloosterman_direct,
                       kloosterman_forward, moments_convolution, moments_direct,
                       s_katz_bound, s_sum, s_trivial_bound, GaussTable)
from .equidist import (bound_eM1_rhs, bound_eM2_rhs, discrepancy_exact, erdos_turan_rhs,
                       weyl_moments)
from .field import build_field

QUICK_FIELDS = [(5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4), (17, 1), (5, 2),
                (3, 3), (2, 5), (7, 2), (2, 6), (3, 4), (101, 1), (5, 3), (2, 7), (3, 5), (2, 8)]
FULL_EXTRA = [(7, 3), (2, 9), (5, 4), (3, 6), (1009, 1), (2, 10), (2, 11), (3, 7), (5, 5),
              (4093, 1), (2, 12)]


@dataclass
class CheckResult:
    suite: str
    name: str
    ok: bool
    details: dict = dc_field(default_factory=dict)


@dataclass
class VerifyReport:
    level: str
    results: list[CheckResult] = dc_field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.ok]

    def summary(self) -> dict:
        suites: dict[str, dict] = {}
        for r in self.results:
            s = suites.setdefault(r.suite, {"checks": 0, "failed": 0})
            s["checks"] += 1
            s["failed"] += 0 if r.ok else 1
        return {"level": self.level, "passed": self.passed, "seconds": round(self.seconds, 3),
                "suites": suites,
                "failures": [{"suite": f.suite, "name": f.name, **f.details} for f in self.failures()]}


def check_gauss_table(gtab: GaussTable, tol: float | None = None) -> list[dict]:
    """Entries violating |G(chi)| = sqrt q or G(1) = -1."""
    tol = gtab.tol if tol is None else tol
    bad = []
    if abs(gtab.values[0] + 1) > tol:
        bad.append({"q": gtab.q, "j": 0, "value": repr(complex(gtab.values[0]))})
    dev = np.abs(np.abs(gtab.values[1:]) - math.sqrt(gtab.q))
    for j in np.nonzero(dev > tol)[0] + 1:
        bad.append({"q": gtab.q, "j": int(j), "abs": float(abs(gtab.values[j]))})
    return bad


def verify_suite(level: str = "quick", seed: int = 0) -> VerifyReport:
    if level not in ("quick", "full"):
        raise ValueError("level must be quick or full")
    fields = QUICK_FIELDS + (FULL_EXTRA if level == "full" else [])
    draws = 20 if level == "quick" else 100
    rng = np.random.default_rng(seed)
    rep = VerifyReport(level)
    t0 = time.perf_counter()

    def add(suite, name, ok, **details):
        rep.results.append(CheckResult(suite, name, bool(ok), details))

    for p, k in fields:
        F = build_field(p, k)
        q, N = F.q, F.q - 1
        tag = {"p": p, "k": k}
        nz = np.arange(1, q)

        # field
        e = np.arange(N)
        add("field", "dlog_roundtrip", np.array_equal(F.dlog(F.pow_g(e)), e)
            and np.array_equal(F.pow_g(F.dlog(nz)), nz), **tag)
        add("field", "additive_orthogonality",
            abs(ch.psi_table(F).sum()) <= 64 * q * 2**-52, **tag)
        x, y, z = rng.integers(0, q, size=(3, 50))
        add("field", "axioms",
            np.array_equal(F.mul(x, F.add(y, z)), F.add(F.mul(x, y), F.mul(x, z)))
            and np.array_equal(F.mul(F.mul(x, y), z), F.mul(x, F.mul(y, z))), **tag)

        # characters
        roots = ch.mul_roots(F)
        sums = np.array([roots[(j * F.dlog_table[nz]) % N].sum() for j in range(1, N)])
        add("characters", "orthogonality", np.all(np.abs(sums) <= q * 2**-46), **tag)

        # gauss
        gt = gauss_all(F)
        bad = check_gauss_table(gt)
        add("gauss", "modulus", not bad, **tag, bad=bad[:5])
        js = range(N) if N <= 256 else rng.integers(0, N, size=64)
        diff = max(abs(gauss_direct(F, int(j)) - gt.values[int(j)]) for j in js)
        add("gauss", "bulk_vs_direct", diff <= 8 * gt.tol, **tag, max_diff=float(diff))
        if N > 1:
            minus1 = N // 2 if q % 2 else 0
            lhs = gt.values[(-np.arange(1, N)) % N]
            rhs = roots[(np.arange(1, N) * minus1) % N] * np.conj(gt.values[1:])
            add("gauss", "conjugation", np.max(np.abs(lhs - rhs)) <= 8 * gt.tol, **tag)

        if q < 5:
            continue

        # jacobi: quotient identity and psi-independence
        c = int(rng.integers(2, q)) if q > 2 else 1
        gt_c = gauss_all(F, c)
        worst = 0.0
        worst_c = 0.0
        for _ in range(draws):
            m = int(rng.integers(2, 6))
            if (m - 1) * q * q > 2**24:
                m = 2
            idx = [int(v) for v in rng.integers(1, N, size=m)]
            if sum(idx) % N == 0:
                continue
            jd = jacobi_direct(F, idx).value
            jg = jacobi_via_gauss(gt, idx)
            worst = max(worst, abs(jd - jg.value) / abs(jd))
            worst_c = max(worst_c, abs(jacobi_via_gauss(gt_c, idx).value - jg.value) / abs(jd))
        add("jacobi", "quotient_identity", worst <= 1e-8, **tag, max_rel=worst)
        add("jacobi", "psi_independence", worst_c <= 1e-8, **tag, c=c, max_rel=worst_c)

        # kloosterman
        for n in (1, 2, 3, 4):
            kt = kloosterman_all(gt, n)
            fwd = kloosterman_forward(kt)
            scale = q ** (n / 2)
            add("kloosterman", "forward_identity",
                np.max(np.abs(fwd - gt.values**n)) <= 1e-9 * scale * N, **tag, n=n)
            add("kloosterman", "deligne",
                np.max(np.abs(kt.values)) <= kt.deligne_bound() * (1 + 1e-9), **tag, n=n,
                max_abs=float(np.max(np.abs(kt.values))), bound=kt.deligne_bound())
            if n <= 3 and (q - 1) ** (n - 1) * 8 <= 2**20:
                ts = rng.integers(0, N, size=8)
                d = max(abs(kloosterman_direct(F, n, int(F.exp_table[t])) - kt.values[t]) for t in ts)
                add("kloosterman", "table_vs_direct", d <= 1e-8 * max(1.0, scale), **tag, n=n)

        # S sums
        for s in (1, 2):
            for n in (1, 2):
                viol = []
                for _ in range(draws):
                    eta = [int(v) for v in rng.integers(1, N, size=s)]
                    rho = [int(v) for v in rng.integers(1, N, size=s)]
                    lam = int(rng.integers(0, N))
                    val = abs(s_sum(gt, eta, rho, lam, n))
                    if val > s_trivial_bound(q) * (1 + 1e-9):
                        viol.append(("trivial", eta, rho, lam))
                    if not is_permutation(eta, rho, q) and val > s_katz_bound(q, s, n) * (1 + 1e-9):
                        viol.append(("katz", eta, rho, lam))
                add("s_sum", "bounds", not viol, **tag, s=s, n=n, violations=viol[:3])

        # moments and bounds
        m = int(rng.integers(2, 4))
        a1 = ch.random_subset(q, int(rng.integers(1, q - 1)), rng.integers(1 << 30))
        a2 = ch.random_subset(q, int(rng.integers(1, q - 1)), rng.integers(1 << 30))
        tail = ch.random_tail(q, m, min(2, (q - 2) ** (m - 2)), rng.integers(1 << 30))
        ns = list(range(1, 9))
        md, cnt = moments_direct(gt, a1, a2, tail, ns)
        mc, cnt2 = moments_convolution(gt, a1, a2, tail, ns)
        add("moments", "fast_vs_direct",
            cnt == cnt2 and np.max(np.abs(md - mc)) <= max(cnt, 1) * 1e-10, **tag)
        B = len(tail)
        ok = all(abs(md[n - 1]) <= bound_eM1_rhs(q, len(a1), len(a2), B, s, n) * (1 + 1e-6)
                 and abs(md[n - 1]) <= bound_eM2_rhs(q, len(a1), len(a2), B, n) * (1 + 1e-6)
                 for n in ns for s in (1, 2, 3))
        add("moments", "eM1_eM2", ok, **tag, m=m, A1=len(a1), A2=len(a2), B=B)

    # discrepancy engine on random multisets
    for _ in range(draws):
        npts = int(rng.integers(1, 200))
        th = rng.random(npts)
        if rng.random() < 0.3:
            th = np.round(th * 16) / 16 % 1.0
        rq = discrepancy_exact(th, method="quadratic")
        rs = discrepancy_exact(th, method="sorted")
        add("discrepancy", "quadratic_vs_sorted", abs(rq.d_exact - rs.d_exact) <= 1e-12, n=npts)
        add("discrepancy", "star_bracket",
            rq.d_star <= rq.d_exact + 1e-12 and rq.d_exact <= 2 * rq.d_star + 1e-12, n=npts)
        moms = weyl_moments(th, range(1, 65))
        et_ok = all(rq.d_exact <= erdos_turan_rhs(moms, npts, K) * (1 + 1e-12) for K in range(1, 65))
        add("discrepancy", "erdos_turan", et_ok, n=npts)

    rep.seconds = time.perf_counter() - t0
    return rep
