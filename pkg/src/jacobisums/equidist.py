"""Discrepancy of normalized Jacobi-sum angles and the bound evaluators.

Angles are the theta in [0, 1) with q^(-(m-1)/2) J = exp(2 pi i theta).
The discrepancy of a multiset of N angles is the supremum, over closed
arcs [a, b] with a <= b <= a + 1, of |count/N - (b - a)|.  When A° is
empty the discrepancy is 1 by convention.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .characters import CharSubset, as_tail, count_a_circle
from .charsums import GaussTable, _tail_params, _wrap01, moments
from .errors import DomainError, SOutOfRange

EXACT_CAP = 4096
ET_CONSTANTS = (1.0, 4.0)


@dataclass(frozen=True, eq=False)
class AngleSet:
    thetas: np.ndarray
    is_empty_convention: bool = False

    def __len__(self) -> int:
        return int(self.thetas.size)


class DiscMethod(str, enum.Enum):
    EXACT_QUADRATIC = "exact_quadratic"
    EXACT_SORTED = "exact_sorted"
    STAR_ONLY = "star_only"
    CONVENTION = "empty_convention"


@dataclass(frozen=True)
class DiscrepancyReport:
    d_exact: float
    d_star: float
    n_points: int
    method: DiscMethod

    def to_row(self) -> dict:
        return {"d_exact": self.d_exact, "d_star": self.d_star,
                "n_points": self.n_points, "method": self.method.value}


# ---------------------------------------------------------------------------
# angle sets
# ---------------------------------------------------------------------------

def angles_from_subsets(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail,
                        chunk: int = 1 << 22) -> AngleSet:
    """One angle per tuple of A°, ordered by (tail position, j1, j2).

    Each angle is the sum of the Gauss-sum angles of chi_1, ..., chi_m minus
    that of their product, reduced mod 1.
    """
    N = gtab.q - 1
    ang = gtab.angles
    lam, tang = _tail_params(gtab, tail)
    j1, j2 = a1.indices, a2.indices
    out = np.empty(count_a_circle(a1, a2, tail))
    pos = 0
    rows = max(1, chunk // max(1, len(j2)))
    for lb, tb in zip(lam, tang):
        base2 = ang[j2] + tb
        for start in range(0, len(j1), rows):
            r = j1[start:start + rows]
            idx = (r[:, None] + j2[None, :] + lb) % N
            ok = idx != 0
            theta = _wrap01((ang[r][:, None] + base2[None, :] - ang[idx])[ok])
            out[pos:pos + theta.size] = theta
            pos += theta.size
    return AngleSet(out, is_empty_convention=out.size == 0)


# ---------------------------------------------------------------------------
# discrepancy
# ---------------------------------------------------------------------------

_CHUNK = 1 << 22


def _h_chunks(sorted_x: np.ndarray):
    """Yield (i, x) blocks with i the 1-based rank, keeping memory O(chunk)."""
    n = sorted_x.size
    for start in range(0, n, _CHUNK):
        x = sorted_x[start:start + _CHUNK]
        yield np.arange(start + 1, start + 1 + x.size, dtype=float), x


def star_discrepancy(sorted_x: np.ndarray) -> float:
    """sup over anchored arcs [0, x) of |count/N - x|; input sorted."""
    n = sorted_x.size
    best = 0.0
    for i, x in _h_chunks(sorted_x):
        best = max(best, float(np.max(i / n - x)), float(np.max(x - (i - 1) / n)))
    return best


def _extreme_sorted(sorted_x: np.ndarray) -> float:
    """Arc discrepancy in O(N): 1/N + max(h) - min(h), h_i = i/N - x_(i).

    Every closed arc between sorted points i and j (wrapping or not) has
    excess 1/N + h_j - h_i, and every open arc has deficit 1/N + h_i - h_j.
    """
    n = sorted_x.size
    hi, lo = -np.inf, np.inf
    for i, x in _h_chunks(sorted_x):
        h = i / n - x
        hi, lo = max(hi, float(h.max())), min(lo, float(h.min()))
    return float(1.0 / n + hi - lo)


def _extreme_quadratic(sorted_x: np.ndarray, block: int = 512) -> float:
    """Arc discrepancy by checking every pair of distinct point locations.

    For locations v_a, v_b the closed arc [v_a, v_b] (wrapping when a > b)
    has maximal count for its length; the open arc (v_a, v_b) has minimal
    count, and its deficit is the limit of closed arcs shrinking inward.
    """
    n = sorted_x.size
    v, counts = np.unique(sorted_x, return_counts=True)
    u = v.size
    cum = np.concatenate([[0], np.cumsum(counts)])  # cum[a] = points before v_a
    best = 0.0
    for start in range(0, u, block):
        a = np.arange(start, min(start + block, u))[:, None]
        b = np.arange(u)[None, :]
        wrap = a > b
        length = np.where(wrap, 1.0 - (v[a] - v[b]), v[b] - v[a])
        closed = np.where(wrap, n - (cum[a] - cum[b + 1]), cum[b + 1] - cum[a])
        same = a == b
        # a == b: degenerate closed arc is the point itself, open arc is the
        # whole circle minus that point
        open_count = np.where(same, n - counts[a], closed - counts[a] - counts[b])
        open_len = np.where(same, 1.0, length)
        excess = closed / n - length
        deficit = open_len - open_count / n
        best = max(best, float(excess.max()), float(deficit.max()))
    return best


def discrepancy_exact(angles: AngleSet | np.ndarray, exact_cap: int = EXACT_CAP,
                      method: str = "auto", overwrite: bool = False) -> DiscrepancyReport:
    """Extreme (arc) discrepancy and star discrepancy of an angle multiset.

    ``method``: "auto" (quadratic up to ``exact_cap`` points, sorted
    formula beyond), "quadratic", "sorted", or "star" (d_exact reported as
    the upper bracket 2 * d_star).  ``overwrite`` sorts the input in place
    instead of copying it.
    """
    if not isinstance(angles, AngleSet):
        arr = np.asarray(angles, dtype=float)
        angles = AngleSet(arr, arr.size == 0)
    if angles.is_empty_convention or len(angles) == 0:
        return DiscrepancyReport(1.0, 1.0, 0, DiscMethod.CONVENTION)
    if overwrite:
        x = angles.thetas
        x.sort()
    else:
        x = np.sort(angles.thetas)
    d_star = star_discrepancy(x)
    if method == "auto":
        method = "quadratic" if x.size <= exact_cap else "sorted"
    if method == "quadratic":
        return DiscrepancyReport(_extreme_quadratic(x), d_star, x.size, DiscMethod.EXACT_QUADRATIC)
    if method == "sorted":
        return DiscrepancyReport(_extreme_sorted(x), d_star, x.size, DiscMethod.EXACT_SORTED)
    if method == "star":
        return DiscrepancyReport(min(1.0, 2 * d_star), d_star, x.size, DiscMethod.STAR_ONLY)
    raise ValueError(f"unknown discrepancy method {method!r}")


def weyl_moments(thetas, n_values: Sequence[int]) -> np.ndarray:
    """sum_i exp(2 pi i n theta_i) for each n."""
    thetas = np.asarray(thetas, dtype=float)
    return np.array([np.exp(2j * np.pi * _wrap01(n * thetas)).sum() for n in n_values])


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def erdos_turan_rhs(moments_: Sequence[complex], count: int, K: int,
                    constants: tuple[float, float] = ET_CONSTANTS) -> float:
    """c0/K + c1 * sum_{n<=K} |M^(n)| / (n * count); moments_[n-1] is M^(n)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    K = int(K)
    if len(moments_) < K:
        raise ValueError(f"need {K} moments, got {len(moments_)}")
    c0, c1 = constants
    mags = np.abs(np.asarray(moments_[:K], dtype=complex))
    return float(c0 / K + c1 * np.sum(mags / np.arange(1, K + 1)) / count)


def bound_e0_rhs(q: int, a1: int, a2: int, s: int, c: float = 1.0) -> float:
    _check_bound_args(q, a1, a2, s)
    first = s * (math.sqrt(q) / a1) ** (1 / (2 * s + 1))
    second = (q / a1) ** (1 / (2 * s)) * math.log(q) / math.sqrt(s * a2)
    return c * (first + second)


def bound_e1_rhs(q: int, a1: int, a2: int, c: float = 1.0) -> float:
    _check_bound_args(q, a1, a2, 1)
    return c * (q / (a1 * a2)) ** 0.25


def bound_eM1_rhs(q: int, a1: int, a2: int, b: int, s: int, n: int) -> float:
    """A1^(1-1/2s) (s! A2^s q + s A2^2s (n sqrt q + 1))^(1/2s) B, in log space."""
    _check_bound_args(q, a1, a2, s)
    if not 1 <= s <= 20:
        raise SOutOfRange(f"s = {s} outside [1, 20]")
    log_t1 = math.log(math.factorial(s)) + s * math.log(a2) + math.log(q)
    log_t2 = math.log(s) + 2 * s * math.log(a2) + math.log(n * math.sqrt(q) + 1)
    hi = max(log_t1, log_t2)
    log_inner = hi + math.log(math.exp(log_t1 - hi) + math.exp(log_t2 - hi))
    return math.exp((1 - 1 / (2 * s)) * math.log(a1) + log_inner / (2 * s)) * b


def bound_eM2_rhs(q: int, a1: int, a2: int, b: int, n: int) -> float:
    _check_bound_args(q, a1, a2, 1)
    return n * math.sqrt(a1 * a2 * q) * b


def _check_bound_args(q, a1, a2, s):
    if q < 3 or a1 < 1 or a2 < 1 or s < 1:
        raise ValueError(f"need q >= 3, A1, A2, s >= 1 (got q={q}, A1={a1}, A2={a2}, s={s})")


def choose_s(q: float, epsilon: float) -> int:
    """ceil(eps log q / (2 log log q))."""
    if not 0 < epsilon <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if q <= math.e:
        raise DomainError(f"log log q is not positive for q = {q}")
    return max(1, math.ceil(epsilon * math.log(q) / (2 * math.log(math.log(q)))))


def choose_K_e0(q: float, a1: int, s: int) -> float:
    return max(1.0, (a1 / math.sqrt(q)) ** (1 / (2 * s + 1)) / s)


def choose_K_e1(q: float, a1: int, a2: int) -> float:
    return max(1.0, (q / (a1 * a2)) ** -0.25)


def fitted_constant(measured: Sequence[float], rhs: Sequence[float]) -> float:
    """Smallest C with measured <= C * rhs on every row."""
    m = np.asarray(measured, dtype=float)
    r = np.asarray(rhs, dtype=float)
    return float(np.max(m / r)) if m.size else float("nan")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

BOUND_COLUMNS = ("bound", "q", "m", "A1", "A2", "B", "s_or_n", "K", "measured", "rhs", "constant")


@dataclass
class BoundReport:
    """Measured quantities next to every bound evaluated at one parameter point."""

    q: int
    m: int
    a1: int
    a2: int
    b: int
    s: int
    K: int
    count: int
    d_exact: float
    moments: list[complex] = dc_field(default_factory=list)
    rhs_e0: float = float("nan")
    rhs_e1: float = float("nan")
    rhs_eM1: list[float] = dc_field(default_factory=list)
    rhs_eM2: list[float] = dc_field(default_factory=list)
    et_rhs: float = float("nan")
    constant: float = 1.0
    et_constants: tuple[float, float] = ET_CONSTANTS

    def rows(self) -> list[dict]:
        base = {"q": self.q, "m": self.m, "A1": self.a1, "A2": self.a2, "B": self.b}
        out = [
            dict(base, bound="e0", s_or_n=self.s, K=self.K, measured=self.d_exact,
                 rhs=self.rhs_e0, constant=self.constant),
            dict(base, bound="e1", s_or_n=self.s, K=self.K, measured=self.d_exact,
                 rhs=self.rhs_e1, constant=self.constant),
            dict(base, bound="ET", s_or_n=self.s, K=self.K, measured=self.d_exact,
                 rhs=self.et_rhs, constant=self.et_constants[1]),
        ]
        for n, (mom, r1, r2) in enumerate(zip(self.moments, self.rhs_eM1, self.rhs_eM2), 1):
            out.append(dict(base, bound="eM1", s_or_n=n, K=self.K, measured=abs(mom), rhs=r1, constant=1.0))
            out.append(dict(base, bound="eM2", s_or_n=n, K=self.K, measured=abs(mom), rhs=r2, constant=1.0))
        return [{c: row[c] for c in BOUND_COLUMNS} for row in out]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["moments"] = [[z.real, z.imag] for z in self.moments]
        return d


def bound_report(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail, s: int, K: int,
                 constant: float = 1.0, exact_cap: int = EXACT_CAP,
                 et_constants: tuple[float, float] = ET_CONSTANTS) -> BoundReport:
    """Measure D and M^(1..K) for one subset configuration and evaluate all bounds."""
    tail = as_tail(tail)
    q, m = gtab.q, tail.shape[1] + 2
    A1, A2, B = len(a1), len(a2), len(tail)
    K = max(1, int(K))
    angles = angles_from_subsets(gtab, a1, a2, tail)
    disc = discrepancy_exact(angles, exact_cap)
    moms, count = moments(gtab, a1, a2, tail, range(1, K + 1))
    rep = BoundReport(q=q, m=m, a1=A1, a2=A2, b=B, s=s, K=K, count=count,
                      d_exact=disc.d_exact, moments=[complex(z) for z in moms],
                      constant=constant, et_constants=et_constants)
    rep.rhs_e0 = bound_e0_rhs(q, A1, A2, s, constant)
    rep.rhs_e1 = bound_e1_rhs(q, A1, A2, constant)
    rep.rhs_eM1 = [bound_eM1_rhs(q, A1, A2, B, s, n) for n in range(1, K + 1)]
    rep.rhs_eM2 = [bound_eM2_rhs(q, A1, A2, B, n) for n in range(1, K + 1)]
    rep.et_rhs = erdos_turan_rhs(moms, count, K, et_constants) if count else 1.0
    return rep
