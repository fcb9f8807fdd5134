"""Gauss, Jacobi and Kloosterman sums, the auxiliary S-sums, and moments.

Each quantity has a direct-summation oracle and a bulk path built on
``GaussTable``.  Normalized quantities are handled as unit phases (a
Gauss sum divided by sqrt(q)), so nothing of size q**(m/2) is formed
unless the caller asks for the unnormalized value.

Tolerance model: a q-term sum of unit-modulus terms is trusted to
``tol = 64 * q * eps``; nested sums scale that by their term count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .characters import (CharSubset, as_tail, count_a_circle, mul_roots, psi_table)
from .dft import cyclic_convolve, dft, pairwise_sum
from .errors import BudgetExceeded, TrivialCharacterInTuple, TrivialProduct
from .field import FieldSpec

EPS = np.finfo(float).eps
DIRECT_BUDGET = 2**24


def default_tol(q: int) -> float:
    return 64 * q * EPS


def _wrap01(theta):
    """Reduce to [0, 1); guards the value 1.0 produced by rounding."""
    t = np.mod(theta, 1.0)
    return np.where(t >= 1.0, 0.0, t)


@dataclass(frozen=True, eq=False)
class GaussTable:
    """``values[j] = G(chi_j)`` for j in [0, q-1); ``values[0] = G(1) = -1``."""

    q: int
    values: np.ndarray

    @property
    def tol(self) -> float:
        return default_tol(self.q)

    @cached_property
    def normalized(self) -> np.ndarray:
        """G / sqrt(q): unit modulus except at j = 0, where it is -1/sqrt(q)."""
        return self.values / math.sqrt(self.q)

    @cached_property
    def phases(self) -> np.ndarray:
        """G / |G| for every j (exactly -1 at j = 0)."""
        ph = self.values / np.abs(self.values)
        ph[0] = -1.0
        return ph

    @cached_property
    def angles(self) -> np.ndarray:
        """arg G / (2 pi) in [0, 1)."""
        a = _wrap01(np.angle(self.values) / (2 * np.pi))
        a[0] = 0.5
        return a

    def to_csv(self, path) -> None:
        _write_complex_csv(path, self.values)


@dataclass(frozen=True, eq=False)
class KloostermanTable:
    """``values[t] = Kl_n(g**t)``."""

    q: int
    n: int
    values: np.ndarray

    def deligne_bound(self) -> float:
        return self.n * self.q ** ((self.n - 1) / 2)

    def to_csv(self, path) -> None:
        _write_complex_csv(path, self.values)


@dataclass(frozen=True)
class JacobiValue:
    value: complex
    angle: float

    @property
    def normalized(self) -> complex:
        return complex(np.exp(2j * np.pi * self.angle))


def _write_complex_csv(path, values) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, z in enumerate(values):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


# ---------------------------------------------------------------------------
# Gauss sums
# ---------------------------------------------------------------------------

def _psi_on_powers(field: FieldSpec, c: int = 1) -> np.ndarray:
    """t -> psi_c(g**t)."""
    return psi_table(field, c)[field.exp_table]


def gauss_direct(field: FieldSpec, j: int, c: int = 1) -> complex:
    """G(chi_j) = sum over a != 0 of psi_c(a) chi_j(a), summed pairwise."""
    n = field.q - 1
    t = np.arange(n, dtype=np.int64)
    terms = _psi_on_powers(field, c) * mul_roots(field)[(int(j) % n) * t % n]
    return complex(pairwise_sum(terms))


def gauss_all(field: FieldSpec, c: int = 1) -> GaussTable:
    """All q-1 Gauss sums as one DFT of t -> psi_c(g**t)."""
    vals = dft(_psi_on_powers(field, c), sign=+1)
    vals.flags.writeable = False
    return GaussTable(field.q, vals)


# ---------------------------------------------------------------------------
# Jacobi sums
# ---------------------------------------------------------------------------

def _check_tuple(indices: Sequence[int], q: int, product_ok: bool = False) -> list[int]:
    n = q - 1
    idx = [int(j) % n for j in indices]
    if len(idx) < 2:
        raise ValueError("a Jacobi sum needs at least two characters")
    if any(j == 0 for j in idx):
        raise TrivialCharacterInTuple(f"trivial character in {tuple(indices)}")
    if not product_ok and sum(idx) % n == 0:
        raise TrivialProduct(f"product of {tuple(indices)} is trivial")
    return idx


def jacobi_direct(field: FieldSpec, indices: Sequence[int],
                  budget: int = DIRECT_BUDGET) -> JacobiValue:
    """J(chi_1, ..., chi_m) by summing over a_1 + ... + a_m = 1.

    The constraint is enforced by accumulating W_k[x], the sum of
    chi_1(a_1)...chi_k(a_k) over a_1 + ... + a_k = x with all a_i != 0,
    one coordinate at a time; cost (m-1) * q**2 terms.  Tuples with a
    trivial product are summed too, though |J| is then not q**((m-1)/2).
    """
    q = field.q
    idx = _check_tuple(indices, q, product_ok=True)
    m = len(idx)
    cost = (m - 1) * q * q
    if cost > budget:
        raise BudgetExceeded(f"direct Jacobi sum needs {cost} terms > budget {budget}")
    n = q - 1
    roots = mul_roots(field)
    nonzero = np.arange(1, q, dtype=np.int64)
    dl = field.dlog_table[nonzero]
    x = np.arange(q, dtype=np.int64)
    # sub[x, a] = x - a, for a ranging over nonzero elements
    sub = field.sub(x[:, None], nonzero[None, :])
    w = np.zeros(q, dtype=complex)
    w[nonzero] = roots[idx[0] * dl % n]
    for j in idx[1:-1]:
        chi = roots[j * dl % n]
        w = pairwise_sum(w[sub] * chi[None, :], axis=-1)
    # last coordinate: a_m = 1 - (a_1 + ... + a_{m-1}) must be nonzero
    last = field.sub(1, x)
    ok = last != 0
    terms = w[ok] * roots[idx[-1] * field.dlog_table[last[ok]] % n]
    value = complex(pairwise_sum(terms))
    angle = float(_wrap01(np.angle(value) / (2 * np.pi)))
    return JacobiValue(value, angle)


def jacobi_enumerate(field: FieldSpec, indices: Sequence[int],
                     budget: int = DIRECT_BUDGET) -> complex:
    """Term-by-term enumeration of a_1, ..., a_{m-1}; tiny fields only."""
    q = field.q
    idx = _check_tuple(indices, q, product_ok=True)
    m = len(idx)
    if (q - 1) ** (m - 1) > budget:
        raise BudgetExceeded("enumeration exceeds budget")
    n = q - 1
    roots = mul_roots(field)
    s = np.zeros(1, dtype=np.int64)
    e = np.zeros(1, dtype=np.int64)
    nonzero = np.arange(1, q, dtype=np.int64)
    for j in idx[:-1]:
        s = field.add(s[:, None], nonzero[None, :]).ravel()
        e = ((e[:, None] + j * field.dlog_table[nonzero][None, :]) % n).ravel()
    last = field.sub(1, s)
    ok = last != 0
    e = (e[ok] + idx[-1] * field.dlog_table[last[ok]]) % n
    return complex(pairwise_sum(roots[e]))


def jacobi_via_gauss(gtab: GaussTable, indices: Sequence[int]) -> JacobiValue:
    """J = G(chi_1)...G(chi_m) / G(chi_1...chi_m)."""
    q = gtab.q
    idx = _check_tuple(indices, q)
    prod = sum(idx) % (q - 1)
    norm = gtab.normalized
    phase = complex(np.conj(norm[prod]))
    for j in idx:
        phase *= complex(norm[j])
    angle = float(_wrap01(sum(float(gtab.angles[j]) for j in idx) - float(gtab.angles[prod])))
    value = phase * q ** ((len(idx) - 1) / 2)
    return JacobiValue(value, angle)


# ---------------------------------------------------------------------------
# Kloosterman sums
# ---------------------------------------------------------------------------

def kloosterman_direct(field: FieldSpec, n: int, a: int, c: int = 1,
                       budget: int = DIRECT_BUDGET) -> complex:
    """Kl_n(a) = sum over a_1...a_n = a of psi_c(a_1 + ... + a_n)."""
    q = field.q
    if n < 1:
        raise ValueError("n must be >= 1")
    if a == 0:
        raise ValueError("Kloosterman sums are taken at nonzero a")
    if (q - 1) ** (n - 1) > budget:
        raise BudgetExceeded(f"(q-1)**(n-1) = {(q - 1) ** (n - 1)} exceeds budget {budget}")
    psi = psi_table(field, c)
    nonzero = np.arange(1, q, dtype=np.int64)
    s = np.zeros(1, dtype=np.int64)
    e = np.zeros(1, dtype=np.int64)
    for _ in range(n - 1):
        s = field.add(s[:, None], nonzero[None, :]).ravel()
        e = ((e[:, None] + field.dlog_table[nonzero][None, :]) % (q - 1)).ravel()
    last = field.exp_table[(int(field.dlog_table[a]) - e) % (q - 1)]
    return complex(pairwise_sum(psi[field.add(s, last)]))


def kloosterman_all(gtab: GaussTable, n: int) -> KloostermanTable:
    """Kl_n(g**t) for all t by inverting G(chi)**n = sum_a Kl_n(a) chi(a)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    powers = gtab.values ** n
    vals = dft(powers, sign=-1) / (gtab.q - 1)
    vals.flags.writeable = False
    return KloostermanTable(gtab.q, n, vals)


def kloosterman_forward(ktab: KloostermanTable) -> np.ndarray:
    """sum_a Kl_n(a) chi_j(a) for every j; equals G(chi_j)**n."""
    return dft(ktab.values, sign=+1)


# ---------------------------------------------------------------------------
# S(eta, rho)
# ---------------------------------------------------------------------------

def exclusion_set(eta: Sequence[int], rho: Sequence[int], lam: int, q: int) -> set[int]:
    n = q - 1
    return {(-int(x) - lam) % n for x in list(eta) + list(rho)}


def s_sum(gtab: GaussTable, eta: Sequence[int], rho: Sequence[int], lam: int, n: int) -> complex:
    """sum over chi outside C of prod_i q^-n G(chi eta_i lam)^n conj(G(chi rho_i lam))^n."""
    q = gtab.q
    N = q - 1
    if len(eta) != len(rho):
        raise ValueError("eta and rho must have the same length")
    if any(int(x) % N == 0 for x in list(eta) + list(rho)):
        raise TrivialCharacterInTuple("eta and rho must be nontrivial characters")
    chi = np.arange(N, dtype=np.int64)
    norm = gtab.normalized
    prod = np.ones(N, dtype=complex)
    for e_i, r_i in zip(eta, rho):
        prod *= norm[(chi + e_i + lam) % N] * np.conj(norm[(chi + r_i + lam) % N])
    keep = np.ones(N, dtype=bool)
    keep[list(exclusion_set(eta, rho, lam, q))] = False
    return complex(pairwise_sum(prod[keep] ** n))


def is_permutation(eta: Sequence[int], rho: Sequence[int], q: int) -> bool:
    n = q - 1
    return sorted(int(x) % n for x in eta) == sorted(int(x) % n for x in rho)


def s_trivial_bound(q: int) -> float:
    return q - 2


def s_katz_bound(q: int, s: int, n: int) -> float:
    return s * n * (q - 1) / math.sqrt(q) + 2 * s / q ** (n / 2)


# ---------------------------------------------------------------------------
# moments of normalized Jacobi sums
# ---------------------------------------------------------------------------

def _tail_params(gtab: GaussTable, tail) -> tuple[np.ndarray, np.ndarray]:
    """Product index lambda_b and summed angle of each tail vector."""
    N = gtab.q - 1
    tail = as_tail(tail)
    lam = tail.sum(axis=1) % N
    ang = _wrap01(gtab.angles[tail].sum(axis=1)) if tail.shape[1] else np.zeros(len(tail))
    return lam, ang


def _phase(theta):
    """exp(2 pi i theta) after reducing theta mod 1."""
    return np.exp(2j * np.pi * _wrap01(np.asarray(theta)))


def moments_direct(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail,
                   n_values: Sequence[int], chunk: int = 1 << 18) -> tuple[np.ndarray, int]:
    """M^(n) for each n by the double loop over A1 x A2, per tail vector.

    Phases are multiplied as complex numbers; powers are built by repeated
    multiplication, renormalized to |z| = 1 every 64 steps.
    """
    N = gtab.q - 1
    n_values = [int(n) for n in n_values]
    nmax = max(n_values)
    lam, _ = _tail_params(gtab, tail)
    tail = as_tail(tail)
    ph = gtab.phases
    j1 = a1.indices
    j2 = a2.indices
    rows = max(1, chunk // max(1, len(j2)))
    partials: list[np.ndarray] = []
    count = 0
    for b, lb in zip(tail, lam):
        gb = complex(np.prod(ph[b])) if b.size else 1.0 + 0j
        for start in range(0, len(j1), rows):
            r = j1[start:start + rows]
            idx = (r[:, None] + j2[None, :] + lb) % N
            ok = idx != 0
            z = (ph[r][:, None] * ph[j2][None, :] * gb * np.conj(ph[idx]))[ok]
            count += z.size
            acc = np.empty((len(n_values), 1), dtype=complex)
            zn = np.ones_like(z)
            want = {n: i for i, n in enumerate(n_values)}
            for k in range(1, nmax + 1):
                zn = zn * z
                if k % 64 == 0:
                    zn /= np.abs(zn)
                if k in want:
                    acc[want[k], 0] = pairwise_sum(zn)
            partials.append(acc[:, 0])
    if not partials:
        return np.zeros(len(n_values), dtype=complex), 0
    return pairwise_sum(np.stack(partials, axis=-1), axis=-1), count


def moments_convolution(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail,
                        n_values: Sequence[int]) -> tuple[np.ndarray, int]:
    """M^(n) through a cyclic convolution over the character group.

    For each n, c[k] = sum over j1 + j2 = k of u(j1)^n u(j2)^n restricted to
    A1 x A2; then M^(n) = sum_b u_b^n sum_{k + lam_b != 0} c[k] conj(u(k + lam_b))^n.
    Cost O(q log q) per n plus O(q) per tail vector.
    """
    N = gtab.q - 1
    n_arr = np.asarray([int(n) for n in n_values])
    count = count_a_circle(a1, a2, tail)
    if count == 0:
        return np.zeros(len(n_arr), dtype=complex), 0
    lam, tang = _tail_params(gtab, tail)
    ang = gtab.angles
    a = np.zeros((len(n_arr), N), dtype=complex)
    b = np.zeros((len(n_arr), N), dtype=complex)
    a[:, a1.indices] = _phase(n_arr[:, None] * ang[a1.indices][None, :])
    b[:, a2.indices] = _phase(n_arr[:, None] * ang[a2.indices][None, :])
    c = cyclic_convolve(a, b)
    conj_pow = np.conj(_phase(n_arr[:, None] * ang[None, :]))
    k = np.arange(N)
    out = np.zeros(len(n_arr), dtype=complex)
    for lb, tb in zip(lam, tang):
        shifted = (k + lb) % N
        ok = shifted != 0
        inner = pairwise_sum(c[:, ok] * conj_pow[:, shifted[ok]], axis=-1)
        out = out + _phase(n_arr * tb) * inner
    return out, count


def moments(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail,
            n_values: Sequence[int], method: str = "auto") -> tuple[np.ndarray, int]:
    """Moments M^(n) = sum over A° of (normalized J)^n and the count #A°."""
    if method == "auto":
        N = gtab.q - 1
        work = len(a1) * len(a2) * len(as_tail(tail))
        method = "direct" if work <= 8 * N * max(1, N.bit_length()) else "convolution"
    if method == "direct":
        return moments_direct(gtab, a1, a2, tail, n_values)
    if method == "convolution":
        return moments_convolution(gtab, a1, a2, tail, n_values)
    raise ValueError(f"unknown moment method {method!r}")


def moment(gtab: GaussTable, a1: CharSubset, a2: CharSubset, tail, n: int,
           method: str = "auto") -> tuple[complex, int]:
    vals, count = moments(gtab, a1, a2, tail, [n], method)
    return complex(vals[0]), count
