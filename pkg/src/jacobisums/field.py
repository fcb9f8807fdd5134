"""Finite fields F_q = F_p[t]/(f) with discrete-log tables.

Elements are encoded as integers in [0, q): the base-p digits of the
encoding are the coefficients of a polynomial of degree < k, lowest
degree first.  Encoding 0 is zero and encoding 1 is one.  For k = 1 the
modulus is ``t`` and arithmetic is plain arithmetic mod p.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import FieldTooLarge, NotPrime, ReducibleModulus, ZeroInverse

MAX_TABLE_Q = 2**26


# ---------------------------------------------------------------------------
# integer helpers
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    d = 3
    while d <= r:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n by trial division."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# polynomials over F_p: lists of ints, lowest degree first, no trailing zeros
# ---------------------------------------------------------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_divmod(a, b, p):
    a = list(a)
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        shift = len(a) - 1 - db
        c = a[-1] * inv_lead % p
        quot[shift] = c
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % p
        _trim(a)
    return _trim(quot), a


def _poly_mod(a, f, p):
    return _poly_divmod(a, f, p)[1]


def _poly_gcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def _poly_powmod(a, e, f, p):
    result = [1]
    base = _poly_mod(a, f, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), f, p)
        base = _poly_mod(_poly_mul(base, base, p), f, p)
        e >>= 1
    return result


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Ben-Or test: f has no factor of degree <= deg(f)/2."""
    f = _trim([int(c) % p for c in f])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    t = [0, 1]
    h = t
    for _ in range(k // 2):
        h = _poly_powmod(h, p, f, p)
        if len(_poly_gcd(f, _poly_sub(h, t, p), p)) > 1:
            return False
    return True


def _encode(coeffs, p) -> int:
    out = 0
    for c in reversed(coeffs):
        out = out * p + c
    return out


def _decode(x: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        x, r = divmod(x, p)
        out.append(r)
    return _trim(out)


# ---------------------------------------------------------------------------
# the field
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldSpec:
    """A realized F_q with generator and discrete-log tables.

    ``exp_table[t]`` is the encoding of g**t and ``dlog_table[x]`` its
    inverse (``dlog_table[0] == -1``).  Instances are immutable.
    """

    p: int
    k: int
    q: int
    modulus: tuple[int, ...]
    generator: int
    exp_table: np.ndarray = dc_field(repr=False)
    dlog_table: np.ndarray = dc_field(repr=False)

    # -- digit helpers ----------------------------------------------------

    @cached_property
    def _place(self) -> np.ndarray:
        return self.p ** np.arange(self.k, dtype=np.int64)

    def digits(self, x) -> np.ndarray:
        """Base-p digits of x, shape (k, *x.shape)."""
        x = np.asarray(x, dtype=np.int64)
        return (x[None, ...] // self._place.reshape((-1,) + (1,) * x.ndim)) % self.p

    def from_digits(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=np.int64)
        return np.tensordot(self._place, d, axes=(0, 0))

    # -- arithmetic -------------------------------------------------------

    def add(self, x, y):
        xa, ya = np.broadcast_arrays(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))
        if self.k == 1:
            return _like(x, y, (xa + ya) % self.p)
        return _like(x, y, self.from_digits((self.digits(xa) + self.digits(ya)) % self.p))

    def neg(self, x):
        if self.k == 1:
            return _like(x, x, (-np.asarray(x, dtype=np.int64)) % self.p)
        return _like(x, x, self.from_digits((-self.digits(x)) % self.p))

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        xa = np.asarray(x, dtype=np.int64)
        ya = np.asarray(y, dtype=np.int64)
        n = self.q - 1
        lx = self.dlog_table[xa]
        ly = self.dlog_table[ya]
        out = self.exp_table[(lx + ly) % n]
        out = np.where((xa == 0) | (ya == 0), 0, out)
        return _like(x, y, out)

    def inv(self, x):
        xa = np.asarray(x, dtype=np.int64)
        if np.any(xa == 0):
            raise ZeroInverse("0 has no multiplicative inverse")
        return _like(x, x, self.exp_table[(-self.dlog_table[xa]) % (self.q - 1)])

    def pow_g(self, e):
        return _like(e, e, self.exp_table[np.asarray(e, dtype=np.int64) % (self.q - 1)])

    def dlog(self, x):
        xa = np.asarray(x, dtype=np.int64)
        if np.any(xa == 0):
            raise ZeroInverse("discrete log of 0 is undefined")
        return _like(x, x, self.dlog_table[xa])

    def power(self, x, e: int):
        if x == 0:
            return 0 if e > 0 else 1
        return int(self.exp_table[(int(self.dlog_table[x]) * e) % (self.q - 1)])

    # -- trace ------------------------------------------------------------

    @cached_property
    def basis_traces(self) -> np.ndarray:
        """Tr(t**i) for i < k, each an element of F_p."""
        f = list(self.modulus)
        out = []
        for i in range(self.k):
            ti = _poly_mod([0] * i + [1], f, self.p)
            acc: list[int] = []
            h = ti
            for _ in range(self.k):
                acc = _trim([(a + b) % self.p for a, b in _zip_pad(acc, h)])
                h = _poly_powmod(h, self.p, f, self.p)
            if len(acc) > 1:
                raise AssertionError("trace did not land in the prime field")
            out.append(acc[0] if acc else 0)
        return np.array(out, dtype=np.int64)

    def trace(self, x):
        """Absolute trace F_q -> F_p, vectorized over x."""
        d = self.digits(x)
        tr = np.tensordot(self.basis_traces, d, axes=(0, 0)) % self.p
        return _like(x, x, tr)

    @cached_property
    def trace_table(self) -> np.ndarray:
        t = self.trace(np.arange(self.q, dtype=np.int64))
        t.flags.writeable = False
        return t

    # -- serialization ----------------------------------------------------

    def to_record(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus),
                "generator": self.generator}

    def to_text(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> "FieldSpec":
        return build_field(int(rec["p"]), int(rec["k"]), modulus=rec["modulus"],
                           generator=int(rec["generator"]))

    @classmethod
    def from_text(cls, text: str) -> "FieldSpec":
        return cls.from_record(json.loads(text))


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0), (b[i] if i < len(b) else 0)) for i in range(n)]


def _like(x, y, out):
    """Return a Python int when both inputs were scalars."""
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return int(out)
    return out


def _random_irreducible(p: int, k: int, seed: int) -> list[int]:
    rng = np.random.default_rng(seed)
    while True:
        coeffs = [int(c) for c in rng.integers(0, p, size=k)] + [1]
        if coeffs[0] != 0 and is_irreducible(coeffs, p):
            return coeffs


def _is_primitive(g: int, p: int, k: int, f: list[int], factors: list[int]) -> bool:
    q = p**k
    if g == 0:
        return False
    if k == 1:
        return all(pow(g, (q - 1) // r, p) != 1 for r in factors)
    gp = _decode(g, p, k)
    return all(_poly_powmod(gp, (q - 1) // r, f, p) != [1] for r in factors)


def _build_exp_table(p: int, k: int, f: list[int], g: int) -> np.ndarray:
    n = p**k - 1
    block = max(1, math.isqrt(n))
    if block * block < n:
        block += 1
    out = np.empty(block * block, dtype=np.int64)
    if k == 1:
        base = np.empty(block, dtype=np.int64)
        cur = 1
        for i in range(block):
            base[i] = cur
            cur = cur * g % p
        step = cur
        lead = 1
        for r in range(block):
            out[r * block:(r + 1) * block] = base * lead % p
            lead = lead * step % p
        return out[:n]

    place = p ** np.arange(k, dtype=np.int64)
    gpoly = _decode(g, p, k)
    base_polys = []
    cur = [1]
    for _ in range(block):
        base_polys.append(cur)
        cur = _poly_mod(_poly_mul(cur, gpoly, p), f, p)
    step = cur
    base = np.zeros((k, block), dtype=np.int64)
    for i, poly in enumerate(base_polys):
        base[: len(poly), i] = poly
    # x**i mod f for i < 2k-1, as coefficient vectors of length k
    red = np.zeros((2 * k - 1, k), dtype=np.int64)
    for i in range(2 * k - 1):
        r = _poly_mod([0] * i + [1], f, p)
        red[i, : len(r)] = r
    lead = [1]
    for r in range(block):
        prod = np.zeros((2 * k - 1, block), dtype=np.int64)
        for i, c in enumerate(lead):
            if c:
                prod[i : i + k] += c * base
        prod %= p
        reduced = (red.T @ prod) % p
        out[r * block:(r + 1) * block] = place @ reduced
        lead = _poly_mod(_poly_mul(lead, step, p), f, p)
    return out[:n]


def build_field(p: int, k: int = 1, modulus: Sequence[int] | None = None,
                seed: int = 0, generator: int | None = None) -> FieldSpec:
    """Construct F_{p^k}.

    When ``modulus`` (coefficients lowest degree first, monic) is omitted a
    random monic irreducible is drawn deterministically from ``seed``.  The
    generator is the smallest primitive encoding unless one is supplied.
    Table construction is limited to q <= 2**26.
    """
    p, k = int(p), int(k)
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    q = p**k
    if q > MAX_TABLE_Q:
        raise FieldTooLarge(f"q = {q} exceeds the table limit {MAX_TABLE_Q}")

    if k == 1:
        # every monic linear modulus gives the same constants; store t
        if modulus is not None:
            given = _trim([int(c) % p for c in modulus])
            if len(given) != 2 or given[1] != 1:
                raise ReducibleModulus("degree-1 modulus must be monic of degree 1")
        f = [0, 1]
    elif modulus is None:
        f = _random_irreducible(p, k, seed)
    else:
        f = _trim([int(c) % p for c in modulus])
        if len(f) != k + 1 or f[-1] != 1:
            raise ReducibleModulus(f"modulus must be monic of degree {k}: {list(modulus)}")
        if not is_irreducible(f, p):
            raise ReducibleModulus(f"{f} is reducible over F_{p}")

    factors = prime_factors(q - 1)
    if generator is None:
        g = next(c for c in range(1, q) if _is_primitive(c, p, k, f, factors))
    else:
        g = int(generator)
        if not (0 < g < q and _is_primitive(g, p, k, f, factors)):
            raise ValueError(f"{g} does not generate F_{q}^x")

    exp_table = _build_exp_table(p, k, f, g)
    dlog_table = np.full(q, -1, dtype=np.int64)
    dlog_table[exp_table] = np.arange(q - 1, dtype=np.int64)
    if exp_table.min() < 1 or np.count_nonzero(dlog_table >= 0) != q - 1:
        raise AssertionError("generator powers are not a bijection onto F_q^x")
    exp_table.flags.writeable = False
    dlog_table.flags.writeable = False
    return FieldSpec(p=p, k=k, q=q, modulus=tuple(f), generator=g,
                     exp_table=exp_table, dlog_table=dlog_table)
