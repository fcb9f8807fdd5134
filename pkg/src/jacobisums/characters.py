"""Multiplicative and additive characters of a finite field.

A multiplicative character is an integer index j mod (q-1) with
chi_j(g**t) = exp(2*pi*i * j*t / (q-1)); j = 0 is the trivial character.
All character algebra (products, inverses, conjugates) is integer
arithmetic mod q-1.  The additive character is psi(x) = exp(2*pi*i Tr(x)/p),
optionally twisted to psi_c(x) = psi(c*x).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ZeroArgument
from .field import FieldSpec


@lru_cache(maxsize=64)
def _roots(n: int) -> np.ndarray:
    r = np.exp(2j * np.pi * np.arange(n) / n)
    r.flags.writeable = False
    return r


def mul_roots(field: FieldSpec) -> np.ndarray:
    """exp(2*pi*i t/(q-1)) for t in [0, q-1)."""
    return _roots(field.q - 1)


def eval_mul_char(field: FieldSpec, j: int, x):
    """chi_j(x) for nonzero x (scalar or array)."""
    xa = np.asarray(x, dtype=np.int64)
    if np.any(xa == 0):
        raise ZeroArgument("multiplicative characters are undefined at 0")
    n = field.q - 1
    out = mul_roots(field)[(int(j) % n) * field.dlog_table[xa] % n]
    return complex(out) if np.ndim(x) == 0 else out


def psi_table(field: FieldSpec, c: int = 1) -> np.ndarray:
    """psi_c(x) for every encoding x in [0, q)."""
    base = _roots(field.p)[field.trace_table]
    if c == 1:
        return base
    if c == 0:
        raise ValueError("psi_0 is the trivial additive character")
    x = np.arange(field.q, dtype=np.int64)
    return base[field.mul(x, c)]


def eval_add_char(field: FieldSpec, x, c: int = 1):
    tr = field.trace(field.mul(x, c) if c != 1 else x)
    out = _roots(field.p)[tr]
    return complex(out) if np.ndim(x) == 0 else out


def conj_index(j: int, q: int) -> int:
    return (-j) % (q - 1)


def product_index(indices: Sequence[int], q: int) -> int:
    return int(sum(int(j) for j in indices) % (q - 1))


def is_in_a_circle(indices: Sequence[int], q: int) -> bool:
    """True when the product of the characters is nontrivial."""
    return product_index(indices, q) != 0


class Provenance(str, enum.Enum):
    FULL = "full"
    RANDOM = "random"
    INTERVAL = "interval"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class CharSubset:
    """A subset of the nontrivial characters, stored as sorted indices."""

    q: int
    indices: np.ndarray
    provenance: Provenance = Provenance.EXPLICIT
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size and (idx[0] < 1 or idx[-1] > self.q - 2):
            raise ValueError(f"subset indices must lie in [1, {self.q - 2}]")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self):
        return iter(int(j) for j in self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.q - 1, dtype=bool)
        m[self.indices] = True
        return m

    def to_record(self) -> dict:
        return {"q": self.q, "provenance": self.provenance.value,
                "params": self.params, "indices": [int(j) for j in self.indices]}

    def to_text(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> "CharSubset":
        return cls(int(rec["q"]), rec["indices"], Provenance(rec["provenance"]),
                   dict(rec.get("params", {})))


def full_subset(q: int) -> CharSubset:
    return CharSubset(q, np.arange(1, q - 1), Provenance.FULL)


def interval_subset(q: int, lo: int, hi: int) -> CharSubset:
    """Indices lo..hi inclusive."""
    return CharSubset(q, np.arange(lo, hi + 1), Provenance.INTERVAL, {"lo": lo, "hi": hi})


def explicit_subset(q: int, indices: Sequence[int]) -> CharSubset:
    return CharSubset(q, list(indices), Provenance.EXPLICIT)


def sample_without_replacement(population: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """First ``size`` slots of a partial Fisher-Yates shuffle of range(population).

    Step i swaps slot i with a slot drawn uniformly from [i, population)
    by ``rng.integers``; the generator is numpy's PCG64.
    """
    if not 0 <= size <= population:
        raise ValueError(f"cannot draw {size} of {population}")
    perm = np.arange(population, dtype=np.int64)
    picks = rng.integers(np.arange(size), population) if size else np.empty(0, np.int64)
    for i in range(size):
        r = int(picks[i])
        perm[i], perm[r] = perm[r], perm[i]
    return perm[:size]


def random_subset(q: int, size: int, seed) -> CharSubset:
    """``size`` distinct nontrivial characters drawn with PCG64(seed)."""
    rng = np.random.default_rng(seed)
    picks = sample_without_replacement(q - 2, size, rng) + 1
    return CharSubset(q, picks, Provenance.RANDOM, {"seed": _jsonable(seed), "size": size})


def _jsonable(seed):
    return list(seed) if isinstance(seed, (list, tuple)) else seed


# ---------------------------------------------------------------------------
# the tail set B of (m-2)-tuples
# ---------------------------------------------------------------------------

def empty_tail() -> np.ndarray:
    """B for m = 2: the single empty vector."""
    return np.zeros((1, 0), dtype=np.int64)


def as_tail(b, m: int | None = None) -> np.ndarray:
    arr = np.asarray(b, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else empty_tail()
    if m is not None and arr.shape[1] != m - 2:
        raise ValueError(f"tail vectors must have length {m - 2}, got {arr.shape[1]}")
    return arr


def random_tail(q: int, m: int, count: int, seed) -> np.ndarray:
    """``count`` distinct vectors in X_q^(m-2), lexicographically sorted."""
    if m == 2:
        return empty_tail()
    total = (q - 2) ** (m - 2)
    if count > total:
        raise ValueError(f"only {total} tail vectors exist")
    rng = np.random.default_rng(seed)
    if total <= 2**24:
        codes = sample_without_replacement(total, count, rng)
    else:
        seen: set[int] = set()
        codes_list = []
        while len(codes_list) < count:
            c = int(rng.integers(0, total))
            if c not in seen:
                seen.add(c)
                codes_list.append(c)
        codes = np.array(codes_list, dtype=np.int64)
    digits = np.empty((count, m - 2), dtype=np.int64)
    for i in range(m - 2):
        codes, r = np.divmod(codes, q - 2)
        digits[:, m - 3 - i] = r + 1
    order = np.lexsort(digits.T[::-1])
    return digits[order]


def full_tail(q: int, m: int) -> np.ndarray:
    if m == 2:
        return empty_tail()
    grids = np.meshgrid(*([np.arange(1, q - 1)] * (m - 2)), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def enumerate_a_circle(a1: CharSubset, a2: CharSubset, tail) -> Iterator[tuple[int, ...]]:
    """Tuples of A1 x A2 x B with nontrivial product.

    Ordered lexicographically by (position in B, j1, j2).
    """
    q = a1.q
    tail = as_tail(tail)
    for b in tail:
        bt = tuple(int(x) for x in b)
        lam = sum(bt)
        for j1 in a1:
            for j2 in a2:
                if (j1 + j2 + lam) % (q - 1):
                    yield (j1, j2) + bt


def count_a_circle(a1: CharSubset, a2: CharSubset, tail) -> int:
    q = a1.q
    n = q - 1
    tail = as_tail(tail)
    m2 = a2.mask()
    total = 0
    for b in tail:
        lam = int(b.sum()) % n
        excluded = int(m2[(-lam - a1.indices) % n].sum())
        total += len(a1) * len(a2) - excluded
    return total
