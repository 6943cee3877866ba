"""Binary interactions, symmetry statistics and interaction odds ratios.

Cells and interactions share one packed-bit index: the bits
``(a_1 .. a_d1, b_1 .. b_d2)`` with ``a_1`` most significant. Under this
indexing the value of the interaction ``m`` at cell ``x`` is

    (-1) ** popcount(m) * (-1) ** popcount(m & x)

so every statistic below is a sign-corrected Walsh-Hadamard transform.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DepthMismatch, LengthNotPowerOfTwo, NonPositiveProbability
from .expansion import BitMatrix


@dataclass(frozen=True, order=True)
class InteractionIndex:
    """The interaction ``A_a B_b`` given by two 0/1 tuples."""

    a: tuple
    b: tuple
    packed: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        a = tuple(int(t) for t in self.a)
        b = tuple(int(t) for t in self.b)
        if any(t not in (0, 1) for t in a + b):
            raise ValueError("interaction vectors must be binary")
        m = 0
        for t in a + b:
            m = (m << 1) | t
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "packed", m)

    @property
    def d1(self) -> int:
        return len(self.a)

    @property
    def d2(self) -> int:
        return len(self.b)

    @property
    def kind(self) -> str:
        ua, ub = any(self.a), any(self.b)
        if ua and ub:
            return "cross"
        if ua or ub:
            return "marginal"
        return "trivial"

    @property
    def is_cross(self) -> bool:
        return self.kind == "cross"

    @property
    def label(self) -> str:
        """Factor string such as ``"A1A2B1"``; ``"1"`` for the trivial index."""
        parts = [f"A{k + 1}" for k, t in enumerate(self.a) if t]
        parts += [f"B{k + 1}" for k, t in enumerate(self.b) if t]
        return "".join(parts) or "1"

    def __str__(self):
        return self.label

    @classmethod
    def from_packed(cls, m: int, d1: int, d2: int) -> "InteractionIndex":
        if not 0 <= m < 1 << (d1 + d2):
            raise ValueError(f"packed index {m} out of range for depths ({d1}, {d2})")
        bits = [(m >> (d1 + d2 - 1 - k)) & 1 for k in range(d1 + d2)]
        return cls(tuple(bits[:d1]), tuple(bits[d1:]))

    @classmethod
    def parse(cls, label: str, d1: int, d2: int) -> "InteractionIndex":
        """Inverse of :attr:`label` at the given depths."""
        label = label.strip().replace(" ", "")
        if not re.fullmatch(r"([AB]\d+)+", label):
            raise ValueError(f"cannot parse interaction {label!r}")
        a, b = [0] * d1, [0] * d2
        for var, k in re.findall(r"([AB])(\d+)", label):
            k = int(k)
            vec, depth = (a, d1) if var == "A" else (b, d2)
            if not 1 <= k <= depth:
                raise DepthMismatch(f"{var}{k} exceeds depth {depth}")
            vec[k - 1] = 1
        return cls(tuple(a), tuple(b))


@dataclass(frozen=True)
class ContingencyTable:
    """Cell counts of the ``2**d1 x 2**d2`` table, indexed by packed cell bits."""

    d1: int
    d2: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if counts.size != 1 << (self.d1 + self.d2):
            raise ValueError("counts length does not match depths")
        if np.any(counts < 0):
            raise ValueError("negative cell count")
        counts = counts.copy()
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def grid(self) -> np.ndarray:
        """Counts as a ``(2**d1, 2**d2)`` array indexed ``[u_cell, v_cell]``."""
        return self.counts.reshape(1 << self.d1, 1 << self.d2)


@dataclass(frozen=True)
class SymmetryStats:
    d1: int
    d2: int
    values: np.ndarray
    n: int

    def __getitem__(self, idx: Union[int, InteractionIndex]) -> int:
        if isinstance(idx, InteractionIndex):
            if (idx.d1, idx.d2) != (self.d1, self.d2):
                raise DepthMismatch("interaction depths differ from statistics depths")
            idx = idx.packed
        return int(self.values[idx])

    def marginal_u(self, idx: InteractionIndex) -> int:
        """Statistic of ``A_a`` alone (the ``b = 0`` index)."""
        return int(self.values[idx.packed & ~((1 << self.d2) - 1)])

    def marginal_v(self, idx: InteractionIndex) -> int:
        return int(self.values[idx.packed & ((1 << self.d2) - 1)])


@dataclass(frozen=True)
class IorVector:
    d1: int
    d2: int
    log_values: np.ndarray

    def __getitem__(self, idx: Union[int, InteractionIndex]) -> float:
        if isinstance(idx, InteractionIndex):
            idx = idx.packed
        return float(self.log_values[idx])

    def cross(self) -> np.ndarray:
        ms = [i.packed for i in enumerate_cross(self.d1, self.d2)]
        return self.log_values[ms]


@lru_cache(maxsize=None)
def enumerate_cross(d1: int, d2: int) -> tuple:
    """All ``(2**d1 - 1)(2**d2 - 1)`` cross interactions in ascending packed order."""
    if d1 < 1 or d2 < 1:
        raise ValueError("depths must be at least 1")
    low = (1 << d2) - 1
    return tuple(InteractionIndex.from_packed(m, d1, d2)
                 for m in range(1 << (d1 + d2)) if (m >> d2) and (m & low))


@lru_cache(maxsize=None)
def parity_signs(k: int) -> np.ndarray:
    """``(-1) ** popcount(m)`` for ``m = 0 .. 2**k - 1``."""
    m = np.arange(1 << k, dtype=np.uint64)
    signs = 1 - 2 * (np.bitwise_count(m) & 1).astype(np.int64)
    signs.flags.writeable = False
    return signs


def _check_pair(bits_u: BitMatrix, bits_v: BitMatrix, d1: int, d2: int):
    if bits_u.n != bits_v.n:
        raise DepthMismatch(f"sample sizes differ ({bits_u.n} vs {bits_v.n})")
    if d1 > bits_u.d or d2 > bits_v.d:
        raise DepthMismatch(
            f"requested depths ({d1}, {d2}) exceed expansion depths ({bits_u.d}, {bits_v.d})")


def symmetry_direct(bits_u: BitMatrix, bits_v: BitMatrix, idx: InteractionIndex) -> int:
    """Symmetry statistic of one interaction straight from the packed bits.

    The selected digit columns are XOR-folded word by word; the popcount of
    the fold counts observations with odd parity, each contributing ``-1``
    before the overall ``(-1) ** popcount(m)`` sign.
    """
    _check_pair(bits_u, bits_v, idx.d1, idx.d2)
    acc = np.zeros(bits_u.words.shape[1], dtype=np.uint64)
    for k, t in enumerate(idx.a):
        if t:
            acc ^= bits_u.words[k]
    for k, t in enumerate(idx.b):
        if t:
            acc ^= bits_v.words[k]
    ones = int(np.bitwise_count(acc).sum())
    sign = -1 if (sum(idx.a) + sum(idx.b)) & 1 else 1
    return sign * (bits_u.n - 2 * ones)


def contingency(bits_u: BitMatrix, bits_v: BitMatrix, d1: int, d2: int) -> ContingencyTable:
    _check_pair(bits_u, bits_v, d1, d2)
    cells = (bits_u.cell_indices(d1) << d2) | bits_v.cell_indices(d2)
    return ContingencyTable(d1, d2, np.bincount(cells, minlength=1 << (d1 + d2)))


def fwht(vec) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform in Sylvester (natural) order.

    ``out[m] = sum_x (-1) ** popcount(m & x) * vec[x]``. Integer input stays
    integer (int64); anything else is computed in float64.
    """
    arr = np.asarray(vec)
    size = arr.size
    if arr.ndim != 1 or size == 0 or size & (size - 1):
        raise LengthNotPowerOfTwo(f"length {size} is not a power of two")
    dtype = np.int64 if np.issubdtype(arr.dtype, np.integer) or arr.dtype == bool else np.float64
    out = arr.astype(dtype, copy=True)
    h = 1
    while h < size:
        blocks = out.reshape(-1, 2, h)
        lo = blocks[:, 0, :].copy()
        hi = blocks[:, 1, :]
        blocks[:, 0, :] += hi
        lo -= hi
        blocks[:, 1, :] = lo
        h <<= 1
    return out


def sylvester_hadamard(k: int) -> np.ndarray:
    """``H_{2**k}`` built by the Kronecker recursion ``H_{2n} = H_n (x) H_2``."""
    h2 = np.array([[1, 1], [1, -1]], dtype=np.int64)
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        h = np.kron(h, h2)
    return h


def symmetry_from_table(t: ContingencyTable) -> SymmetryStats:
    """All ``2**(d1+d2)`` symmetry statistics from cell counts (``S = H N``)."""
    k = t.d1 + t.d2
    values = parity_signs(k) * fwht(t.counts)
    values.flags.writeable = False
    return SymmetryStats(t.d1, t.d2, values, t.n)


def symmetry_all_direct(bits_u: BitMatrix, bits_v: BitMatrix, d1: int, d2: int) -> SymmetryStats:
    """Every statistic via :func:`symmetry_direct`; slow, used as a cross-check."""
    values = np.array([symmetry_direct(bits_u, bits_v, InteractionIndex.from_packed(m, d1, d2))
                       for m in range(1 << (d1 + d2))], dtype=np.int64)
    return SymmetryStats(d1, d2, values, bits_u.n)


def _check_probabilities(p, d1: int, d2: int) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size != 1 << (d1 + d2):
        raise LengthNotPowerOfTwo(f"expected {1 << (d1 + d2)} cell probabilities, got {p.size}")
    if np.any(~(p > 0)):
        raise NonPositiveProbability("cell probabilities must be strictly positive")
    if abs(p.sum() - 1.0) > 1e-12:
        raise NonPositiveProbability(f"cell probabilities sum to {p.sum()!r}, not 1")
    return p


def interaction_means(p, d1: int, d2: int) -> np.ndarray:
    """Population BID: ``E[A_a B_b]`` for every packed index (``E = H p``)."""
    p = _check_probabilities(p, d1, d2)
    return parity_signs(d1 + d2) * fwht(p)


def iors(p, d1: int, d2: int) -> IorVector:
    """Log interaction odds ratios ``lambda_l = H log p`` (sign-corrected).

    Marginal entries are log-MIORs, cross entries log-CIORs; all cross
    entries vanish exactly when the table has independent margins.
    """
    p = _check_probabilities(p, d1, d2)
    values = parity_signs(d1 + d2) * fwht(np.log(p))
    values.flags.writeable = False
    return IorVector(d1, d2, values)
