"""Copula transforms and truncated binary expansions.

Observations are mapped to copula values in (0, 1] and then to their first
``d`` binary digits. Digits are stored column-wise, one packed bit column per
digit, so that interaction statistics reduce to XOR and popcount over whole
machine words.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InputFormatError, RangeError, TiesPresent

WORD_BITS = 64
MAX_DEPTH = 30

EMPIRICAL = "empirical-rank"
KNOWN_CDF = "known-cdf"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SampleSet:
    """Paired raw observations ``(x_i, y_i)``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise InputFormatError(
                f"x and y differ in length ({x.size} vs {y.size})")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputFormatError("non-finite value in sample")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class CopulaSet:
    """Copula values ``u, v`` in (0, 1].

    For empirical-rank provenance the integer ranks are kept alongside so that
    binary expansion can be done in exact integer arithmetic.
    """

    u: np.ndarray
    v: np.ndarray
    provenance: str
    ranks_u: Optional[np.ndarray] = None
    ranks_v: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("u", "v"):
            arr = np.asarray(getattr(self, name), dtype=float).ravel()
            if arr.size and not (np.all(arr > 0.0) and np.all(arr <= 1.0)):
                raise RangeError(f"{name} values must lie in (0, 1]")
            object.__setattr__(self, name, _frozen(arr))
        if self.u.shape != self.v.shape:
            raise InputFormatError("u and v differ in length")
        if self.provenance not in (EMPIRICAL, KNOWN_CDF):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        for name in ("ranks_u", "ranks_v"):
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, _frozen(np.asarray(arr, dtype=np.int64)))

    @property
    def n(self) -> int:
        return int(self.u.size)


@dataclass(frozen=True)
class BitMatrix:
    """First ``d`` binary digits of ``n`` copula values, packed column-wise.

    ``words[k]`` holds digit ``k + 1`` (most significant first); observation
    ``i`` sits at bit ``i % 64`` of word ``i // 64``. Bits past ``n`` are zero.
    """

    d: int
    n: int
    words: np.ndarray = field(repr=False)

    def __post_init__(self):
        words = np.asarray(self.words, dtype=np.uint64)
        if words.shape != (self.d, n_words(self.n)):
            raise ValueError(
                f"word array has shape {words.shape}, expected {(self.d, n_words(self.n))}")
        object.__setattr__(self, "words", _frozen(words))

    def column(self, k: int) -> np.ndarray:
        """Unpacked 0/1 column for digit ``k`` (1-based)."""
        return unpack_bits(self.words[k - 1], self.n)

    def cell_indices(self, depth: Optional[int] = None) -> np.ndarray:
        """Cell index ``m_i`` formed by the first ``depth`` digits."""
        depth = self.d if depth is None else depth
        if not 1 <= depth <= self.d:
            raise ValueError(f"depth {depth} outside 1..{self.d}")
        cells = np.zeros(self.n, dtype=np.int64)
        for k in range(1, depth + 1):
            cells = (cells << 1) | self.column(k)
        return cells

    @classmethod
    def from_cells(cls, cells, d: int) -> "BitMatrix":
        cells = np.asarray(cells, dtype=np.int64)
        n = cells.size
        words = np.empty((d, n_words(n)), dtype=np.uint64)
        for k in range(d):
            words[k] = pack_bits((cells >> (d - 1 - k)) & 1)
        return cls(d=d, n=n, words=words)


def n_words(n: int) -> int:
    return -(-n // WORD_BITS)


def pack_bits(bits) -> np.ndarray:
    """Pack a 0/1 sequence into little-endian ``uint64`` words."""
    bits = np.asarray(bits, dtype=bool).ravel()
    packed = np.packbits(bits, bitorder="little")
    pad = n_words(bits.size) * 8 - packed.size
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8").astype(np.uint64)


def unpack_bits(words, n: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    bits = np.unpackbits(words.view(np.uint8), bitorder="little", count=n)
    return bits.astype(np.int64)


def _ranks(values: np.ndarray, ties: str, rng) -> np.ndarray:
    if ties == "random":
        order = np.lexsort((rng.random(values.size), values))
    else:
        order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    return ranks


def has_ties(values) -> bool:
    values = np.sort(np.asarray(values))
    return bool(np.any(values[1:] == values[:-1]))


def empirical_copula(s: SampleSet, ties: str = "error", seed=None) -> CopulaSet:
    """Rank-transform a sample to ``u_i = rank(x_i) / n``.

    Parameters
    ----------
    s : SampleSet
    ties : {"error", "random"}
        ``"error"`` raises :class:`TiesPresent` on duplicate values;
        ``"random"`` breaks ties uniformly at random using ``seed``.
    seed : int or numpy Generator, optional
    """
    if s.n < 1:
        raise InputFormatError("empirical copula needs at least one observation")
    if ties not in ("error", "random"):
        raise ValueError(f"unknown tie policy {ties!r}")
    if ties == "error":
        for name, arr in (("x", s.x), ("y", s.y)):
            if has_ties(arr):
                raise TiesPresent(f"duplicate values in {name}")
    rng = np.random.default_rng(seed)
    ru = _ranks(s.x, ties, rng)
    rv = _ranks(s.y, ties, rng)
    return CopulaSet(u=ru / s.n, v=rv / s.n, provenance=EMPIRICAL,
                     ranks_u=ru, ranks_v=rv)


def known_cdf_copula(s: SampleSet, F: Callable, G: Callable) -> CopulaSet:
    """Transform with caller-supplied marginal CDFs ``F`` and ``G``."""
    u = np.asarray(F(s.x), dtype=float)
    v = np.asarray(G(s.y), dtype=float)
    for name, arr in (("F(x)", u), ("G(y)", v)):
        bad = ~((arr > 0.0) & (arr <= 1.0))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise RangeError(f"{name} outside (0, 1] at observation {i}: {arr[i]!r}")
    return CopulaSet(u=u, v=v, provenance=KNOWN_CDF)


def uniform_cdf(x):
    """Identity CDF of Uniform[0, 1]."""
    return np.asarray(x, dtype=float)


def cell_index(u, d: int) -> np.ndarray:
    """``ceil(u * 2**d) - 1`` clamped to ``[0, 2**d - 1]``."""
    u = np.asarray(u, dtype=float)
    m = np.ceil(np.ldexp(u, d)).astype(np.int64) - 1
    return np.clip(m, 0, (1 << d) - 1)


def rank_cell_index(ranks, n: int, d: int) -> np.ndarray:
    """Exact integer form of :func:`cell_index` for ``u = rank / n``."""
    ranks = np.asarray(ranks, dtype=np.int64)
    return (ranks * (1 << d) + n - 1) // n - 1


def binary_expand(c: CopulaSet, d: int) -> tuple[BitMatrix, BitMatrix]:
    """Truncated binary expansions of both margins at depth ``d``."""
    if not 1 <= d <= MAX_DEPTH:
        raise ValueError(f"depth must be in 1..{MAX_DEPTH}, got {d}")
    if c.ranks_u is not None and c.ranks_v is not None:
        cu = rank_cell_index(c.ranks_u, c.n, d)
        cv = rank_cell_index(c.ranks_v, c.n, d)
    else:
        cu = cell_index(c.u, d)
        cv = cell_index(c.v, d)
    return BitMatrix.from_cells(cu, d), BitMatrix.from_cells(cv, d)


def expand_variable(values, d: int, ties: str = "error", seed=None) -> BitMatrix:
    """Rank-transform one variable and expand it to depth ``d``."""
    values = np.asarray(values, dtype=float).ravel()
    if ties == "error" and has_ties(values):
        raise TiesPresent("duplicate values")
    ranks = _ranks(values, ties, np.random.default_rng(seed))
    return BitMatrix.from_cells(rank_cell_index(ranks, values.size, d), d)


def expansion_value(bits: BitMatrix) -> np.ndarray:
    """``sum_k A_k 2**-k`` for each observation."""
    return np.ldexp(bits.cell_indices().astype(float), -bits.d)


def _parse_float(text: str, line: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputFormatError(f"column {column}: not a number: {text!r}", line) from None
    if not math.isfinite(value):
        raise InputFormatError(f"column {column}: non-finite value {text!r}", line)
    return value


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with an optional header row.

    Returns column names (generated as ``var1, var2, ...`` when there is no
    header) and an ``(n_rows, n_cols)`` float array.
    """
    names = None
    rows = []
    with open(path, newline="") as fh:
        for line_no, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not f.strip() for f in record):
                continue
            fields = [f.strip() for f in record]
            if names is None and not rows:
                try:
                    [float(f) for f in fields]
                except ValueError:
                    names = fields
                    continue
            width = len(names) if names is not None else (len(rows[0]) if rows else len(fields))
            if len(fields) != width:
                raise InputFormatError(
                    f"expected {width} fields, found {len(fields)}", line_no)
            rows.append([_parse_float(f, line_no, j + 1) for j, f in enumerate(fields)])
    if not rows:
        raise InputFormatError("no data rows")
    data = np.array(rows, dtype=float)
    if names is None:
        names = [f"var{j + 1}" for j in range(data.shape[1])]
    return names, data


def read_sample_csv(path) -> SampleSet:
    """Read two numeric columns ``x, y`` (header optional)."""
    _, data = read_table(path)
    if data.shape[1] != 2:
        raise InputFormatError(f"expected 2 columns, found {data.shape[1]}")
    return SampleSet(data[:, 0], data[:, 1])


def write_sample_csv(s: SampleSet, dest) -> None:
    """Write ``x, y`` with a header; ``dest`` is a path or a text file object."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            write_sample_csv(s, fh)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["x", "y"])
    for xi, yi in zip(s.x.tolist(), s.y.tolist()):
        w.writerow([repr(xi), repr(yi)])
