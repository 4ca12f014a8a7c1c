"""Dense linear algebra over GF(2).

Vectors and matrices are immutable wrappers around ``uint8`` numpy arrays
holding 0/1 entries. Their text form is the unseparated 0/1 string
(``"1011"``) for vectors and newline-separated rows for matrices.
"""
from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from confqkd import kernels
from confqkd.errors import DimensionError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_bits(data, ndim: int) -> np.ndarray:
    arr = np.array(data, dtype=np.int64, copy=True)
    if arr.size == 0 and arr.ndim != ndim:
        arr = arr.reshape((0,) * ndim)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d bit array, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("entries must be 0 or 1")
    return arr.astype(np.uint8)


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of 0/1 arrays reduced mod 2 (float BLAS, exact below 2**24 terms)."""
    prod = np.matmul(a.astype(np.float32), b.astype(np.float32))
    return (prod.astype(np.int64) & 1).astype(np.uint8)


class BitVector:
    """An immutable vector over GF(2)."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] | np.ndarray | str = ()):
        if isinstance(bits, str):
            bits = [int(ch) for ch in bits] if bits else []
        self._bits = _frozen(_as_bits(list(bits) if not isinstance(bits, np.ndarray) else bits, 1))

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BitVector":
        obj = cls.__new__(cls)
        obj._bits = _frozen(np.ascontiguousarray(arr, dtype=np.uint8))
        return obj

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls._wrap(np.zeros(n, dtype=np.uint8))

    @classmethod
    def unit(cls, n: int, i: int) -> "BitVector":
        arr = np.zeros(n, dtype=np.uint8)
        arr[i] = 1
        return cls._wrap(arr)

    @classmethod
    def from_str(cls, text: str) -> "BitVector":
        text = text.strip()
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        return cls._wrap(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitVector":
        """Bit ``i`` is taken from position ``n - 1 - i`` of ``value`` (MSB first)."""
        if value < 0 or value >> n:
            raise ValueError(f"{value} does not fit in {n} bits")
        shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        return cls._wrap(((value >> shifts) & 1) if n else np.zeros(0))

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def len(self) -> int:
        return self._bits.shape[0]

    def __len__(self) -> int:
        return self._bits.shape[0]

    def __iter__(self) -> Iterator[int]:
        return iter(int(b) for b in self._bits)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return int(self._bits[idx])
        return BitVector._wrap(self._bits[idx])

    def __add__(self, other: "BitVector") -> "BitVector":
        return add(self, other)

    __sub__ = __add__

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._bits.shape == other._bits.shape and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.len, self._bits.tobytes()))

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode()

    def __repr__(self) -> str:
        return f"BitVector('{self}')"

    def weight(self) -> int:
        return int(self._bits.sum())

    def is_zero(self) -> bool:
        return not self._bits.any()

    def to_int(self) -> int:
        return int(str(self), 2) if self.len else 0

    def concat(self, other: "BitVector") -> "BitVector":
        return BitVector._wrap(np.concatenate([self._bits, other._bits]))

    def to_hex(self) -> str:
        """Hex digits of the bits, MSB first, zero-padded on the right to a nibble."""
        pad = (-self.len) % 4
        text = str(self) + "0" * pad
        return "".join(f"{int(text[i:i + 4], 2):x}" for i in range(0, len(text), 4))


class BitMatrix:
    """An immutable row-major matrix over GF(2)."""

    __slots__ = ("_entries",)

    def __init__(self, entries=None, cols: int | None = None):
        if entries is None or (not isinstance(entries, np.ndarray) and len(entries) == 0):
            arr = np.zeros((0, cols or 0), dtype=np.uint8)
        elif isinstance(entries, np.ndarray):
            arr = _as_bits(entries, 2)
        else:
            rows = [r.bits if isinstance(r, BitVector) else BitVector(r).bits for r in entries]
            widths = {len(r) for r in rows}
            if len(widths) != 1:
                raise DimensionError("rows have different lengths")
            arr = np.vstack(rows).astype(np.uint8)
        if cols is not None and arr.shape[1] != cols:
            raise DimensionError(f"expected {cols} columns, got {arr.shape[1]}")
        self._entries = _frozen(np.ascontiguousarray(arr))

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BitMatrix":
        obj = cls.__new__(cls)
        obj._entries = _frozen(np.ascontiguousarray(arr, dtype=np.uint8))
        return obj

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls._wrap(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_str(cls, text: str, cols: int | None = None) -> "BitMatrix":
        rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
        if not rows:
            return cls.zeros(0, cols or 0)
        return cls([BitVector.from_str(r) for r in rows], cols=cols)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._entries.shape

    def row(self, i: int) -> BitVector:
        return BitVector._wrap(self._entries[i])

    def row_list(self) -> list[BitVector]:
        return [self.row(i) for i in range(self.rows)]

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix._wrap(self._entries.T)

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return mat_vec(self, other)
        if isinstance(other, BitMatrix):
            if self.cols != other.rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            return BitMatrix._wrap(gf2_matmul(self._entries, other._entries))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._entries, other._entries))

    def __hash__(self) -> int:
        return hash((self.shape, self._entries.tobytes()))

    def __str__(self) -> str:
        return "\n".join(str(self.row(i)) for i in range(self.rows))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"

    def is_zero(self) -> bool:
        return not self._entries.any()


class RowReduction(NamedTuple):
    matrix: BitMatrix
    rank: int
    pivots: tuple[int, ...]


def _check_len(u: BitVector, v: BitVector) -> None:
    if u.len != v.len:
        raise DimensionError(f"length mismatch: {u.len} != {v.len}")


def add(u: BitVector, v: BitVector) -> BitVector:
    _check_len(u, v)
    return BitVector._wrap(u.bits ^ v.bits)


def inner_product(u: BitVector, v: BitVector) -> int:
    _check_len(u, v)
    return int(np.bitwise_and(u.bits, v.bits).sum() & 1)


def mat_vec(m: BitMatrix, v: BitVector) -> BitVector:
    if m.cols != v.len:
        raise DimensionError(f"matrix has {m.cols} columns, vector has length {v.len}")
    if m.rows == 0:
        return BitVector.zeros(0)
    return BitVector._wrap(gf2_matmul(m.entries, v.bits))


def row_reduce(m: BitMatrix, pivot_cols: int | None = None) -> RowReduction:
    """Gauss-Jordan elimination to reduced row-echelon form.

    Zero rows are kept at the bottom so the shape is unchanged. With
    ``pivot_cols`` only the leading columns are eligible for pivots,
    which is how augmented systems ``[A | B]`` are reduced.
    """
    limit = m.cols if pivot_cols is None else pivot_cols
    if m.rows == 0 or m.cols == 0:
        return RowReduction(m, 0, ())
    reduced, pivots = kernels.rref(m.entries, limit)
    return RowReduction(BitMatrix._wrap(reduced), len(pivots), tuple(pivots))


def rank(m: BitMatrix) -> int:
    return row_reduce(m).rank


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """Basis of the null space ``{v : m v = 0}``, one vector per free column."""
    red = row_reduce(m)
    pivots = red.pivots
    free = [c for c in range(m.cols) if c not in set(pivots)]
    R = red.matrix.entries
    basis = []
    for f in free:
        v = np.zeros(m.cols, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = R[i, f]
        basis.append(BitVector._wrap(v))
    return basis


def double(c: BitVector) -> BitVector:
    return c.concat(c)


def fold(e: BitVector) -> BitVector:
    """Sum of the two halves of an even-length vector."""
    if e.len % 2:
        raise DimensionError(f"fold needs an even length, got {e.len}")
    n = e.len // 2
    return BitVector._wrap(e.bits[:n] ^ e.bits[n:])


def stack(rows: Sequence[BitVector], cols: int) -> BitMatrix:
    if not rows:
        return BitMatrix.zeros(0, cols)
    return BitMatrix(list(rows), cols=cols)


def span(m: BitMatrix) -> list[BitVector]:
    """All 2**rank vectors of the row space, enumerated by coefficient integer."""
    basis = row_reduce(m)
    rows = basis.matrix.entries[: basis.rank]
    k = basis.rank
    if k == 0:
        return [BitVector.zeros(m.cols)]
    coeffs = ((np.arange(1 << k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    words = gf2_matmul(coeffs, rows)
    return [BitVector._wrap(w) for w in words]


def in_span(m: BitMatrix, v: BitVector) -> bool:
    if m.rows == 0:
        return v.is_zero()
    return rank(BitMatrix._wrap(np.vstack([m.entries, v.bits]))) == rank(m)


def all_vectors(n: int) -> list[BitVector]:
    """Every vector of length ``n`` in increasing integer order."""
    return [BitVector.from_int(i, n) for i in range(1 << n)]


def all_subspaces(n: int) -> list[BitMatrix]:
    """Every subspace of GF(2)^n, each as its unique RREF basis matrix."""
    from itertools import combinations, product

    out = []
    for k in range(n + 1):
        for pivots in combinations(range(n), k):
            slots = [(i, c) for i, p in enumerate(pivots) for c in range(p + 1, n) if c not in pivots]
            for fill in product((0, 1), repeat=len(slots)):
                arr = np.zeros((k, n), dtype=np.uint8)
                for i, p in enumerate(pivots):
                    arr[i, p] = 1
                for (i, c), bit in zip(slots, fill):
                    arr[i, c] = bit
                out.append(BitMatrix._wrap(arr))
    return out


class SpanSolver:
    """Coordinates of vectors with respect to a fixed list of independent rows.

    ``coordinates(v)`` returns ``y`` with ``y @ basis == v`` or ``None`` when
    ``v`` is outside the row space.
    """

    def __init__(self, basis: BitMatrix):
        k, n = basis.shape
        self.basis = basis
        aug = np.hstack([basis.entries, np.eye(k, dtype=np.uint8)])
        red = row_reduce(BitMatrix._wrap(aug), pivot_cols=n)
        if red.rank != k:
            raise DimensionError("basis rows are linearly dependent")
        self._reduced = red.matrix.entries[:, :n]
        self._transform = red.matrix.entries[:, n:]
        self._pivots = np.array(red.pivots, dtype=np.int64)

    def coordinates(self, v: BitVector) -> BitVector | None:
        if v.len != self.basis.cols:
            raise DimensionError(f"length mismatch: {v.len} != {self.basis.cols}")
        if self.basis.rows == 0:
            return BitVector.zeros(0) if v.is_zero() else None
        y = v.bits[self._pivots]
        if not np.array_equal(gf2_matmul(y, self._reduced), v.bits):
            return None
        return BitVector._wrap(gf2_matmul(y, self._transform))


class PreimageSolver:
    """Canonical solution ``x`` of ``H x = s`` for a full-row-rank ``H``.

    ``x`` is supported on the pivot columns of the reduced form of ``H``,
    so equal syndromes always give the same representative.
    """

    def __init__(self, h: BitMatrix):
        r, n = h.shape
        self.h = h
        aug = np.hstack([h.entries, np.eye(r, dtype=np.uint8)])
        red = row_reduce(BitMatrix._wrap(aug), pivot_cols=n)
        if red.rank != r:
            raise DimensionError("parity-check rows are linearly dependent")
        self._transform = red.matrix.entries[:, n:]
        self._pivots = np.array(red.pivots, dtype=np.int64)

    def solve(self, s: BitVector) -> BitVector:
        if s.len != self.h.rows:
            raise DimensionError(f"syndrome length {s.len} != {self.h.rows}")
        x = np.zeros(self.h.cols, dtype=np.uint8)
        if self.h.rows:
            x[self._pivots] = gf2_matmul(self._transform, s.bits)
        return BitVector._wrap(x)
