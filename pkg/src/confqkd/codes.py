"""Binary linear codes, syndrome decoding, subcodes and coset keys.

A code of block length ``n`` used for reconciliation is usually a direct
sum of copies of one short library code (plus a few fully disclosed
positions when ``n`` is not a multiple of the short length). Each short
block is decoded with a precomputed minimum-weight coset-leader table.
"""
from __future__ import annotations

import math
import re
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from confqkd import kernels
from confqkd.errors import (
    CapacityError,
    CodeSelectionError,
    DimensionError,
    DomainError,
    ReconciliationError,
)
from confqkd.gf2 import (
    BitMatrix,
    BitVector,
    PreimageSolver,
    SpanSolver,
    gf2_matmul,
    kernel_basis,
    row_reduce,
    span,
    stack,
)

MAX_TABLE_REDUNDANCY = 24
MAX_TABLE_LENGTH = 62


class LinearCode:
    """A binary linear code given by a generator or a parity-check matrix.

    Whichever matrix is not supplied is derived as the null space of the
    other. ``blocks`` records a direct-sum structure ``((code, copies), ...)``
    so decoding can proceed block by block.
    """

    def __init__(
        self,
        generator: BitMatrix | None = None,
        parity_check: BitMatrix | None = None,
        name: str = "",
        blocks: tuple[tuple["LinearCode", int], ...] = (),
    ):
        if generator is None and parity_check is None:
            raise ValueError("need a generator or a parity-check matrix")
        if generator is not None:
            generator = _independent_rows(generator)
            self._n = generator.cols
            self.__dict__["generator"] = generator
        if parity_check is not None:
            parity_check = _independent_rows(parity_check)
            if generator is not None and parity_check.cols != generator.cols:
                raise DimensionError("generator and parity check lengths differ")
            self._n = parity_check.cols
            self.__dict__["parity_check"] = parity_check
        self.name = name
        self.blocks = blocks

    @cached_property
    def generator(self) -> BitMatrix:
        return stack(kernel_basis(self.parity_check), self._n)

    @cached_property
    def parity_check(self) -> BitMatrix:
        return stack(kernel_basis(self.generator), self._n)

    @property
    def n(self) -> int:
        return self._n

    @property
    def k(self) -> int:
        if "generator" in self.__dict__:
            return self.generator.rows
        return self._n - self.parity_check.rows

    @property
    def rate(self) -> float:
        return self.k / self.n if self.n else 0.0

    @cached_property
    def decode_table(self) -> "DecodeTable":
        return DecodeTable.build(self)

    def contains(self, word: BitVector) -> bool:
        return syndrome(self, word).is_zero()

    def codewords(self) -> list[BitVector]:
        if self.k > 20:
            raise CapacityError(f"refusing to enumerate 2**{self.k} codewords")
        return span(self.generator)

    def minimum_distance(self) -> int:
        return min((w.weight() for w in self.codewords() if not w.is_zero()), default=self.n + 1)

    def __repr__(self) -> str:
        return f"LinearCode({self.name or '?'}, n={self.n}, k={self.k})"


def _independent_rows(m: BitMatrix) -> BitMatrix:
    red = row_reduce(m)
    if red.rank == m.rows:
        return m
    return BitMatrix(red.matrix.entries[: red.rank], cols=m.cols)


class DecodeTable:
    """Minimum-weight coset leader for every syndrome of a short code.

    Syndromes and leaders are indexed as integers with the first row or
    position as the most significant bit. Among leaders of equal weight the
    lexicographically smallest 0/1 string is kept.
    """

    def __init__(self, code: LinearCode, leaders: np.ndarray):
        self.code = code
        self.leaders = leaders
        n = code.n
        self._shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        r = code.n - code.k
        self._syn_weights = (1 << np.arange(r - 1, -1, -1, dtype=np.int64)).astype(np.int64)

    @classmethod
    def build(cls, code: LinearCode) -> "DecodeTable":
        h = code.parity_check
        r, n = h.shape
        if r == 0:
            return cls(code, np.zeros(1, dtype=np.int64))
        if r > MAX_TABLE_REDUNDANCY or n > MAX_TABLE_LENGTH:
            raise CapacityError(f"coset-leader table infeasible for n={n}, n-k={r}")
        colsyn = (h.entries.astype(np.int64) << np.arange(r - 1, -1, -1)[:, None]).sum(axis=0)
        leaders = kernels.coset_leaders(np.ascontiguousarray(colsyn, dtype=np.int64), r)
        if (leaders < 0).any():
            raise ValueError("parity-check matrix does not reach every syndrome")
        return cls(code, np.asarray(leaders, dtype=np.int64))

    def syndrome_index(self, syndromes: np.ndarray) -> np.ndarray:
        """Integer index of each row of a (..., n-k) syndrome array."""
        return (syndromes.astype(np.int64) * self._syn_weights).sum(axis=-1)

    def leader_bits(self, index: np.ndarray) -> np.ndarray:
        index = np.asarray(index)
        if self.code.k == self.code.n:
            return np.zeros(index.shape + (self.code.n,), dtype=np.uint8)
        words = self.leaders[index]
        return ((words[..., None] >> self._shifts) & 1).astype(np.uint8)

    def leader_of(self, s: BitVector) -> BitVector:
        if s.len != self.code.n - self.code.k:
            raise DimensionError(f"syndrome length {s.len} != {self.code.n - self.code.k}")
        return BitVector(self.leader_bits(np.array(self.syndrome_index(s.bits))))

    def weights(self) -> np.ndarray:
        return np.array([bin(int(w)).count("1") for w in self.leaders])


def direct_sum(parts: Sequence[tuple[LinearCode, int]], name: str | None = None) -> LinearCode:
    """Block-diagonal code made of ``copies`` of each component, in order."""
    parts = tuple((c, m) for c, m in parts if m > 0)
    n = sum(c.n * m for c, m in parts)
    k = sum(c.k * m for c, m in parts)
    G = np.zeros((k, n), dtype=np.uint8)
    H = np.zeros((n - k, n), dtype=np.uint8)
    col = grow = hrow = 0
    for code, copies in parts:
        g, h = code.generator.entries, code.parity_check.entries
        for _ in range(copies):
            G[grow:grow + code.k, col:col + code.n] = g
            H[hrow:hrow + h.shape[0], col:col + code.n] = h
            col += code.n
            grow += code.k
            hrow += h.shape[0]
    if name is None:
        name = "+".join(f"{c.name}*{m}" for c, m in parts)
    return LinearCode(BitMatrix(G), BitMatrix(H), name=name, blocks=parts)


def _blocks(code: LinearCode) -> tuple[tuple[LinearCode, int], ...]:
    return code.blocks or ((code, 1),)


# --- registry ---------------------------------------------------------------

# candidates considered by select_code, in tie-break order
LIBRARY = (
    "trivial_1",
    "extended_hamming_8_4",
    "hamming_7_4",
    "golay_23_12",
    "extended_golay_24_12",
    "random_16_10_1",
    "random_20_12_2",
    "random_24_14_3",
    "repetition_3_1",
    "repetition_5_1",
    "repetition_7_1",
)

_GOLAY_POLY = (1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1)  # 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11


def _hamming_parity_check(r: int) -> BitMatrix:
    n = (1 << r) - 1
    cols = np.arange(1, n + 1)
    return BitMatrix(((cols[None, :] >> np.arange(r - 1, -1, -1)[:, None]) & 1).astype(np.uint8))


def _extend_with_parity(g: BitMatrix) -> BitMatrix:
    parity = g.entries.sum(axis=1, keepdims=True) & 1
    return BitMatrix(np.hstack([g.entries, parity.astype(np.uint8)]))


def _cyclic_generator(poly: Sequence[int], n: int) -> BitMatrix:
    k = n - (len(poly) - 1)
    G = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        G[i, i:i + len(poly)] = poly
    return BitMatrix(G)


def _random_systematic(n: int, k: int, seed: int) -> LinearCode:
    rng = np.random.default_rng(seed)
    P = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    G = np.hstack([np.eye(k, dtype=np.uint8), P])
    H = np.hstack([P.T, np.eye(n - k, dtype=np.uint8)])
    return LinearCode(BitMatrix(G), BitMatrix(H), name=f"random_{n}_{k}_{seed}")


@lru_cache(maxsize=None)
def get_code(name: str) -> LinearCode:
    """Look up a code by registry name.

    Accepted names: ``trivial_N``, ``disclose_N`` (dimension 0),
    ``repetition_N_1``, ``hamming_7_4``, ``extended_hamming_8_4``,
    ``golay_23_12``, ``extended_golay_24_12``, ``random_N_K_SEED`` and
    direct sums written ``name*copies+name*copies``.
    """
    if "+" in name or "*" in name:
        parts = []
        for part in name.split("+"):
            base, _, copies = part.partition("*")
            parts.append((get_code(base), int(copies) if copies else 1))
        return direct_sum(parts, name=name)

    if m := re.fullmatch(r"trivial_(\d+)", name):
        n = int(m[1])
        return LinearCode(BitMatrix.identity(n), BitMatrix.zeros(0, n), name=name)
    if m := re.fullmatch(r"disclose_(\d+)", name):
        n = int(m[1])
        return LinearCode(BitMatrix.zeros(0, n), BitMatrix.identity(n), name=name)
    if m := re.fullmatch(r"repetition_(\d+)_1", name):
        n = int(m[1])
        return LinearCode(BitMatrix(np.ones((1, n), dtype=np.uint8)), name=name)
    if name == "hamming_7_4":
        return LinearCode(parity_check=_hamming_parity_check(3), name=name)
    if name == "extended_hamming_8_4":
        g = get_code("hamming_7_4").generator
        return LinearCode(_extend_with_parity(g), name=name)
    if name == "golay_23_12":
        return LinearCode(_cyclic_generator(_GOLAY_POLY, 23), name=name)
    if name == "extended_golay_24_12":
        return LinearCode(_extend_with_parity(get_code("golay_23_12").generator), name=name)
    if m := re.fullmatch(r"random_(\d+)_(\d+)_(\d+)", name):
        n, k, seed = map(int, m.groups())
        if not 0 <= k <= n:
            raise ValueError(f"bad dimensions in {name!r}")
        return _random_systematic(n, k, seed)
    raise KeyError(f"unknown code {name!r}")


def code_to_text(code: LinearCode) -> str:
    """Generator-matrix text block: a ``# name n k`` header then one row per line."""
    body = str(code.generator)
    return f"# {code.name or 'code'} {code.n} {code.k}\n{body}\n" if body else f"# {code.name or 'code'} {code.n} 0\n"


def code_from_text(text: str) -> LinearCode:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing '# name n k' header")
    _, name, n, _k = lines[0].split()
    return LinearCode(BitMatrix.from_str("\n".join(lines[1:]), cols=int(n)), name=name)


# --- decoding -------------------------------------------------------------------


def syndrome(code: LinearCode, word: BitVector) -> BitVector:
    if word.len != code.n:
        raise DimensionError(f"word length {word.len} != code length {code.n}")
    return code.parity_check @ word


def decode_to_coset(code: LinearCode, target: BitVector) -> BitVector:
    """Minimum-weight vector whose syndrome equals ``target``."""
    r = code.n - code.k
    if target.len != r:
        raise DimensionError(f"syndrome length {target.len} != {r}")
    out = []
    soff = 0
    for block, copies in _blocks(code):
        br = block.n - block.k
        seg = target.bits[soff:soff + br * copies].reshape(copies, br)
        soff += br * copies
        table = block.decode_table
        out.append(table.leader_bits(table.syndrome_index(seg)).reshape(-1))
    return BitVector(np.concatenate(out)) if out else BitVector.zeros(0)


def reconcile(own_bits: BitVector, alice_syndrome: BitVector, code: LinearCode) -> BitVector:
    """Correct ``own_bits`` toward the word whose syndrome Alice announced."""
    diff = syndrome(code, own_bits) + alice_syndrome
    return own_bits + decode_to_coset(code, diff)


def estimate_failure(code: LinearCode, q: float, trials: int, rng: np.random.Generator) -> float:
    """Monte-Carlo word failure rate of table decoding over BSC(q)."""
    errors = (rng.random((trials, code.n)) < q).astype(np.uint8)
    failed = np.zeros(trials, dtype=bool)
    col = 0
    for block, copies in _blocks(code):
        width = block.n * copies
        E = errors[:, col:col + width].reshape(trials * copies, block.n)
        col += width
        if block.n == block.k:
            bad = E.any(axis=1)
        else:
            table = block.decode_table
            syn = gf2_matmul(E, block.parity_check.entries.T)
            bad = (table.leader_bits(table.syndrome_index(syn)) != E).any(axis=1)
        failed |= bad.reshape(trials, copies).any(axis=1)
    return float(failed.mean())


def block_code(component: str, n: int) -> LinearCode:
    """Length-``n`` direct sum of ``component`` copies padded with disclosed bits."""
    comp = get_code(component)
    if comp.name.startswith("trivial_") and comp.n == 1:
        return get_code(f"trivial_{n}")
    copies, rest = divmod(n, comp.n)
    parts = [(comp, copies)]
    if rest:
        parts.append((get_code("disclose_1"), rest))
    return direct_sum(parts)


def select_code(
    q1: float,
    n: int,
    target_failure: float,
    rng: np.random.Generator,
    candidates: Sequence[str] = LIBRARY,
) -> LinearCode:
    """Highest-rate length-``n`` block code meeting the failure target on BSC(q1).

    Candidates are tried from highest to lowest rate; each one's word
    failure rate is measured with ``ceil(10 / target_failure)`` decoding
    trials and the first at or below the target is returned.
    """
    if not 0.0 <= q1 < 0.5:
        raise DomainError(f"q1 must lie in [0, 0.5), got {q1}")
    if n < 1:
        raise DomainError(f"block length must be positive, got {n}")
    if not 0.0 < target_failure <= 1.0:
        raise DomainError(f"target failure must lie in (0, 1], got {target_failure}")
    if not candidates:
        raise ValueError("empty candidate list")
    trials = math.ceil(10.0 / target_failure)
    options = []
    for order, name in enumerate(candidates):
        comp = get_code(name)
        if comp.n > n:
            continue
        rate = (n // comp.n) * comp.k / n
        options.append((-rate, order, name))
    best = None
    for _, _, name in sorted(options):
        code = block_code(name, n)
        failure = estimate_failure(code, q1, trials, rng)
        best = failure if best is None else min(best, failure)
        if failure <= target_failure:
            return code
    raise CodeSelectionError(
        f"no code of length {n} reaches failure <= {target_failure} at q1={q1:.6f}"
        + (f" (best {best:.6f})" if best is not None else " (no candidate fits)"),
        best_failure=best,
    )


# --- nested codes and keys ------------------------------------------------------


class CodePair:
    """Nested codes C2 inside C1 plus rows completing C2 to a basis of C1."""

    def __init__(self, c1: LinearCode, c2: LinearCode, complement_basis: Sequence[BitVector]):
        if c1.n != c2.n:
            raise DimensionError("C1 and C2 lengths differ")
        self.c1 = c1
        self.c2 = c2
        self.complement_basis = tuple(complement_basis)
        if len(self.complement_basis) != c1.k - c2.k:
            raise DimensionError("complement size must equal k1 - k2")
        if c2.k and not gf2_matmul(c1.parity_check.entries, c2.generator.entries.T).sum() == 0:
            raise ValueError("C2 is not contained in C1")

    @classmethod
    def from_rows(cls, c1: LinearCode, c2_rows: BitMatrix) -> "CodePair":
        """Pair for the subcode spanned by ``c2_rows``, completed by C1 generator rows."""
        c2 = LinearCode(c2_rows, name=f"sub_{c1.name}")
        solver = SpanSolver(c1.generator)
        coeff_rows = []
        for row in c2.generator.row_list():
            y = solver.coordinates(row)
            if y is None:
                raise ValueError("C2 is not contained in C1")
            coeff_rows.append(y)
        return cls(c1, c2, _complement(c1, stack(coeff_rows, c1.k)))

    @property
    def n(self) -> int:
        return self.c1.n

    @property
    def key_length(self) -> int:
        return self.c1.k - self.c2.k

    @cached_property
    def _solvers(self) -> tuple[PreimageSolver, SpanSolver]:
        basis = np.vstack([r.bits for r in self.complement_basis] + [self.c2.generator.entries]) \
            if self.c1.k else np.zeros((0, self.n), dtype=np.uint8)
        return PreimageSolver(self.c1.parity_check), SpanSolver(BitMatrix(basis, cols=self.n))

    def coset_representative(self, s: BitVector) -> BitVector:
        return self._solvers[0].solve(s)

    def coordinates(self, v: BitVector) -> BitVector | None:
        return self._solvers[1].coordinates(v)


def _complement(c1: LinearCode, coeffs: BitMatrix) -> list[BitVector]:
    # non-pivot unit vectors complete the coefficient rows to a basis of GF(2)^k1
    pivots = set(row_reduce(coeffs).pivots) if coeffs.rows else set()
    return [c1.generator.row(j) for j in range(c1.k) if j not in pivots]


def random_subcode(c1: LinearCode, dim2: int, rng: np.random.Generator) -> CodePair:
    """Uniformly random ``dim2``-dimensional subcode of ``c1``.

    Draws random coefficient matrices until one has full rank; its row
    space is then uniform over all ``dim2``-dimensional subspaces.
    """
    k1 = c1.k
    if not 0 <= dim2 <= k1:
        raise DimensionError(f"subcode dimension {dim2} outside [0, {k1}]")
    while True:
        coeffs = BitMatrix(rng.integers(0, 2, size=(dim2, k1), dtype=np.uint8), cols=k1)
        if row_reduce(coeffs).rank == dim2:
            break
    rows = coeffs @ c1.generator if dim2 else BitMatrix.zeros(0, c1.n)
    c2 = LinearCode(rows, name=f"sub_{c1.name}")
    return CodePair(c1, c2, _complement(c1, coeffs))


def coset_key(a: BitVector, pair: CodePair, announced: BitVector | None = None) -> BitVector:
    """Canonical label of the coset ``a + C2``.

    ``a`` is shifted by the canonical representative of its C1 syndrome
    into C1 and expanded in the basis (complement rows, C2 rows); the
    complement coefficients are the key.
    """
    s = syndrome(pair.c1, a)
    if announced is not None and s != announced:
        raise ReconciliationError("word does not carry the announced syndrome")
    v = a + pair.coset_representative(s)
    y = pair.coordinates(v)
    if y is None:
        raise ReconciliationError("shifted word is not a codeword of C1")
    return y[: pair.key_length]


def subcode_dimension(n: int, q2: float) -> int:
    """Dimension of the privacy-amplification subcode, ``ceil(n * h(q2))``."""
    return math.ceil(n * binary_entropy(q2) - 1e-9)


# --- entropy ---------------------------------------------------------------


def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"binary entropy needs q in [0, 1], got {q}")
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def key_rate(q1: float, q2: float) -> float:
    """Asymptotic key bits per raw bit, ``1 - h(q1) - h(q2)``."""
    for q in (q1, q2):
        if not 0.0 <= q <= 0.5:
            raise DomainError(f"error rates must lie in [0, 0.5], got {q}")
    return 1.0 - binary_entropy(q1) - binary_entropy(q2)


def iter_coset_keys(pair: CodePair) -> Iterator[tuple[BitVector, BitVector]]:
    """(codeword, key) for every codeword of C1 (small codes only)."""
    for v in pair.c1.codewords():
        yield v, coset_key(v, pair)
