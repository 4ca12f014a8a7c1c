"""Dense checks of the doubled CSS construction at small block length.

Basis-index convention: for ``N`` qubits the leftmost qubit is the most
significant bit of the amplitude index, so ``|u>|u>`` for a length-``n``
word ``u`` sits at index ``(int(u) << n) | int(u)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from confqkd.codes import CodePair, LinearCode, decode_to_coset, syndrome
from confqkd.errors import CapacityError, DimensionError, DomainError
from confqkd.gf2 import (
    BitMatrix,
    BitVector,
    all_subspaces,
    all_vectors,
    double,
    fold,
    gf2_matmul,
    inner_product,
    rank,
    span,
)

MAX_STATE_N = 7
MAX_DENSITY_N = 4
STATE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise DimensionError("amplitude vector has the wrong length")
        if abs(np.vdot(self.amplitudes, self.amplitudes).real - 1.0) > STATE_TOL:
            raise ValueError("state vector is not normalized")

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def deviation(self, other: "StateVector") -> float:
        return float(np.abs(self.amplitudes - other.amplitudes).max())


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def deviation(self, other: "DensityMatrix") -> float:
        return float(np.abs(self.entries - other.entries).max())

    def check(self, tol: float = PSD_TOL) -> None:
        m = self.entries
        if np.abs(m - m.conj().T).max() > tol:
            raise ValueError("not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError("trace is not 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise ValueError("not positive semidefinite")

    def is_diagonal(self, tol: float = STATE_TOL) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return bool(np.abs(off).max(initial=0.0) <= tol)


def _doubled_index(u: int, n: int) -> int:
    return (u << n) | u


def _element_ints(m: BitMatrix) -> list[int]:
    return [v.to_int() for v in span(m)]


def _check_n(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError(f"block length {n} exceeds the dense cap {cap}")


def css_codeword(pair: CodePair, x: BitVector, z: BitVector, v: BitVector, *, phases: bool = True) -> StateVector:
    """Normalized ``sum_w (-1)^(z,w) |x+v+w>|x+v+w>`` over ``w`` in C2.

    ``phases=False`` drops the sign factor; it exists only so the
    verification suite can be shown to catch a wrong sign convention.
    """
    n = pair.n
    _check_n(n, MAX_STATE_N)
    for vec in (x, z, v):
        if vec.len != n:
            raise DimensionError(f"expected length {n}, got {vec.len}")
    if not pair.c1.contains(v):
        raise DomainError(f"{v} is not a codeword of C1")
    amps = np.zeros(1 << (2 * n), dtype=complex)
    elements = span(pair.c2.generator)
    norm = 1.0 / np.sqrt(len(elements))
    shift = (x + v).to_int()
    for w in elements:
        sign = -1.0 if phases and inner_product(z, w) else 1.0
        amps[_doubled_index(shift ^ w.to_int(), n)] += sign * norm
    return StateVector(2 * n, amps)


def mixture_state(pair: CodePair, x: BitVector, v: BitVector) -> DensityMatrix:
    """Uniform classical mixture of ``|uu>`` over ``u`` in ``x + v + C2``."""
    n = pair.n
    _check_n(n, MAX_DENSITY_N)
    elements = _element_ints(pair.c2.generator)
    rho = np.zeros((1 << (2 * n),) * 2, dtype=complex)
    shift = (x + v).to_int()
    for w in elements:
        idx = _doubled_index(shift ^ w, n)
        rho[idx, idx] += 1.0 / len(elements)
    return DensityMatrix(rho)


def average_over_z(pair: CodePair, x: BitVector, v: BitVector, *, phases: bool = True) -> DensityMatrix:
    """``2^-n sum_z |psi(x,z,v)><psi(x,z,v)|``."""
    n = pair.n
    _check_n(n, MAX_DENSITY_N)
    psis = np.array([css_codeword(pair, x, z, v, phases=phases).amplitudes for z in all_vectors(n)])
    return DensityMatrix(psis.T @ psis.conj() / (1 << n))


def uniform_doubled_mixture(n: int) -> DensityMatrix:
    rho = np.zeros((1 << (2 * n),) * 2, dtype=complex)
    for a in range(1 << n):
        idx = _doubled_index(a, n)
        rho[idx, idx] = 1.0 / (1 << n)
    return DensityMatrix(rho)


def coset_representatives(code: LinearCode) -> list[BitVector]:
    """Smallest-integer member of each coset of ``code`` in GF(2)^n."""
    seen, reps = set(), []
    for x in all_vectors(code.n):
        s = syndrome(code, x)
        if s not in seen:
            seen.add(s)
            reps.append(x)
    return reps


def average_over_xv(pair: CodePair, convention: str = "literal", *, phases: bool = True) -> DensityMatrix:
    """Average of the z-averaged codeword states over the code parameters.

    ``literal``: ``4^-n`` times the sum over all ``x`` and ``v`` in GF(2)^n,
    which requires C1 to be the whole space. ``quotient``: ``2^-n`` times
    the sum over coset representatives ``x`` of GF(2)^n / C1 and ``v`` in C1.
    """
    n = pair.n
    _check_n(n, MAX_DENSITY_N)
    if convention == "literal":
        if pair.c1.k != n:
            raise DomainError("the literal average needs C1 = GF(2)^n")
        xs, weight = all_vectors(n), 1.0 / (1 << (2 * n))
    elif convention == "quotient":
        xs, weight = coset_representatives(pair.c1), 1.0 / (1 << n)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    vs = span(pair.c1.generator)
    total = np.zeros((1 << (2 * n),) * 2, dtype=complex)
    for x in xs:
        for v in vs:
            total += average_over_z(pair, x, v, phases=phases).entries
    return DensityMatrix(weight * total)


# --- phase errors ------------------------------------------------------------


@lru_cache(maxsize=16)
def _indices(n_qubits: int) -> np.ndarray:
    return np.arange(1 << n_qubits, dtype=np.int64)


def phase_signs(e: BitVector) -> np.ndarray:
    """Diagonal of ``Z^e``: ``(-1)^(e,u)`` for every basis index ``u``."""
    parity = np.bitwise_count(_indices(e.len) & e.to_int()) & 1
    return 1.0 - 2.0 * parity


def apply_phase_error(psi: StateVector, e: BitVector) -> StateVector:
    if e.len != psi.n_qubits:
        raise DimensionError(f"error length {e.len} != {psi.n_qubits} qubits")
    return StateVector(psi.n_qubits, psi.amplitudes * phase_signs(e))


def apply_bit_flip(psi: StateVector, e: BitVector) -> StateVector:
    if e.len != psi.n_qubits:
        raise DimensionError(f"error length {e.len} != {psi.n_qubits} qubits")
    return StateVector(psi.n_qubits, psi.amplitudes[_indices(e.len) ^ e.to_int()])


def _pair_error(n: int, i: int, j: int | None = None) -> BitVector:
    bits = np.zeros(2 * n, dtype=np.uint8)
    bits[i] = 1
    if j is not None:
        bits[j] ^= 1
    return BitVector(bits)


def check_pairwise_stabilizer(pair: CodePair, x: BitVector, z: BitVector, v: BitVector, i: int) -> bool:
    """True iff ``Z_i Z_{n+i}`` leaves the codeword unchanged (0-based ``i``)."""
    n = pair.n
    if not 0 <= i < n:
        raise DomainError(f"qubit index {i} outside [0, {n})")
    psi = css_codeword(pair, x, z, v)
    return apply_phase_error(psi, _pair_error(n, i, n + i)).deviation(psi) <= STATE_TOL


def single_phase_effects_agree(pair: CodePair, x: BitVector, z: BitVector, v: BitVector, i: int) -> bool:
    """True iff ``Z_i`` and ``Z_{n+i}`` give the same vector."""
    n = pair.n
    psi = css_codeword(pair, x, z, v)
    left = apply_phase_error(psi, _pair_error(n, i))
    right = apply_phase_error(psi, _pair_error(n, n + i))
    return left.deviation(right) <= STATE_TOL


def doubled_parity_check(h2: BitMatrix) -> BitMatrix:
    """Each row ``h`` replaced by its concatenation ``hh``."""
    return BitMatrix(np.hstack([h2.entries, h2.entries]), cols=2 * h2.cols)


def phase_syndrome(h2: BitMatrix, e: BitVector) -> BitVector:
    """Inner products ``(h_i h_i, e)`` for every row of ``h2``."""
    if e.len != 2 * h2.cols:
        raise DimensionError(f"error length {e.len} != 2 * {h2.cols}")
    return doubled_parity_check(h2) @ e


def phase_check_matrix(pair: CodePair) -> BitMatrix:
    """Parity-check matrix of C2-perp, i.e. the generator rows of C2."""
    return pair.c2.generator


def dual_of_subcode(pair: CodePair) -> LinearCode:
    return LinearCode(parity_check=pair.c2.generator, name=f"dual_{pair.c2.name}")


def phase_error_equivalence(
    pair: CodePair,
    e: BitVector,
    e_prime: BitVector,
    codewords: Iterable[tuple[BitVector, BitVector, BitVector]] | None = None,
) -> bool:
    """True iff ``Z^e`` and ``Z^e'`` act identically on every listed codeword.

    With ``codewords=None`` all ``(x, z, v)`` with ``v`` in C1 are used.
    """
    n = pair.n
    if codewords is None:
        vs = span(pair.c1.generator)
        codewords = ((x, z, v) for x in all_vectors(n) for z in all_vectors(n) for v in vs)
    for x, z, v in codewords:
        psi = css_codeword(pair, x, z, v)
        if apply_phase_error(psi, e).deviation(apply_phase_error(psi, e_prime)) > STATE_TOL:
            return False
    return True


def stabilizer_expectation(psi: StateVector, mask: BitVector) -> float:
    """``<psi| X^mask |psi>`` (real for the states used here)."""
    amps = psi.amplitudes
    return float(np.vdot(amps, amps[_indices(psi.n_qubits) ^ mask.to_int()]).real)


def measure_phase_syndrome(reference: StateVector, corrupted: StateVector, h2: BitMatrix) -> BitVector:
    """Phase syndrome read off the ``X^(hh)`` stabilizer eigenvalues.

    A bit is set where the eigenvalue on ``corrupted`` differs from the
    one on the error-free ``reference`` codeword.
    """
    bits = []
    for row in doubled_parity_check(h2).row_list():
        before = stabilizer_expectation(reference, row)
        after = stabilizer_expectation(corrupted, row)
        bits.append(int(np.sign(before) != np.sign(after)))
    return BitVector(bits) if bits else BitVector.zeros(0)


def phase_correction_fidelity(pair: CodePair, x: BitVector, z: BitVector, v: BitVector, e: BitVector) -> float:
    """Fidelity after measuring the phase syndrome of ``Z^e`` and undoing it.

    The folded error is estimated by coset-leader decoding in C2-perp and
    undone with ``Z`` on the left half only.
    """
    n = pair.n
    psi = css_codeword(pair, x, z, v)
    corrupted = apply_phase_error(psi, e)
    h2 = phase_check_matrix(pair)
    s = measure_phase_syndrome(psi, corrupted, h2)
    estimate = decode_to_coset(dual_of_subcode(pair), s)
    fixed = apply_phase_error(corrupted, estimate.concat(BitVector.zeros(n)))
    return psi.fidelity(fixed)


# --- exhaustive enumeration and report ----------------------------------------


def all_code_pairs(n: int) -> list[CodePair]:
    """Every nested pair C2 inside C1 inside GF(2)^n."""
    pairs = []
    for g1 in all_subspaces(n):
        c1 = LinearCode(g1, name="c1")
        for g2 in all_subspaces(g1.rows):
            pairs.append(CodePair.from_rows(c1, g2 @ g1))
    return pairs


def describe_pair(pair: CodePair) -> str:
    c1 = ",".join(str(r) for r in pair.c1.generator.row_list()) or "0"
    c2 = ",".join(str(r) for r in pair.c2.generator.row_list()) or "0"
    return f"C1=<{c1}> C2=<{c2}>"


@dataclass
class IdentityCheck:
    name: str
    scope: str
    tol: float = STATE_TOL
    cases: int = 0
    max_deviation: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, deviation: float, where: str, cases: int = 1) -> None:
        self.cases += cases
        self.max_deviation = max(self.max_deviation, deviation)
        if deviation > self.tol:
            self.failures.append(where)

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"identity={self.name} range={self.scope} cases={self.cases} "
                f"max_deviation={self.max_deviation:.3e} status={status}")


@dataclass
class VerificationReport:
    checks: list[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> IdentityCheck:
        return next(c for c in self.checks if c.name == name)

    def failing(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        for c in self.failing():
            lines.append(f"first_failure identity={c.name} {c.failures[0]}")
        lines.append(f"overall={'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def codeword_array(pair: CodePair, *, phases: bool = True) -> np.ndarray:
    """All codewords as an array indexed ``[x, z, v_index, amplitude]``.

    ``x`` and ``z`` run over GF(2)^n in integer order and ``v`` over the
    elements of C1 in ``span`` order.
    """
    n = pair.n
    _check_n(n, MAX_STATE_N)
    c2 = np.array(_element_ints(pair.c2.generator), dtype=np.int64)
    c1 = np.array(_element_ints(pair.c1.generator), dtype=np.int64)
    xs = np.arange(1 << n, dtype=np.int64)
    # u[x, v, w] and its doubled basis index
    u = xs[:, None, None] ^ c1[None, :, None] ^ c2[None, None, :]
    idx = (u << n) | u
    if phases:
        sign = 1.0 - 2.0 * (np.bitwise_count(xs[:, None] & c2[None, :]) & 1)
    else:
        sign = np.ones((xs.size, c2.size))
    psi = np.zeros((xs.size, xs.size, c1.size, 1 << (2 * n)), dtype=complex)
    norm = 1.0 / np.sqrt(c2.size)
    xi, zi, vi, wi = np.meshgrid(xs, xs, np.arange(c1.size), np.arange(c2.size), indexing="ij")
    np.add.at(psi, (xi, zi, vi, idx[xi, vi, wi]), sign[zi, wi] * norm)
    return psi


def verify_css(max_n: int = 3, *, phases: bool = True) -> VerificationReport:
    """Check every identity of the doubled CSS construction exhaustively.

    The syndrome-folding identity runs for ``n <= max_n``; identities that
    need explicit states run for ``n <= min(max_n, 3)``.
    """
    if max_n < 1:
        raise DomainError("max_n must be at least 1")
    state_n = min(max_n, 3)
    checks = {
        "mix0": IdentityCheck("mix0", f"n<={state_n}"),
        "mix_literal": IdentityCheck("mix_literal", f"n<={state_n},C1=F2^n"),
        "mix_quotient": IdentityCheck("mix_quotient", f"n<={state_n}"),
        "pairwise_stabilizer": IdentityCheck("pairwise_stabilizer", f"n<={state_n}"),
        "single_phase_same_effect": IdentityCheck("single_phase_same_effect", f"n<={state_n}"),
        "doubled_phase_equivalence": IdentityCheck("doubled_phase_equivalence", f"n<={state_n}"),
        "doubled_parity_check": IdentityCheck("doubled_parity_check", f"n<={state_n}"),
        "syndrome_fold": IdentityCheck("syndrome_fold", f"n<={max_n}"),
        "phase_roundtrip": IdentityCheck("phase_roundtrip", f"n<={state_n}", tol=1e-10),
    }
    for n in range(1, max_n + 1):
        _check_fold(n, checks["syndrome_fold"])
        if n > state_n:
            continue
        for pair in all_code_pairs(n):
            psi = codeword_array(pair, phases=phases)
            where = describe_pair(pair)
            _check_mixtures(pair, psi, where, checks)
            _check_phase_actions(pair, psi, where, checks)
            _check_roundtrip(pair, psi, where, checks["phase_roundtrip"])
    return VerificationReport(list(checks.values()))


def _check_fold(n: int, check: IdentityCheck) -> None:
    hs = np.array([h.bits for h in all_vectors(n)])
    es = np.array([e.bits for e in all_vectors(2 * n)])
    direct = gf2_matmul(es, np.hstack([hs, hs]).T)
    folded = gf2_matmul(es[:, :n] ^ es[:, n:], hs.T)
    bad = np.argwhere(direct != folded)
    where = f"n={n}" if not bad.size else f"n={n} e={all_vectors(2 * n)[bad[0, 0]]} h={all_vectors(n)[bad[0, 1]]}"
    check.record(float(bad.shape[0]), where, cases=direct.size)


def _check_mixtures(pair: CodePair, psi: np.ndarray, where: str, checks: dict) -> None:
    n = pair.n
    dim = 1 << (2 * n)
    # rho[x, v] = 2^-n sum_z |psi><psi|
    rho = np.einsum("xzva,xzvb->xvab", psi, psi.conj()) / (1 << n)
    c2 = np.array(_element_ints(pair.c2.generator), dtype=np.int64)
    c1 = np.array(_element_ints(pair.c1.generator), dtype=np.int64)
    xs = np.arange(1 << n, dtype=np.int64)
    u = xs[:, None, None] ^ c1[None, :, None] ^ c2[None, None, :]
    target = np.zeros_like(rho)
    xi, vi, wi = np.meshgrid(xs, np.arange(c1.size), np.arange(c2.size), indexing="ij")
    d = (u << n) | u
    np.add.at(target, (xi, vi, d[xi, vi, wi], d[xi, vi, wi]), 1.0 / c2.size)
    dev = np.abs(rho - target).reshape(xs.size, c1.size, -1).max(axis=2)
    worst = np.unravel_index(int(dev.argmax()), dev.shape)
    checks["mix0"].record(float(dev.max()), f"{where} x={worst[0]} v_index={worst[1]}", cases=dev.size)

    uniform = np.zeros((dim, dim))
    diag = (xs << n) | xs
    uniform[diag, diag] = 1.0 / (1 << n)
    if pair.c1.k == n:
        literal = rho.sum(axis=(0, 1)) / (1 << (2 * n))
        checks["mix_literal"].record(float(np.abs(literal - uniform).max()), where)
    reps = [r.to_int() for r in coset_representatives(pair.c1)]
    quotient = rho[reps].sum(axis=(0, 1)) / (1 << n)
    checks["mix_quotient"].record(float(np.abs(quotient - uniform).max()), where)


def _check_phase_actions(pair: CodePair, psi: np.ndarray, where: str, checks: dict) -> None:
    n = pair.n
    flat = psi.reshape(-1, psi.shape[-1])
    for i in range(n):
        both = flat * phase_signs(_pair_error(n, i, n + i))
        checks["pairwise_stabilizer"].record(float(np.abs(both - flat).max()), f"{where} i={i}", cases=flat.shape[0])
        left = flat * phase_signs(_pair_error(n, i))
        right = flat * phase_signs(_pair_error(n, n + i))
        checks["single_phase_same_effect"].record(float(np.abs(left - right).max()), f"{where} i={i}", cases=flat.shape[0])

    h2d = doubled_parity_check(phase_check_matrix(pair))
    for e in all_vectors(2 * n):
        moved = flat * phase_signs(e)
        # Z^e acts as a global phase on every codeword iff H2' e = 0
        overlap = np.abs(np.einsum("ra,ra->r", flat.conj(), moved))
        trivial = bool(np.all(np.abs(overlap - 1.0) <= STATE_TOL))
        kernel = (h2d @ e).is_zero() if h2d.rows else True
        checks["doubled_parity_check"].record(float(trivial != kernel), f"{where} e={e}")
        if e.len and not e[: n].is_zero():
            continue
        # e = (0, d): compare against the doubled error (d, d) + (0, d) = (d, 0)
        d = e[n:]
        swapped = flat * phase_signs(d.concat(BitVector.zeros(n)))
        checks["doubled_phase_equivalence"].record(float(np.abs(moved - swapped).max()), f"{where} d={d}")


def _check_roundtrip(pair: CodePair, psi: np.ndarray, where: str, check: IdentityCheck) -> None:
    """Measure the phase syndrome of every error, decode in C2-perp, correct."""
    n = pair.n
    flat = psi.reshape(-1, psi.shape[-1])
    dual = dual_of_subcode(pair)
    flips = [_indices(2 * n) ^ r.to_int() for r in doubled_parity_check(phase_check_matrix(pair)).row_list()]

    def expectations(states: np.ndarray) -> np.ndarray:
        out = np.empty((len(flips), states.shape[0]))
        for j, f in enumerate(flips):
            out[j] = np.einsum("ra,ra->r", states.conj(), states[:, f]).real
        return out

    ref = expectations(flat)
    for e in all_vectors(2 * n):
        bad = flat * phase_signs(e)
        synd = (np.sign(ref) != np.sign(expectations(bad))).astype(np.uint8)
        if synd.size and not (synd == synd[:, :1]).all():
            check.record(1.0, f"{where} e={e} syndrome depends on the codeword")
            continue
        s = BitVector(synd[:, 0]) if synd.size else BitVector.zeros(0)
        fixed = bad * phase_signs(decode_to_coset(dual, s).concat(BitVector.zeros(n)))
        fid = np.abs(np.einsum("ra,ra->r", flat.conj(), fixed)) ** 2
        check.record(float(1.0 - fid.min()), f"{where} e={e}")


def steane_pair() -> CodePair:
    """C1 = Hamming(7,4) and C2 its dual, so C2-perp is Hamming(7,4) again."""
    from confqkd.codes import get_code

    ham = get_code("hamming_7_4")
    return CodePair.from_rows(ham, ham.parity_check)


def fold_weight_one_errors(n: int) -> list[BitVector]:
    """Every length-``2n`` error whose fold has weight exactly one."""
    return [left.concat(left + BitVector.unit(n, i)) for i in range(n) for left in all_vectors(n)]


__all__: Sequence[str] = [
    "DensityMatrix",
    "StateVector",
    "all_code_pairs",
    "apply_phase_error",
    "average_over_xv",
    "average_over_z",
    "check_pairwise_stabilizer",
    "css_codeword",
    "doubled_parity_check",
    "measure_phase_syndrome",
    "mixture_state",
    "phase_correction_fidelity",
    "phase_error_equivalence",
    "phase_syndrome",
    "steane_pair",
    "codeword_array",
    "fold_weight_one_errors",
    "verify_css",
]
