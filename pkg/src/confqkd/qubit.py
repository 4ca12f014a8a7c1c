"""Single-qubit BB84 states, projective measurement and per-qubit channels.

Every function has a scalar form working on one ``QubitState`` and a
``*_batch`` form working on an ``(N, 2, 2)`` stack of density matrices;
the protocol engine uses the batch forms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Union

import numpy as np

from confqkd.errors import DomainError

SQRT_HALF = 1.0 / np.sqrt(2.0)

KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = SQRT_HALF * np.array([1.0, 1.0], dtype=complex)
KET_MINUS = SQRT_HALF * np.array([1.0, -1.0], dtype=complex)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
MAXIMALLY_MIXED = 0.5 * np.eye(2, dtype=complex)

STATE_TOL = 1e-12


class Basis(IntEnum):
    COMPUTATIONAL = 0
    HADAMARD = 1


@dataclass(frozen=True)
class Bb84State:
    basis: Basis
    bit: int

    def ket(self) -> np.ndarray:
        return _KETS[int(self.basis)][self.bit]


_KETS = ((KET_0, KET_1), (KET_PLUS, KET_MINUS))
# indexed by 2 * basis + bit
_PROJECTORS = np.array([np.outer(k, k.conj()) for pair in _KETS for k in pair])


class QubitState:
    """Density matrix of one qubit; validated on construction."""

    __slots__ = ("rho",)

    def __init__(self, rho):
        rho = np.array(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got {rho.shape}")
        check_density(rho)
        rho.setflags(write=False)
        self.rho = rho

    def __repr__(self) -> str:
        return f"QubitState({self.rho.tolist()})"


def check_density(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")


# --- channels ---------------------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    def __str__(self) -> str:
        return "ideal"


@dataclass(frozen=True)
class Depolarizing:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"depolarizing probability must lie in [0, 1], got {self.p}")

    def __str__(self) -> str:
        return f"depolarizing:p={self.p!r}"


@dataclass(frozen=True)
class InterceptResend:
    def __str__(self) -> str:
        return "intercept_resend"


@dataclass(frozen=True)
class Composed:
    models: tuple["ChannelModel", ...]

    def __str__(self) -> str:
        return "compose:[" + ",".join(str(m) for m in self.models) + "]"


ChannelModel = Union[Ideal, Depolarizing, InterceptResend, Composed]


@dataclass
class EveLog:
    """Eve's measurement bases and outcomes, in pulse order per attack stage."""

    bases: list[np.ndarray] = field(default_factory=list)
    outcomes: list[np.ndarray] = field(default_factory=list)

    def record(self, bases, outcomes) -> None:
        self.bases.append(np.atleast_1d(np.asarray(bases, dtype=np.uint8)))
        self.outcomes.append(np.atleast_1d(np.asarray(outcomes, dtype=np.uint8)))


def parse_channel(text: str) -> ChannelModel:
    """Parse ``ideal``, ``depolarizing:p=0.05``, ``intercept_resend`` or ``compose:[a,b,...]``."""
    text = text.strip()
    if text == "ideal":
        return Ideal()
    if text == "intercept_resend":
        return InterceptResend()
    if text.startswith("depolarizing:"):
        key, _, value = text[len("depolarizing:"):].partition("=")
        if key.strip() != "p" or not value:
            raise ValueError(f"expected depolarizing:p=<prob>, got {text!r}")
        return Depolarizing(float(value))
    if text.startswith("compose:[") and text.endswith("]"):
        inner = text[len("compose:["):-1]
        parts, depth, start = [], 0, 0
        for i, ch in enumerate(inner):
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(inner[start:i])
                start = i + 1
        if inner.strip():
            parts.append(inner[start:])
        return Composed(tuple(parse_channel(p) for p in parts))
    raise ValueError(f"unknown channel model {text!r}")


# --- scalar operations ---------------------------------------------------------


def prepare(s: Bb84State) -> QubitState:
    return QubitState(_PROJECTORS[2 * int(s.basis) + s.bit])


def random_bb84(rng: np.random.Generator) -> Bb84State:
    idx = int(rng.integers(0, 4))
    return Bb84State(Basis(idx >> 1), idx & 1)


def outcome_one_probability(rho: np.ndarray, basis: Basis) -> float:
    if basis == Basis.COMPUTATIONAL:
        return float(rho[1, 1].real)
    return float(0.5 * (rho[0, 0] + rho[1, 1] - 2.0 * rho[0, 1].real).real)


def measure(q: QubitState, basis: Basis, rng: np.random.Generator) -> int:
    """Born-rule outcome bit; the state should not be reused afterwards."""
    return int(rng.random() < outcome_one_probability(q.rho, basis))


def apply_channel(
    m: ChannelModel, q: QubitState, rng: np.random.Generator, eve_log: EveLog | None = None
) -> QubitState:
    out = apply_channel_batch(m, q.rho[None], rng, eve_log)
    return QubitState(out[0])


# --- batch operations ------------------------------------------------------------


def random_bb84_batch(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    """(bases, bits) arrays for ``count`` uniformly random BB84 states."""
    idx = rng.integers(0, 4, size=count)
    return (idx >> 1).astype(np.uint8), (idx & 1).astype(np.uint8)


def prepare_batch(bases: np.ndarray, bits: np.ndarray) -> np.ndarray:
    return _PROJECTORS[2 * bases.astype(np.intp) + bits.astype(np.intp)].copy()


def measure_batch(rhos: np.ndarray, bases: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    p1_comp = rhos[:, 1, 1].real
    p1_had = 0.5 * (rhos[:, 0, 0].real + rhos[:, 1, 1].real) - rhos[:, 0, 1].real
    p1 = np.where(bases == Basis.COMPUTATIONAL, p1_comp, p1_had)
    return (rng.random(rhos.shape[0]) < p1).astype(np.uint8)


def apply_channel_batch(
    m: ChannelModel, rhos: np.ndarray, rng: np.random.Generator, eve_log: EveLog | None = None
) -> np.ndarray:
    if isinstance(m, Ideal):
        return rhos
    if isinstance(m, Depolarizing):
        hit = rng.random(rhos.shape[0]) < m.p
        out = rhos.copy()
        out[hit] = MAXIMALLY_MIXED
        return out
    if isinstance(m, InterceptResend):
        bases = rng.integers(0, 2, size=rhos.shape[0]).astype(np.uint8)
        outcomes = measure_batch(rhos, bases, rng)
        if eve_log is not None:
            eve_log.record(bases, outcomes)
        return prepare_batch(bases, outcomes)
    if isinstance(m, Composed):
        for sub in m.models:
            rhos = apply_channel_batch(sub, rhos, rng, eve_log)
        return rhos
    raise TypeError(f"not a channel model: {m!r}")
