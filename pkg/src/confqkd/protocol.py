"""Three-party session: transmission, sifting, estimation, reconciliation, keys.

Alice prepares one BB84 state per pulse and sends an independently
prepared copy to Bob and to Charlie. After basis sifting the
computational-basis bits feed the key and the Hadamard-basis bits only
feed the phase-error estimate. Every public message goes through an
append-only :class:`Transcript`, and :func:`replay_session` rebuilds the
keys from the transcript plus each party's private measurement data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from confqkd.codes import (
    LIBRARY,
    CodePair,
    coset_key,
    get_code,
    key_rate,
    random_subcode,
    reconcile,
    select_code,
    subcode_dimension,
    syndrome,
)
from confqkd.errors import CodeSelectionError, ConfigError, EstimationError
from confqkd.gf2 import BitMatrix, BitVector
from confqkd.qubit import (
    ChannelModel,
    EveLog,
    Ideal,
    apply_channel_batch,
    measure_batch,
    prepare_batch,
    random_bb84_batch,
)

ROLES = ("alice", "bob", "charlie", "channel_bob", "channel_charlie")
SAMPLE_FRACTION = 0.5


@dataclass(frozen=True)
class SessionConfig:
    num_pulses: int = 4096
    channel_bob: ChannelModel = Ideal()
    channel_charlie: ChannelModel = Ideal()
    target_failure: float = 0.01
    codes: tuple[str, ...] = LIBRARY
    abort_threshold: float = 0.0
    slack: float = 0.0
    seed: int = 0
    seeds: Mapping[str, int] | None = None

    def validate(self) -> None:
        if self.num_pulses < 1:
            raise ConfigError(f"num_pulses must be >= 1, got {self.num_pulses}")
        if not 0.0 < self.target_failure <= 1.0:
            raise ConfigError(f"target_failure must lie in (0, 1], got {self.target_failure}")
        if self.slack < 0:
            raise ConfigError("slack must be non-negative")
        if not self.codes:
            raise ConfigError("code registry filter is empty")
        for name in self.codes:
            try:
                get_code(name)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"unknown code {name!r}") from exc
        self.role_seeds()

    def role_seeds(self) -> dict[str, int]:
        if self.seeds is not None:
            missing = set(ROLES) - set(self.seeds)
            if missing:
                raise ConfigError(f"missing seeds for {sorted(missing)}")
            seeds = {role: int(self.seeds[role]) for role in ROLES}
        else:
            if self.seed < 0:
                raise ConfigError("seed must be non-negative")
            children = np.random.SeedSequence(self.seed).spawn(len(ROLES))
            seeds = {role: int(ch.generate_state(1, np.uint64)[0]) for role, ch in zip(ROLES, children)}
        if len(set(seeds.values())) != len(ROLES):
            raise ConfigError("seeds must be distinct per role")
        return seeds


@dataclass
class PulseRecords:
    """Per-pulse private data of all three parties (simulator view)."""

    alice_basis: np.ndarray
    alice_bit: np.ndarray
    bob_basis: np.ndarray
    bob_bit: np.ndarray
    charlie_basis: np.ndarray
    charlie_bit: np.ndarray

    def __len__(self) -> int:
        return self.alice_basis.shape[0]


@dataclass(frozen=True)
class SiftedData:
    a: BitVector
    b: BitVector
    c: BitVector
    alpha: BitVector
    beta: BitVector
    gamma: BitVector
    comp_pulses: np.ndarray
    had_pulses: np.ndarray
    comp_retained: int
    had_retained: int


# --- transcript ------------------------------------------------------------------


class Message(NamedTuple):
    step: int
    party: str
    kind: str
    payload: str

    def line(self) -> str:
        return f"STEP {self.step} {self.party} {self.kind} {self.payload or '-'}"


class Transcript:
    """Append-only public record; serializes one message per line."""

    def __init__(self, messages: Sequence[Message] = ()):
        self._messages: list[Message] = list(messages)

    def post(self, step: int, party: str, kind: str, payload: str = "") -> None:
        self._messages.append(Message(step, party, kind, payload))

    @property
    def messages(self) -> tuple[Message, ...]:
        return tuple(self._messages)

    def find(self, kind: str, party: str | None = None) -> list[Message]:
        return [m for m in self._messages if m.kind == kind and (party is None or m.party == party)]

    def one(self, kind: str, party: str = "alice") -> str:
        found = self.find(kind, party)
        if len(found) != 1:
            raise ValueError(f"expected one {kind} message from {party}, found {len(found)}")
        return found[0].payload

    def dumps(self) -> str:
        return "".join(m.line() + "\n" for m in self._messages)

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        msgs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split(" ", 4)
            if len(parts) != 5 or parts[0] != "STEP":
                raise ValueError(f"line {lineno}: malformed transcript line")
            payload = "" if parts[4] == "-" else parts[4]
            msgs.append(Message(int(parts[1]), parts[2], parts[3], payload))
        return cls(msgs)

    def __len__(self) -> int:
        return len(self._messages)


def _bits_text(arr: np.ndarray) -> str:
    return (np.asarray(arr, dtype=np.uint8) + ord("0")).tobytes().decode()


def _index_text(idx: np.ndarray) -> str:
    return ",".join(str(int(i)) for i in idx)


def _parse_index(text: str) -> np.ndarray:
    return np.array([int(t) for t in text.split(",")] if text else [], dtype=np.int64)


def _matrix_text(m: BitMatrix) -> str:
    return ",".join(str(r) for r in m.row_list())


def _parse_matrix(text: str, cols: int) -> BitMatrix:
    return BitMatrix.from_str(text.replace(",", "\n"), cols=cols) if text else BitMatrix.zeros(0, cols)


# --- outcomes -----------------------------------------------------------------


class GroundTruth(NamedTuple):
    bob: bool
    charlie: bool
    keys_agree: bool


def _fmt(q: float | None) -> str:
    return "na" if q is None else f"{q:.6f}"


@dataclass(frozen=True)
class Aborted:
    reason: str
    q1: float | None
    q2: float | None
    kept_bits: int = 0
    eve_logs: Mapping[str, EveLog] = field(default_factory=dict, compare=False, repr=False)

    status = "aborted"
    key_length = 0

    def to_record(self) -> str:
        return (
            f"status=aborted reason={self.reason} q1={_fmt(self.q1)} q2={_fmt(self.q2)} "
            f"kept_bits={self.kept_bits}"
        )


@dataclass(frozen=True)
class Completed:
    key_alice: BitVector
    key_bob: BitVector
    key_charlie: BitVector
    q1: float
    q2: float
    rate: float
    ground_truth_match: GroundTruth
    kept_bits: int
    code: str
    eve_logs: Mapping[str, EveLog] = field(default_factory=dict, compare=False, repr=False)

    status = "completed"

    @property
    def key_length(self) -> int:
        return self.key_alice.len

    def to_record(self) -> str:
        gt = self.ground_truth_match
        return (
            f"status=completed q1={_fmt(self.q1)} q2={_fmt(self.q2)} rate={self.rate:.6f} "
            f"kept_bits={self.kept_bits} key_bits={self.key_length} code={self.code} "
            f"key_alice={self.key_alice.to_hex()} key_bob={self.key_bob.to_hex()} "
            f"key_charlie={self.key_charlie.to_hex()} "
            f"match_bob={str(gt.bob).lower()} match_charlie={str(gt.charlie).lower()} "
            f"keys_agree={str(gt.keys_agree).lower()}"
        )


SessionOutcome = Aborted | Completed


def parse_record(text: str) -> dict[str, str]:
    return dict(field.split("=", 1) for field in text.split())


# --- protocol steps ------------------------------------------------------------


def transmit(cfg: SessionConfig, rngs: Mapping[str, np.random.Generator],
             eve_logs: Mapping[str, EveLog] | None = None) -> PulseRecords:
    """Steps 1-3: preparation, both quantum links, and both measurements."""
    eve_logs = eve_logs or {}
    n = cfg.num_pulses
    a_basis, a_bit = random_bb84_batch(rngs["alice"], n)
    to_bob = apply_channel_batch(cfg.channel_bob, prepare_batch(a_basis, a_bit),
                                 rngs["channel_bob"], eve_logs.get("bob"))
    to_charlie = apply_channel_batch(cfg.channel_charlie, prepare_batch(a_basis, a_bit),
                                     rngs["channel_charlie"], eve_logs.get("charlie"))
    b_basis = rngs["bob"].integers(0, 2, size=n).astype(np.uint8)
    b_bit = measure_batch(to_bob, b_basis, rngs["bob"])
    c_basis = rngs["charlie"].integers(0, 2, size=n).astype(np.uint8)
    c_bit = measure_batch(to_charlie, c_basis, rngs["charlie"])
    return PulseRecords(a_basis, a_bit, b_basis, b_bit, c_basis, c_bit)


def sift(records: PulseRecords) -> SiftedData:
    """Keep pulses whose preparation and both measurement bases coincide.

    Each basis group keeps pulse order and is truncated to even length.
    """
    same = (records.alice_basis == records.bob_basis) & (records.alice_basis == records.charlie_basis)
    comp = np.flatnonzero(same & (records.alice_basis == 0))
    had = np.flatnonzero(same & (records.alice_basis == 1))
    comp_retained, had_retained = comp.size, had.size
    comp = comp[: comp.size - comp.size % 2]
    had = had[: had.size - had.size % 2]
    return SiftedData(
        a=BitVector(records.alice_bit[comp]),
        b=BitVector(records.bob_bit[comp]),
        c=BitVector(records.charlie_bit[comp]),
        alpha=BitVector(records.alice_bit[had]),
        beta=BitVector(records.bob_bit[had]),
        gamma=BitVector(records.charlie_bit[had]),
        comp_pulses=comp,
        had_pulses=had,
        comp_retained=comp_retained,
        had_retained=had_retained,
    )


def sample_subset(total: int, half: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted uniformly random subset of ``range(total)`` with ``half`` elements."""
    if total != 2 * half:
        raise ValueError(f"sample size {half} is not half of {total}")
    return np.sort(rng.choice(total, size=half, replace=False)).astype(np.int64)


def complement(total: int, subset: np.ndarray) -> np.ndarray:
    mask = np.ones(total, dtype=bool)
    mask[subset] = False
    return np.flatnonzero(mask)


def _mismatch_fraction(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.count_nonzero(x != y)) / x.size


def estimate_q1(s: SiftedData, S: np.ndarray) -> float:
    S = np.asarray(S, dtype=np.int64)
    if S.size == 0:
        raise EstimationError("empty sample for q1")
    a, b, c = s.a.bits[S], s.b.bits[S], s.c.bits[S]
    return max(_mismatch_fraction(a, b), _mismatch_fraction(a, c))


def estimate_q2(s: SiftedData, S: np.ndarray) -> float:
    """Fraction of sampled positions where exactly one of beta, gamma differs from alpha."""
    S = np.asarray(S, dtype=np.int64)
    if S.size == 0:
        raise EstimationError("empty sample for q2")
    alpha, beta, gamma = s.alpha.bits[S], s.beta.bits[S], s.gamma.bits[S]
    one_off = (beta != alpha) ^ (gamma != alpha)
    return float(np.count_nonzero(one_off)) / S.size


def privacy_amplify(a_reconciled: BitVector, pair: CodePair, announced: BitVector | None = None) -> BitVector:
    return coset_key(a_reconciled, pair, announced)


def _q_from_samples(samples: Mapping[str, str], which: int) -> float:
    # recomputes q1 / q2 purely from the announced sample bits
    a, b, c = (np.frombuffer(samples[p].encode(), dtype=np.uint8) for p in ("alice", "bob", "charlie"))
    if which == 1:
        return max(_mismatch_fraction(a, b), _mismatch_fraction(a, c))
    return float(np.count_nonzero((b != a) ^ (c != a))) / a.size


def _make_rngs(cfg: SessionConfig) -> dict[str, np.random.Generator]:
    return {role: np.random.default_rng(seed) for role, seed in cfg.role_seeds().items()}


def run_session(cfg: SessionConfig) -> tuple[SessionOutcome, Transcript]:
    """Run all protocol steps once and return the outcome and public transcript."""
    cfg.validate()
    rngs = _make_rngs(cfg)
    eve_logs = {"bob": EveLog(), "charlie": EveLog()}
    records = transmit(cfg, rngs, eve_logs)
    t = Transcript()
    t.post(4, "alice", "BASES", _bits_text(records.alice_basis))
    t.post(4, "bob", "BASES", _bits_text(records.bob_basis))
    t.post(4, "charlie", "BASES", _bits_text(records.charlie_basis))
    sifted = sift(records)
    alice = rngs["alice"]

    def abort(step, reason, q1=None, q2=None, kept=0):
        t.post(step, "alice", "ABORT", reason)
        return Aborted(reason, q1, q2, kept, eve_logs), t

    two_n, two_np = sifted.a.len, sifted.alpha.len
    t.post(5, "alice", "SIFTED", f"comp={two_n},had={two_np}")
    if two_n < 2 or two_np < 2:
        return abort(5, "insufficient_sifted")

    S = sample_subset(two_n, two_n // 2, alice)
    t.post(7, "alice", "SUBSET", _index_text(S))
    for party, bits in (("alice", sifted.a), ("bob", sifted.b), ("charlie", sifted.c)):
        t.post(7, party, "SAMPLE_BITS", _bits_text(bits.bits[S]))
    q1 = estimate_q1(sifted, S)
    t.post(7, "alice", "Q1", f"{q1:.6f}")

    S2 = sample_subset(two_np, two_np // 2, alice)
    t.post(8, "alice", "SUBSET", _index_text(S2))
    for party, bits in (("alice", sifted.alpha), ("bob", sifted.beta), ("charlie", sifted.gamma)):
        t.post(8, party, "SAMPLE_BITS", _bits_text(bits.bits[S2]))
    q2 = estimate_q2(sifted, S2)
    t.post(8, "alice", "Q2", f"{q2:.6f}")

    keep = complement(two_n, S)
    a_k, b_k, c_k = sifted.a[keep], sifted.b[keep], sifted.c[keep]
    n = keep.size
    qe1, qe2 = q1 + cfg.slack, q2 + cfg.slack
    if qe1 >= 0.5 or qe2 >= 0.5 or key_rate(qe1, qe2) <= cfg.abort_threshold:
        return abort(9, "rate_nonpositive", q1, q2, n)
    rate = key_rate(qe1, qe2)

    try:
        code = select_code(qe1, n, cfg.target_failure, alice, cfg.codes)
    except CodeSelectionError:
        return abort(9, "code_selection_failed", q1, q2, n)
    t.post(9, "alice", "CODE", code.name)
    t.post(9, "alice", "PARITY_CHECK", _matrix_text(code.parity_check))

    s_a = syndrome(code, a_k)
    t.post(10, "alice", "SYNDROME", str(s_a))
    b_rec = reconcile(b_k, s_a, code)
    c_rec = reconcile(c_k, s_a, code)

    dim2 = subcode_dimension(n, qe2)
    if dim2 >= code.k:
        return abort(13, "key_length_nonpositive", q1, q2, n)
    pair = random_subcode(code, dim2, alice)
    t.post(13, "alice", "SUBCODE", _matrix_text(pair.c2.generator))

    keys = [privacy_amplify(w, pair, s_a) for w in (a_k, b_rec, c_rec)]
    gt = GroundTruth(b_rec == a_k, c_rec == a_k, keys[0] == keys[1] == keys[2])
    return Completed(*keys, q1, q2, rate, gt, n, code.name, eve_logs), t


def replay_session(cfg: SessionConfig, transcript: Transcript) -> SessionOutcome:
    """Recompute the outcome from a transcript and the parties' private streams.

    Only Steps 1-3 (private preparation and measurement) are re-simulated;
    every public decision (samples, code, syndrome, subcode) is read back
    from ``transcript``.
    """
    cfg.validate()
    sifted = sift(transmit(cfg, _make_rngs(cfg)))
    aborts = transcript.find("ABORT")
    if not transcript.find("SUBSET"):
        return Aborted(aborts[0].payload, None, None, 0)

    S = _parse_index(transcript.find("SUBSET")[0].payload)
    S2 = _parse_index(transcript.find("SUBSET")[1].payload)
    samples = {1: {}, 2: {}}
    for m in transcript.find("SAMPLE_BITS"):
        samples[m.step - 6][m.party] = m.payload
    if samples[1]["alice"] != str(sifted.a[S]):
        raise ValueError("transcript sample does not match Alice's private bits")
    q1, q2 = _q_from_samples(samples[1], 1), _q_from_samples(samples[2], 2)
    keep = complement(sifted.a.len, S)
    n = keep.size
    if aborts:
        return Aborted(aborts[0].payload, q1, q2, n)

    a_k, b_k, c_k = sifted.a[keep], sifted.b[keep], sifted.c[keep]
    code = get_code(transcript.one("CODE"))
    if code.parity_check != _parse_matrix(transcript.one("PARITY_CHECK"), n):
        raise ValueError("announced parity check does not match the named code")
    s_a = BitVector.from_str(transcript.one("SYNDROME"))
    pair = CodePair.from_rows(code, _parse_matrix(transcript.one("SUBCODE"), n))
    b_rec, c_rec = reconcile(b_k, s_a, code), reconcile(c_k, s_a, code)
    keys = [privacy_amplify(w, pair, s_a) for w in (a_k, b_rec, c_rec)]
    gt = GroundTruth(b_rec == a_k, c_rec == a_k, keys[0] == keys[1] == keys[2])
    rate = key_rate(q1 + cfg.slack, q2 + cfg.slack)
    return Completed(*keys, q1, q2, rate, gt, n, code.name)


__all__ = [
    "Aborted",
    "Completed",
    "GroundTruth",
    "Message",
    "PulseRecords",
    "SessionConfig",
    "SessionOutcome",
    "SiftedData",
    "Transcript",
    "complement",
    "estimate_q1",
    "estimate_q2",
    "parse_record",
    "privacy_amplify",
    "replay_session",
    "run_session",
    "sample_subset",
    "sift",
    "transmit",
]
