import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from confqkd.codes import key_rate
from confqkd.errors import ConfigError, EstimationError
from confqkd.gf2 import BitVector
from confqkd.protocol import (
    ROLES,
    Aborted,
    Completed,
    PulseRecords,
    SessionConfig,
    SiftedData,
    Transcript,
    complement,
    estimate_q1,
    estimate_q2,
    parse_record,
    replay_session,
    run_session,
    sample_subset,
    sift,
)
from confqkd.qubit import Depolarizing, InterceptResend


def _sifted(a="", b="", c="", alpha="", beta="", gamma=""):
    z = np.zeros(0, dtype=np.int64)
    return SiftedData(*(BitVector(x) for x in (a, b, c, alpha, beta, gamma)), z, z, len(a), len(alpha))


def _records(ab, bb, cb):
    n = len(ab)
    bits = np.zeros(n, np.uint8)
    return PulseRecords(np.array(ab, np.uint8), bits, np.array(bb, np.uint8), bits, np.array(cb, np.uint8), bits)


def test_ideal_session():
    out, t = run_session(SessionConfig(num_pulses=4096, seed=11))
    assert isinstance(out, Completed)
    assert out.q1 == out.q2 == 0.0
    assert out.key_alice == out.key_bob == out.key_charlie
    assert out.key_length == out.kept_bits and out.rate == 1.0
    assert out.ground_truth_match.keys_agree


@pytest.mark.parametrize("pulses", [64, 200, 1000])
def test_ideal_any_size(pulses):
    out, _ = run_session(SessionConfig(num_pulses=pulses, seed=pulses))
    assert isinstance(out, Completed) and out.key_length == out.kept_bits


def test_heavy_depolarizing_aborts():
    cfg = SessionConfig(num_pulses=4096, channel_bob=Depolarizing(0.6), channel_charlie=Depolarizing(0.6), seed=1)
    out, t = run_session(cfg)
    assert isinstance(out, Aborted) and out.reason == "rate_nonpositive"
    assert t.messages[-1].kind == "ABORT"


def test_intercept_resend_estimates():
    cfg = SessionConfig(num_pulses=20_000, channel_bob=InterceptResend(), seed=2)
    out, _ = run_session(cfg)
    assert isinstance(out, Aborted)
    assert abs(out.q1 - 0.25) < 0.05 and abs(out.q2 - 0.25) < 0.05
    assert out.eve_logs["bob"].bases and not out.eve_logs["charlie"].bases


def test_tiny_session_aborts_cleanly():
    out, _ = run_session(SessionConfig(num_pulses=4, seed=0))
    assert isinstance(out, Aborted) and out.reason == "insufficient_sifted"


def test_sift_examples():
    s = sift(_records([0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]))
    assert s.a.len == 4 and s.alpha.len == 0
    s = sift(_records([0, 1, 1], [0, 1, 1], [1, 1, 1]))
    assert s.comp_retained == 0 and s.had_retained == 2


def test_sift_fraction():
    cfg = SessionConfig(num_pulses=100_000, seed=3)
    from confqkd.protocol import _make_rngs, transmit
    s = sift(transmit(cfg, _make_rngs(cfg)))
    for count, p in ((s.comp_retained + s.had_retained, 0.25), (s.comp_retained, 0.125), (s.had_retained, 0.125)):
        assert abs(count - p * 1e5) < 4 * np.sqrt(1e5 * p * (1 - p))


def test_sample_subset_properties():
    rng = np.random.default_rng(0)
    S = sample_subset(20, 10, rng)
    assert np.all(np.diff(S) > 0) and S.min() >= 0 and S.max() < 20
    assert complement(20, S).size == 10
    firsts = [int(sample_subset(2, 1, rng)[0]) for _ in range(10_000)]
    assert stats.chisquare(np.bincount(firsts, minlength=2)).pvalue > 0.001
    with pytest.raises(ValueError):
        sample_subset(10, 4, rng)


def test_estimate_q1_examples():
    S = np.arange(8)
    assert estimate_q1(_sifted("0" * 8, "0" * 8, "0" * 8), S) == 0.0
    assert estimate_q1(_sifted("0" * 8, "11000000", "00100000"), S) == 0.25
    assert estimate_q1(_sifted("0" * 8, "0" * 8, "1" * 8), S) == 1.0
    with pytest.raises(EstimationError):
        estimate_q1(_sifted("0" * 8, "0" * 8, "0" * 8), np.array([], dtype=np.int64))


def test_estimate_q2_examples():
    S = np.arange(4)
    assert estimate_q2(_sifted(alpha="0000", beta="0000", gamma="0000"), S) == 0.0
    assert estimate_q2(_sifted(alpha="0000", beta="1000", gamma="0000"), S) == 0.25
    assert estimate_q2(_sifted(alpha="0000", beta="1111", gamma="1111"), S) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40).flatmap(lambda n: st.lists(st.integers(0, 7), min_size=n, max_size=n)))
def test_q2_never_counts_double_errors(triples):
    t = np.array(triples)
    al, be, ga = (t >> 2) & 1, (t >> 1) & 1, t & 1
    s = _sifted(alpha=al, beta=be, gamma=ga)
    expected = sum(int((b != a) != (g != a)) for a, b, g in zip(al, be, ga)) / len(t)
    assert estimate_q2(s, np.arange(len(t))) == expected
    both = [i for i in range(len(t)) if be[i] != al[i] and ga[i] != al[i]]
    if both:
        assert estimate_q2(s, np.array(both)) == 0.0


@pytest.mark.parametrize("cfg", [
    SessionConfig(num_pulses=4096, seed=5),
    SessionConfig(num_pulses=8192, channel_bob=Depolarizing(0.02), channel_charlie=Depolarizing(0.02), seed=6),
    SessionConfig(num_pulses=4096, channel_bob=Depolarizing(0.05), seed=7),
    SessionConfig(num_pulses=4096, channel_bob=InterceptResend(), seed=8),
])
def test_replay_is_bit_identical(cfg):
    out, t = run_session(cfg)
    again = replay_session(cfg, Transcript.loads(t.dumps()))
    assert again.to_record() == out.to_record()
    assert Transcript.loads(t.dumps()).dumps() == t.dumps()


def test_noisy_completion_and_ground_truth():
    cfg = SessionConfig(num_pulses=8192, channel_bob=Depolarizing(0.02), channel_charlie=Depolarizing(0.02), seed=6)
    out, t = run_session(cfg)
    assert isinstance(out, Completed)
    assert out.key_length > 0
    rec = parse_record(out.to_record())
    assert rec["keys_agree"] == str(out.ground_truth_match.keys_agree).lower()
    assert out.rate == pytest.approx(key_rate(out.q1, out.q2))


def test_key_bits_never_appear_on_transcript():
    cfg = SessionConfig(num_pulses=4096, seed=9)
    from confqkd.protocol import _make_rngs, transmit
    out, t = run_session(cfg)
    s = sift(transmit(cfg, _make_rngs(cfg)))
    S = [int(i) for i in t.find("SUBSET")[0].payload.split(",")]
    keep = complement(s.a.len, np.array(S))
    # sample messages carry exactly the sampled positions, nothing from the kept block
    for m in t.find("SAMPLE_BITS"):
        if m.step == 7:
            assert len(m.payload) == len(S)
    assert not set(S) & set(keep.tolist())
    # under the rate-1 code the syndrome is empty and the key equals the kept bits
    assert t.one("SYNDROME") == ""
    assert out.key_alice == s.a[keep]


def test_config_errors_are_not_aborts():
    with pytest.raises(ConfigError):
        run_session(SessionConfig(codes=()))
    with pytest.raises(ConfigError):
        run_session(SessionConfig(seeds={r: 1 for r in ROLES}))
    with pytest.raises(ConfigError):
        run_session(SessionConfig(num_pulses=0))
    with pytest.raises(ConfigError):
        run_session(SessionConfig(codes=("nonsense_3",)))


def test_explicit_role_seeds():
    seeds = {r: i + 100 for i, r in enumerate(ROLES)}
    a, _ = run_session(SessionConfig(num_pulses=1024, seeds=seeds))
    b, _ = run_session(SessionConfig(num_pulses=1024, seeds=seeds, seed=999))
    assert a.to_record() == b.to_record()
