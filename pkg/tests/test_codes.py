import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from confqkd.codes import (
    LIBRARY,
    CodePair,
    LinearCode,
    binary_entropy,
    block_code,
    code_from_text,
    code_to_text,
    coset_key,
    decode_to_coset,
    direct_sum,
    estimate_failure,
    get_code,
    key_rate,
    random_subcode,
    reconcile,
    select_code,
    subcode_dimension,
    syndrome,
)
from confqkd.errors import CapacityError, CodeSelectionError, DimensionError, DomainError, ReconciliationError
from confqkd.gf2 import BitMatrix, BitVector, all_subspaces, all_vectors, rank, row_reduce, span

import oracles

HAMMING = get_code("hamming_7_4")


@pytest.mark.parametrize("name,n,k,d", [
    ("hamming_7_4", 7, 4, 3),
    ("extended_hamming_8_4", 8, 4, 4),
    ("golay_23_12", 23, 12, 7),
    ("extended_golay_24_12", 24, 12, 8),
    ("repetition_3_1", 3, 1, 3),
    ("repetition_5_1", 5, 1, 5),
    ("trivial_6", 6, 6, 1),
])
def test_library_parameters(name, n, k, d):
    c = get_code(name)
    assert (c.n, c.k) == (n, k)
    assert c.minimum_distance() == d
    assert gf2_zero(c.parity_check.entries @ c.generator.entries.T)


def gf2_zero(m):
    return not (np.asarray(m) % 2).any()


def test_unknown_code_name():
    with pytest.raises(KeyError):
        get_code("turbo_9_3")


def test_random_codes_are_reproducible():
    assert get_code("random_16_10_1").generator == get_code("random_16_10_1").generator
    assert get_code("random_16_10_1").generator != get_code("random_16_10_2").generator


def test_text_round_trip():
    for name in ("hamming_7_4", "golay_23_12"):
        c = get_code(name)
        back = code_from_text(code_to_text(c))
        assert back.generator == c.generator and back.name == c.name


def test_syndrome_examples():
    for v in HAMMING.codewords():
        assert syndrome(HAMMING, v).is_zero()
    e3 = BitVector.unit(7, 2)
    word = HAMMING.codewords()[5] + e3
    assert syndrome(HAMMING, word) == BitVector(HAMMING.parity_check.entries[:, 2])


def test_decode_examples():
    assert decode_to_coset(HAMMING, BitVector.zeros(3)).is_zero()
    for i in range(7):
        s = BitVector(HAMMING.parity_check.entries[:, i])
        assert decode_to_coset(HAMMING, s) == BitVector.unit(7, i)
    rep = get_code("repetition_3_1")
    s = BitVector("10")
    leader = decode_to_coset(rep, s)
    assert leader.weight() == 1 and syndrome(rep, leader) == s


@pytest.mark.parametrize("name", ["hamming_7_4", "repetition_3_1", "repetition_5_1", "extended_hamming_8_4"])
def test_decode_matches_brute_force(name):
    code = get_code(name)
    h = code.parity_check.entries
    for s in all_vectors(code.n - code.k):
        expected = oracles.brute_force_leader(h, s.bits)
        assert decode_to_coset(code, s) == BitVector(expected)


@pytest.mark.parametrize("name", ["hamming_7_4", "repetition_3_1", "repetition_5_1"])
def test_reconcile_within_radius_exhaustive(name):
    code = get_code(name)
    radius = (code.minimum_distance() - 1) // 2
    for a in code.codewords():
        s = syndrome(code, a)
        for w in range(radius + 1):
            for pos in itertools.combinations(range(code.n), w):
                e = np.zeros(code.n, dtype=np.uint8)
                e[list(pos)] = 1
                assert reconcile(a + BitVector(e), s, code) == a


def test_reconcile_arbitrary_words():
    # Alice's word need not be a codeword; the syndrome carries her coset
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = BitVector(rng.integers(0, 2, 7))
        i = int(rng.integers(0, 7))
        assert reconcile(a + BitVector.unit(7, i), syndrome(HAMMING, a), HAMMING) == a


def test_repetition_fails_on_weight_two():
    rep = get_code("repetition_3_1")
    for a in rep.codewords():
        for pos in itertools.combinations(range(3), 2):
            e = np.zeros(3, dtype=np.uint8)
            e[list(pos)] = 1
            assert reconcile(a + BitVector(e), syndrome(rep, a), rep) != a


def test_direct_sum_decodes_blockwise():
    code = direct_sum([(HAMMING, 3), (get_code("disclose_1"), 2)])
    assert (code.n, code.k) == (23, 12)
    a = BitVector(np.random.default_rng(0).integers(0, 2, 23))
    e = np.zeros(23, dtype=np.uint8)
    e[[1, 9, 16, 21, 22]] = 1
    assert reconcile(a + BitVector(e), syndrome(code, a), code) == a
    e[2] = 1
    assert reconcile(a + BitVector(e), syndrome(code, a), code) != a


def test_decode_table_capacity():
    with pytest.raises(CapacityError):
        LinearCode(BitMatrix(np.eye(3, 30, dtype=np.uint8), cols=30)).decode_table


def test_estimate_failure_hamming():
    rng = np.random.default_rng(1)
    est = estimate_failure(HAMMING, 0.05, 40000, rng)
    exact = oracles.hamming_word_failure(0.05)
    assert abs(est - exact) < 4 * np.sqrt(exact * (1 - exact) / 40000)


def test_select_code_examples():
    rng = np.random.default_rng(0)
    trivial = select_code(0.0, 64, 0.01, rng)
    assert trivial.k == trivial.n == 64 and trivial.parity_check.rows == 0
    # exact Hamming failure 0.0444 sits between these two targets
    assert select_code(0.05, 7, 0.08, rng, candidates=["hamming_7_4", "repetition_7_1"]).name.startswith("hamming")
    assert not select_code(0.05, 7, 0.02, rng, candidates=["hamming_7_4", "repetition_7_1"]).name.startswith("hamming")
    with pytest.raises(CodeSelectionError):
        select_code(0.49, 24, 0.01, rng)
    with pytest.raises(DomainError):
        select_code(0.6, 24, 0.01, rng)


def test_select_code_prefers_higher_rate():
    code = select_code(0.01, 512, 0.01, np.random.default_rng(2))
    assert code.rate > 0.5


def test_block_code_pads_with_disclosed_bits():
    c = block_code("golay_23_12", 50)
    assert (c.n, c.k) == (50, 24)


def test_random_subcode_extremes():
    rng = np.random.default_rng(0)
    p0 = random_subcode(HAMMING, 0, rng)
    assert p0.c2.k == 0 and p0.key_length == 4
    pk = random_subcode(HAMMING, 4, rng)
    assert pk.c2.k == 4 and pk.key_length == 0
    with pytest.raises(DimensionError):
        random_subcode(HAMMING, 5, rng)


def _subspace_key(pair):
    return row_reduce(pair.c2.generator).matrix


def test_random_subcode_uniform():
    # 35 two-dimensional subspaces of a 4-dimensional code
    rng = np.random.default_rng(7)
    counts = Counter(_subspace_key(random_subcode(HAMMING, 2, rng)) for _ in range(1000))
    assert len(counts) == oracles.gaussian_binomial(4, 2)
    assert stats.chisquare(list(counts.values())).pvalue > 0.01


def _pairs(c1):
    for g2 in all_subspaces(c1.k):
        yield CodePair.from_rows(c1, g2 @ c1.generator)


@pytest.mark.parametrize("name", [c for c in LIBRARY if get_code(c).k <= 6] + ["trivial_4", "extended_hamming_8_4"])
def test_coset_key_soundness(name):
    c1 = get_code(name)
    for pair in _pairs(c1):
        keys = {}
        for v in c1.codewords():
            k = coset_key(v, pair)
            assert k.len == pair.key_length == c1.k - pair.c2.k
            keys.setdefault(k, []).append(v)
        assert len(keys) == 2 ** pair.key_length
        for members in keys.values():
            assert len(members) == 2 ** pair.c2.k
            base = members[0]
            assert all(pair.c2.contains(m + base) for m in members)


def test_coset_key_zero_on_c2_and_checks_syndrome():
    pair = CodePair.from_rows(HAMMING, HAMMING.parity_check)
    for w in span(pair.c2.generator):
        assert coset_key(w, pair).is_zero()
    a = BitVector("1000000")
    with pytest.raises(ReconciliationError):
        coset_key(a, pair, announced=BitVector("000"))


def test_coset_key_on_non_codewords():
    # words in the same C1 coset and same C2 coset share a key
    pair = CodePair.from_rows(HAMMING, HAMMING.parity_check)
    x = BitVector("1000000")
    words = [x + v for v in HAMMING.codewords()]
    keys = Counter(coset_key(w, pair) for w in words)
    assert len(keys) == 2 and set(keys.values()) == {8}


def test_entropy_and_rate_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(oracles.FROZEN["entropy_011"], abs=1e-8)
    assert key_rate(0.0, 0.0) == 1.0
    assert key_rate(0.5, 0.0) == 0.0
    assert abs(key_rate(0.11, 0.11)) < 1e-3
    with pytest.raises(DomainError):
        key_rate(0.6, 0.0)
    assert subcode_dimension(100, 0.0) == 0
    assert subcode_dimension(100, 0.11) == 50


@given(st.floats(0.0, 1.0))
def test_entropy_symmetric(q):
    assert binary_entropy(q) == pytest.approx(binary_entropy(1.0 - q), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 4), st.integers(0, 2**16))
def test_key_length_property(dim2, seed):
    pair = random_subcode(HAMMING, dim2, np.random.default_rng(seed))
    assert pair.key_length == 4 - dim2
    assert rank(pair.c2.generator) == dim2
    assert all(HAMMING.contains(r) for r in pair.c2.generator.row_list())
