import math

import pytest

import oracles


def test_sift_grid():
    total, per_basis = oracles.sift_probabilities()
    assert total == oracles.FROZEN["sift_total"]
    assert per_basis == oracles.FROZEN["sift_per_basis"]


@pytest.mark.parametrize("p", [0.0, 0.02, 0.05, 0.1, 0.2, 0.6, 1.0])
def test_depolarizing_error_is_half_p(p):
    assert oracles.depolarizing_error_probability(p) == pytest.approx(p / 2, abs=1e-15)


@pytest.mark.parametrize("p", [0.02, 0.05, 0.1, 0.2])
def test_exactly_one_closed_form(p):
    e = oracles.depolarizing_error_probability(p)
    assert oracles.exactly_one_probability(e, e) == pytest.approx(p * (1 - p / 2), abs=1e-15)


def test_intercept_resend_quarter():
    assert oracles.intercept_resend_error_probability() == pytest.approx(oracles.FROZEN["intercept_resend_error"], abs=1e-15)


def test_max_binomial_reduces_to_binomial_when_one_side_is_clean():
    mean, var = oracles.max_binomial_moments(40, 0.25, 0.0)
    assert mean == pytest.approx(0.25)
    assert var == pytest.approx(0.25 * 0.75 / 40)


def test_max_binomial_is_biased_upward():
    mean, _ = oracles.max_binomial_moments(512, 0.05, 0.05)
    assert mean > 0.05


def test_hamming_failure_value():
    assert oracles.hamming_word_failure(0.05) == pytest.approx(oracles.FROZEN["hamming_failure_q05"], abs=1e-8)


def test_subspace_count():
    assert oracles.gaussian_binomial(4, 2) == oracles.FROZEN["subspaces_4_2"]


def test_entropy_value():
    h = -0.11 * math.log2(0.11) - 0.89 * math.log2(0.89)
    assert h == pytest.approx(oracles.FROZEN["entropy_011"], abs=1e-8)
