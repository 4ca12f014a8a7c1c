"""Independent reference computations used by the tests.

Nothing here imports the package under test: states, channels and
binomial statistics are rebuilt from scratch with numpy and scipy.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import stats

_S = 1 / math.sqrt(2)
KETS = {
    (0, 0): np.array([1.0, 0.0]),
    (0, 1): np.array([0.0, 1.0]),
    (1, 0): np.array([_S, _S]),
    (1, 1): np.array([_S, -_S]),
}


def _proj(basis, bit):
    k = KETS[(basis, bit)]
    return np.outer(k, k)


def _prob(rho, basis, bit):
    return float(np.trace(_proj(basis, bit) @ rho).real)


def depolarizing_error_probability(p: float) -> float:
    """P(matching-basis outcome != sent bit) after Depolarizing(p), by enumeration."""
    total = 0.0
    for basis, bit in itertools.product((0, 1), repeat=2):
        rho = _proj(basis, bit)
        for hit, weight in ((True, p), (False, 1 - p)):
            out = 0.5 * np.eye(2) if hit else rho
            total += 0.25 * weight * _prob(out, basis, 1 - bit)
    return total


def intercept_resend_error_probability() -> float:
    """Enumerate Alice state x Eve basis x Eve outcome x receiver outcome."""
    total = 0.0
    for basis, bit in itertools.product((0, 1), repeat=2):
        rho = _proj(basis, bit)
        for eve_basis in (0, 1):
            for eve_bit in (0, 1):
                p_eve = _prob(rho, eve_basis, eve_bit)
                total += 0.25 * 0.5 * p_eve * _prob(_proj(eve_basis, eve_bit), basis, 1 - bit)
    return total


def sift_probabilities() -> tuple[float, float]:
    """(retained fraction, per-basis fraction) over the basis-choice grid."""
    keep = {0: 0.0, 1: 0.0}
    for a, b, c in itertools.product((0, 1), repeat=3):
        if a == b == c:
            keep[a] += 1 / 8
    return keep[0] + keep[1], keep[0]


def exactly_one_probability(e_bob: float, e_charlie: float) -> float:
    return e_bob * (1 - e_charlie) + e_charlie * (1 - e_bob)


def max_binomial_moments(m: int, e1: float, e2: float) -> tuple[float, float]:
    """Mean and variance of max(B1, B2)/m, B_i ~ Bin(m, e_i) independent."""
    k = np.arange(m + 1)
    cdf = stats.binom.cdf(k, m, e1) * stats.binom.cdf(k, m, e2)
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    mean = float((k * pmf).sum()) / m
    second = float((k**2 * pmf).sum()) / m**2
    return mean, second - mean**2


def binomial_fraction_moments(m: int, e: float) -> tuple[float, float]:
    return e, e * (1 - e) / m


def hamming_word_failure(q: float) -> float:
    return 1 - (1 - q) ** 7 - 7 * q * (1 - q) ** 6


def brute_force_leader(h: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Lexicographically smallest minimum-weight x with hx = s, by exhaustion."""
    n = h.shape[1]
    best = None
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits, dtype=np.uint8)
        if np.array_equal(h.astype(int) @ x % 2, s):
            key = (int(x.sum()), bits)
            if best is None or key < best[0]:
                best = (key, x)
    return best[1]


def gaussian_binomial(n: int, k: int) -> int:
    """Number of k-dimensional subspaces of GF(2)^n."""
    num = den = 1
    for i in range(k):
        num *= 2 ** (n - i) - 1
        den *= 2 ** (k - i) - 1
    return num // den


# Closed forms these enumerations must reproduce; checked in test_oracles.py.
FROZEN = {
    "sift_total": 0.25,
    "sift_per_basis": 0.125,
    "intercept_resend_error": 0.25,
    "hamming_failure_q05": 0.04438054,
    "subspaces_4_2": 35,
    "entropy_011": 0.49991596,
}
