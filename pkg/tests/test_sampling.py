"""Conditioned rejection sampling and KL-Chernoff intervals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qecbound.errorspace import VisitedSet, unrank_position, weight
from qecbound.polynomial import BoundAccumulators, MintermEvaluator
from qecbound.sampling import (
    ConfidenceInterval,
    RejectionGuardExceeded,
    kl_confidence_interval,
    probabilistic_bounds,
    sample_unseen,
    sample_unseen_batch,
)


def test_samples_avoid_visited_set():
    n = 6
    v = (0.3,) * n
    visited = VisitedSet(n)
    for pos in range(20):
        visited.add(unrank_position(pos, n))
    rng = np.random.default_rng(0)
    samples = sample_unseen_batch(v, visited, rng, 500)
    assert len(samples) == 500
    assert all(s not in visited for s in samples)


def test_sample_distribution_matches_conditional():
    """Empirical frequencies track p(e)/p(unseen) for a small space."""
    n = 4
    v = (0.25, 0.1, 0.4, 0.3)
    visited = VisitedSet(n)
    for pos in range(5):  # weights 0 and 1 visited
        visited.add(unrank_position(pos, n))
    rng = np.random.default_rng(42)
    samples = sample_unseen_batch(v, visited, rng, 40_000)
    ev = MintermEvaluator(v)
    unseen = [e for e in range(1 << n) if e not in visited]
    z = sum(ev(e) for e in unseen)
    counts = {e: 0 for e in unseen}
    for s in samples:
        counts[s] += 1
    for e in unseen:
        expect = ev(e) / z
        got = counts[e] / len(samples)
        assert abs(got - expect) < 5 * math.sqrt(expect * (1 - expect) / len(samples)) + 1e-3


def test_single_sample_helper():
    n = 4
    visited = VisitedSet(n)
    visited.add(0)
    s = sample_unseen(None, (0.2,) * n, visited, 3)
    assert s != 0


def test_rejection_guard_trips_when_space_nearly_exhausted():
    n = 3
    v = (0.01,) * n
    visited = VisitedSet(n)
    for pos in range(7):  # everything but the all-ones string
        visited.add(unrank_position(pos, n))
    rng = np.random.default_rng(1)
    with pytest.raises(RejectionGuardExceeded):
        sample_unseen_batch(v, visited, rng, 10, guard=50_000)


def test_guard_resets_on_acceptance():
    # acceptance rate ~ 9%; far more than guard draws total, but never
    # `guard` consecutive rejections
    n = 8
    v = (0.3,) * n
    visited = VisitedSet(n)
    for pos in range(37):  # weights 0..2
        visited.add(unrank_position(pos, n))
    rng = np.random.default_rng(2)
    samples = sample_unseen_batch(v, visited, rng, 2000, guard=2000)
    assert len(samples) == 2000


def test_kl_interval_contains_estimate():
    ci = kl_confidence_interval(0.3, 1000, 0.01)
    assert 0.0 < ci.lower < 0.3 < ci.upper < 1.0


def test_kl_interval_closed_forms():
    n, alpha = 1000, 0.01
    ci0 = kl_confidence_interval(0.0, n, alpha)
    assert ci0.lower == 0.0
    assert abs(ci0.upper - (1.0 - (alpha / 2) ** (1.0 / n))) < 1e-12
    ci1 = kl_confidence_interval(1.0, n, alpha)
    assert ci1.upper == 1.0
    assert abs(ci1.lower - (alpha / 2) ** (1.0 / n)) < 1e-12


def test_kl_interval_endpoints_satisfy_divergence_equation():
    theta, n, alpha = 0.07, 5000, 0.01
    ci = kl_confidence_interval(theta, n, alpha)
    target = math.log(2.0 / alpha) / n

    def kl(p, q):
        return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))

    assert abs(kl(theta, ci.lower) - target) < 1e-6
    assert abs(kl(theta, ci.upper) - target) < 1e-6


@given(
    st.floats(0.001, 0.999),
    st.integers(10, 100_000),
    st.floats(0.001, 0.2),
)
@settings(max_examples=80, deadline=None)
def test_kl_interval_properties(theta, n, alpha):
    ci = kl_confidence_interval(theta, n, alpha)
    assert 0.0 <= ci.lower <= theta <= ci.upper <= 1.0
    # width shrinks with more samples
    wider = kl_confidence_interval(theta, max(1, n // 4), alpha)
    assert wider.upper - wider.lower >= ci.upper - ci.lower - 1e-9
    # smaller alpha widens
    stricter = kl_confidence_interval(theta, n, alpha / 10)
    assert stricter.lower <= ci.lower + 1e-9
    assert stricter.upper >= ci.upper - 1e-9


def test_probabilistic_bounds_nest_inside_sound_interval():
    v = (0.01,) * 3
    ev = MintermEvaluator(v)
    acc = BoundAccumulators()
    logical = {0b111, 0b011, 0b110, 0b101}
    for m in [0b000, 0b001, 0b010, 0b100]:
        acc.accumulate(m, m in logical, ev)
    ci = kl_confidence_interval(0.5, 100, 0.01)
    lo, hi, alpha = probabilistic_bounds(acc, ci)
    assert alpha == 0.01
    sound_lo = acc.sum_l.total
    sound_hi = 1.0 - (acc.sum_s.total - acc.sum_l.total)
    assert sound_lo <= lo <= hi <= sound_hi + 1e-15


def test_replay_determinism():
    n = 6
    v = (0.2,) * n
    visited = VisitedSet(n)
    visited.add(0)
    a = sample_unseen_batch(v, visited, np.random.default_rng(99), 200)
    b = sample_unseen_batch(v, visited, np.random.default_rng(99), 200)
    assert a == b
