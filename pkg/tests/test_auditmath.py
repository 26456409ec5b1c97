import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vvote import auditmath as am
from vvote.errors import ParameterError

probs = st.floats(min_value=0.001, max_value=0.999)
counts = st.integers(min_value=1, max_value=2000)


def posterior_oracle(q, r, F):
    # Bayes over the two hypotheses, in exact rationals
    q, r = Fraction(q), Fraction(r)
    miss = (1 - r) ** F
    return float(q * miss / (q * miss + (1 - q)))


def test_posterior_matches_bayes_oracle():
    for q, r, F in [(0.05, 0.03, 100), (0.5, 0.01, 10), (0.2, 0.1, 7)]:
        assert am.posterior(q, r, F) == pytest.approx(posterior_oracle(q, r, F), rel=1e-12)


def test_edge_values():
    assert am.posterior(0.0, 0.1, 100) == 0.0
    assert am.posterior(1.0, 0.5, 100) == 1.0
    assert am.posterior(0.3, 0.0, 100) == pytest.approx(0.3)
    assert am.prob_pass_exact(100, 0, 5) == 1.0
    assert am.prob_pass_exact(100, 96, 5) == 0.0
    assert am.required_rate(0.001, 100, 0.99).rate == 0.0
    assert not am.required_rate(1.0, 100, 0.99).feasible
    assert not am.required_rate(0.5, 0, 0.99).feasible
    with pytest.raises(ParameterError):
        am.posterior(1.5, 0.1, 10)
    with pytest.raises(ParameterError):
        am.required_rate(0.1, 10, 1.0)
    with pytest.raises(ParameterError):
        am.prob_pass_exact(10, 11, 1)


def test_exact_product_against_binomial_ratio():
    # C(N-F, S) / C(N, S)
    for N, S, F in [(100, 10, 5), (261, 30, 3), (50, 49, 1)]:
        oracle = math.comb(N - F, S) / math.comb(N, S)
        assert am.prob_pass_exact(N, S, F) == pytest.approx(oracle, rel=1e-12)


def test_exact_approaches_approximation_for_large_population():
    assert am.prob_pass_exact(10**6, 10**5, 50) == pytest.approx(am.prob_pass_approx(0.1, 50), rel=1e-3)


def test_exact_probability_by_simulation():
    rng = random.Random(7)
    N, S, F, trials = 40, 8, 3, 20000
    miss = sum(not any(x < F for x in rng.sample(range(N), S)) for _ in range(trials))
    p = am.prob_pass_exact(N, S, F)
    assert abs(miss / trials - p) < 4 * math.sqrt(p * (1 - p) / trials)


@given(q=probs, r1=probs, r2=probs, F=counts)
def test_posterior_decreases_in_rate(q, r1, r2, F):
    lo, hi = sorted((r1, r2))
    assert am.posterior(q, hi, F) <= am.posterior(q, lo, F) + 1e-15


@given(q=st.floats(min_value=0.01, max_value=0.99), F=st.integers(min_value=1, max_value=1000), c=st.floats(min_value=0.5, max_value=0.999))
def test_required_rate_is_the_least_rate_meeting_the_target(q, F, c):
    res = am.required_rate(q, F, c)
    assert res.feasible
    target = 1 - c
    assert am.posterior(q, res.rate, F) <= target * (1 + 1e-9)
    if res.rate > 1e-6:
        assert am.posterior(q, res.rate * (1 - 1e-3), F) > target
    bis = am.solve_rate(lambda r: am.posterior(q, r, F), target)
    assert bis.rate == pytest.approx(res.rate, abs=1e-8)


@given(F1=counts, F2=counts, c=st.floats(min_value=0.5, max_value=0.999))
def test_no_prior_rate_decreases_in_fraud_count(F1, F2, c):
    lo, hi = sorted((F1, F2))
    assert am.required_rate_no_prior(hi, c) <= am.required_rate_no_prior(lo, c) + 1e-15


def test_exact_rate_is_at_least_as_small_as_approx():
    # sampling without replacement never needs a larger sample
    for N, F, c in [(1000, 10, 0.95), (261, 5, 0.99)]:
        assert am.required_rate_exact(N, F, c).rate <= am.required_rate_no_prior(F, c) + 1 / N


def test_combine_stages_bound():
    comb = am.combine_stages([(0.1, 5), (0.25, 3)])
    assert comb.miss_probability == pytest.approx(0.9**5 * 0.75**3)
    assert comb.weakest_rate == 0.1 and comb.bound == pytest.approx(0.9**8)
    assert comb.miss_probability <= comb.bound
    with pytest.raises(ParameterError):
        am.combine_stages([])


def test_tables_written(tmp_path):
    files = am.emit_tables(tmp_path, delimiter=";")
    assert len(files) == 6
    rows = (tmp_path / "posterior_F100.csv").read_text().splitlines()
    assert rows[0].startswith("q;") and len(rows) == 1 + len(am.PRIORS)
