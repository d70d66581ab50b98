"""Tests for the special-function kernels.

Deep-tail reference values were frozen from 40-digit mpmath evaluations at
exactly representable double inputs; broad grids are cross-checked against
scipy.special, which uses an independent (Cephes/Boost) implementation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from dirtail import specfun as sf
from dirtail.errors import DomainError


class TestLogGamma:
    def test_exact_values(self):
        assert sf.log_gamma(1.0) == 0.0
        assert sf.log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
        assert sf.log_gamma(6.0) == pytest.approx(math.log(120.0), rel=1e-14)

    def test_wide_range_accuracy(self):
        for a in [1e-6, 1e-3, 0.1, 1.5, 20.0, 1e3, 1e6]:
            assert sf.log_gamma(a) == pytest.approx(sp.gammaln(a), rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.log_gamma(0.0)
        with pytest.raises(DomainError):
            sf.log_gamma(-1.5)


class TestGammaRatio:
    def test_examples(self):
        assert sf.gamma_ratio(5, 4) == pytest.approx(4.0, rel=1e-13)
        assert sf.gamma_ratio(1, 1) == 1.0
        # Gamma(2.5) = 1.5 * 0.5 * Gamma(0.5)
        assert sf.gamma_ratio(2.5, 0.5) == pytest.approx(0.75, rel=1e-13)

    def test_recurrence(self):
        for a in np.geomspace(0.5, 100.0, 25):
            assert abs(sf.gamma_ratio(a + 1.0, a) - a) / a <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.gamma_ratio(-1.0, 2.0)
        with pytest.raises(DomainError):
            sf.gamma_ratio(1.0, 0.0)


class TestBetaSurvival:
    def test_examples(self):
        assert sf.beta_survival(1, 1, 0.75) == pytest.approx(0.25, rel=1e-12)
        # int_{0.9}^{1} 2(1-t) dt = 0.01
        assert sf.beta_survival(1, 2, 0.9) == pytest.approx(0.01, rel=1e-10)
        assert sf.beta_survival(3.0, 4.0, 0.0) == 1.0
        assert sf.beta_survival(3.0, 4.0, 1.0) == 0.0

    def test_frozen_reference_values(self):
        # mpmath, 40 digits, inputs exactly representable as doubles
        cases = [
            (2, 3, 1 - 2.0**-40, -81.79136730607422863226),
            (5, 2, 1 - 2.0**-26, -33.33560322775137599732),
            (0.5, 0.5, 0.999999, -7.359337817590486301918),
            (1.5, 4.5, 0.3, -1.086801552566153917057),
        ]
        for a, b, x, want in cases:
            assert sf.log_beta_survival(a, b, x) == pytest.approx(want, rel=1e-13)
        assert sf.beta_survival(2.5, 3.5, 0.6) == pytest.approx(0.1803149341322161991729, rel=1e-12)

    def test_grid_against_scipy(self):
        rng = np.random.default_rng(7)
        a = rng.uniform(0.2, 25.0, 500)
        b = rng.uniform(0.2, 25.0, 500)
        x = rng.uniform(1e-3, 1.0 - 1e-3, 500)
        mine = sf.beta_survival(a, b, x)
        ref = sp.betainc(b, a, 1.0 - x)
        assert np.max(np.abs(mine - ref) / np.maximum(ref, 1e-280)) < 1e-10

    def test_symmetry_grid(self):
        grid = [0.3, 0.7, 1.0, 2.5, 8.0]
        for a in grid:
            for b in grid:
                for x in [0.05, 0.37, 0.5, 0.93]:
                    total = sf.beta_survival(a, b, x) + sf.beta_survival(b, a, 1.0 - x)
                    assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.3, 20), b=st.floats(0.3, 20), x=st.floats(0.01, 0.99))
    def test_symmetry_property(self, a, b, x):
        total = sf.beta_survival(a, b, x) + sf.beta_survival(b, a, 1.0 - x)
        assert abs(total - 1.0) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.beta_survival(0.0, 1.0, 0.5)
        with pytest.raises(DomainError):
            sf.beta_survival(1.0, 1.0, 1.5)
        with pytest.raises(DomainError):
            sf.beta_survival(1.0, 1.0, -0.1)


class TestBetaPowerSurvival:
    def test_examples(self):
        # P(B^2 > 0.81) = P(B > 0.9) for uniform B
        assert sf.beta_power_survival(1, 1, 2, 0.81) == pytest.approx(0.1, rel=1e-12)
        assert sf.beta_power_survival(1, 1, 3.7, 0.0) == 1.0
        for x in [0.1, 0.5, 0.9]:
            assert sf.beta_power_survival(2, 3, 1, x) == pytest.approx(
                sf.beta_survival(2, 3, x), rel=1e-13)

    def test_near_one_tail_constant(self):
        # P(B_{a,b}^p > 1-u) / [Gamma(a+b)/(p^b Gamma(a) Gamma(b+1)) u^b] -> 1
        # monotonically as u decreases
        for a, b, p in [(1.0, 1.0, 2.0), (2.0, 3.0, 0.5), (1.5, 0.7, 3.0)]:
            log_c = (sf.log_gamma(a + b) - b * math.log(p) - sf.log_gamma(a)
                     - sf.log_gamma(b + 1.0))
            ratios = []
            for u in [1e-3, 1e-4, 1e-5]:
                log_asym = log_c + b * math.log(u)
                ratios.append(math.exp(sf.log_beta_power_survival(a, b, p, 1.0 - u) - log_asym))
            gaps = [abs(r - 1.0) for r in ratios]
            assert gaps[0] > gaps[1] > gaps[2]
            assert gaps[2] < 1e-3


class TestGammaTails:
    def test_frozen_reference_values(self):
        cases = [
            (2, 200.0, -194.6966950919409242489),
            (0.5, 700.0, -703.8486181251223174112),
            (3.5, 50.0, -41.37068424595460782774),
            (1e-3, 30.0, -40.33675213617636520012),
            (100, 180.0, -24.24720913580772107184),
        ]
        for a, x, want in cases:
            assert sf.log_regularized_gamma_upper(a, x) == pytest.approx(want, rel=1e-13)
        assert sf.regularized_gamma_upper(2.5, 3.7) == pytest.approx(
            0.1925504330793957314981, rel=1e-12)

    def test_grid_against_scipy(self):
        rng = np.random.default_rng(11)
        a = rng.uniform(0.2, 60.0, 500)
        x = rng.uniform(0.0, 150.0, 500)
        mine = sf.regularized_gamma_upper(a, x)
        ref = sp.gammaincc(a, x)
        assert np.max(np.abs(mine - ref) / np.maximum(ref, 1e-280)) < 1e-10

    def test_closed_forms(self):
        # shape 1 is the exponential law
        for x in [0.1, 1.0, 30.0, 500.0]:
            assert sf.log_regularized_gamma_upper(1.0, x) == pytest.approx(-x, rel=1e-13)
        # shape 2: (1+x) e^{-x}
        for x in [0.5, 5.0, 40.0]:
            want = math.log1p(x) - x
            assert sf.log_regularized_gamma_upper(2.0, x) == pytest.approx(want, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.log_regularized_gamma_upper(-1.0, 2.0)
        with pytest.raises(DomainError):
            sf.log_regularized_gamma_upper(2.0, -1.0)


class TestLogHelpers:
    def test_logsumexp_basic(self):
        vals = [math.log(0.25), math.log(0.5), math.log(0.125)]
        assert sf.logsumexp(vals) == pytest.approx(math.log(0.875), rel=1e-14)

    def test_logsumexp_all_neginf(self):
        assert sf.logsumexp([-math.inf, -math.inf]) == -math.inf

    def test_logsumexp_no_overflow(self):
        assert sf.logsumexp([-1e5, -1e5 + 1.0]) == pytest.approx(
            -1e5 + math.log(1 + math.e), rel=1e-12)

    def test_log1mexp(self):
        assert sf.log1mexp(-1e-10) == pytest.approx(math.log(1e-10), abs=1e-6)
        assert sf.log1mexp(-50.0) == pytest.approx(math.log1p(-math.exp(-50.0)), abs=1e-15)
        assert sf.log1mexp(0.0) == -math.inf
        with pytest.raises(DomainError):
            sf.log1mexp(0.5)

    def test_logprob_value(self):
        assert sf.LogProb(-2.0).value == pytest.approx(math.exp(-2.0))
        assert sf.LogProb(-math.inf).value == 0.0
