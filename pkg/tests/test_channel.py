"""Channel-model tests: LoS probability models, dispatch, fading."""

import math

import numpy as np
import pytest
from scipy import stats

from aeronet.channel import (
    ChannelClass,
    Environment,
    FadingParams,
    LosModel,
    PathlossParams,
    los_probability_a2a,
    los_probability_a2g,
    los_probability_exact,
    sample_fading,
)
from aeronet.errors import DomainError
from aeronet.numerics import gaussian_q

ENV = Environment()  # dense-urban defaults: mu=0.5, nu=3e-4, xi=20


def exact_oracle(env, h_rx, h_tx, x):
    """Term-by-term re-evaluation of the building-crossing product."""
    h = abs(h_rx - h_tx)
    r2 = max(x * x - h * h, 0.0)
    m = math.floor(math.sqrt(r2 * env.mu * env.nu) - 1.0)
    if m < 0:
        return 1.0
    prod = 1.0
    top = max(h_rx, h_tx)
    for n in range(m + 1):
        peak = top - (n + 0.5) * h / (m + 1)
        prod *= 1.0 - math.exp(-(peak**2) / (2.0 * env.xi**2))
    return prod


class TestExactModel:
    def test_ground_to_ground_is_nlos(self):
        assert los_probability_exact(ENV, 0.0, 0.0, 50.0) == 0.0

    def test_empty_product(self):
        # x equal to the altitude gap crosses no buildings.
        assert los_probability_exact(ENV, 0.0, 40.0, 40.0) == 1.0

    def test_matches_term_by_term_oracle(self):
        h_tx, r = 40.0, 100.0
        x = math.hypot(r, h_tx)
        val = los_probability_exact(ENV, 0.0, h_tx, x)
        assert val == pytest.approx(exact_oracle(ENV, 0.0, h_tx, x), rel=1e-12)

    def test_below_altitude_gap_rejected(self):
        with pytest.raises(DomainError):
            los_probability_exact(ENV, 0.0, 40.0, 30.0)


class TestA2GModel:
    def test_vertical_link(self):
        # Elevation 90 degrees: the sigmoid is essentially saturated.
        val = los_probability_a2g(ENV, 0.0, 100.0, 100.0)
        direct = 1.0 / (1.0 + ENV.iota * math.exp(-ENV.kappa * (90.0 - ENV.iota)))
        assert val == pytest.approx(direct, rel=1e-12)
        assert val >= 0.99

    def test_far_field_floor(self):
        # Elevation -> 0: the sigmoid floor 1/(1 + iota exp(kappa iota)).
        floor = 1.0 / (1.0 + ENV.iota * math.exp(ENV.kappa * ENV.iota))
        assert los_probability_a2g(ENV, 0.0, 100.0, 1e9) == pytest.approx(floor, rel=1e-4)

    def test_monotone_in_range(self):
        h = 40.0
        near = los_probability_a2g(ENV, 0.0, h, math.hypot(100.0, h))
        far = los_probability_a2g(ENV, 0.0, h, math.hypot(500.0, h))
        assert near > far

    def test_needs_one_ground_endpoint(self):
        with pytest.raises(DomainError):
            los_probability_a2g(ENV, 10.0, 100.0, 150.0)
        with pytest.raises(DomainError):
            los_probability_a2g(ENV, 0.0, 0.0, 150.0)


class TestA2AModel:
    def test_zero_distance_equal_altitude(self):
        assert los_probability_a2a(ENV, 100.0, 100.0, 0.0) == 1.0

    def test_equal_altitude_unit_exponent(self):
        # h = xi = 20 and x = 1/sqrt(nu mu): (1 - e^-0.5)^1.
        x = 1.0 / math.sqrt(ENV.nu * ENV.mu)
        val = los_probability_a2a(ENV, 20.0, 20.0, x)
        assert val == pytest.approx(1.0 - math.exp(-0.5), rel=1e-12)

    def test_unequal_altitude_vs_q_oracle(self):
        h_rx, h_tx, r = 20.0, 60.0, 200.0
        h = abs(h_rx - h_tx)
        x = math.hypot(r, h)
        base = 1.0 - math.sqrt(2.0 * math.pi) * ENV.xi / h * abs(
            gaussian_q(h_rx / ENV.xi) - gaussian_q(h_tx / ENV.xi)
        )
        oracle = base ** math.sqrt((x * x - h * h) * ENV.nu * ENV.mu)
        assert los_probability_a2a(ENV, h_rx, h_tx, x) == pytest.approx(oracle, rel=1e-12)

    def test_needs_both_airborne(self):
        with pytest.raises(DomainError):
            los_probability_a2a(ENV, 0.0, 100.0, 150.0)


class TestDispatcher:
    def test_modes(self):
        model = LosModel(ENV)
        # ground-ground, A2G, and A2A branches
        assert model.los_prob(0.0, 0.0, 10.0) == 0.0
        assert model.los_prob(0.0, 100.0, 120.0) == los_probability_a2g(ENV, 0.0, 100.0, 120.0)
        assert model.los_prob(50.0, 100.0, 120.0) == los_probability_a2a(ENV, 50.0, 100.0, 120.0)

    def test_exact_override_on_a2g_geometry(self):
        model = LosModel(ENV, mode="exact")
        x = math.hypot(150.0, 40.0)
        assert model.los_prob(0.0, 40.0, x) == los_probability_exact(ENV, 0.0, 40.0, x)

    def test_constant_mode(self):
        model = LosModel(ENV, mode="constant", constant_los=0.3)
        assert model.los_prob(0.0, 100.0, 500.0) == 0.3

    def test_classes_sum_to_one(self):
        model = LosModel(ENV)
        for h_tx, x in ((40.0, 120.0), (100.0, 300.0), (250.0, 260.0)):
            total = model.prob(ChannelClass.LOS, 0.0, h_tx, x) + model.prob(
                ChannelClass.NLOS, 0.0, h_tx, x
            )
            assert total == pytest.approx(1.0, abs=1e-15)

    def test_unknown_mode_rejected(self):
        with pytest.raises(DomainError):
            LosModel(ENV, mode="fancy")


class TestProbabilityRange:
    def test_randomized_grid(self):
        rng = np.random.default_rng(11)
        model = LosModel(ENV)
        exact = LosModel(ENV, mode="exact")
        for _ in range(10_000 // 4):
            h_rx = rng.choice([0.0, rng.uniform(1.0, 300.0)])
            h_tx = rng.choice([0.0, rng.uniform(1.0, 300.0)])
            if h_rx == 0.0 and h_tx == 0.0:
                h_tx = 50.0
            x = abs(h_rx - h_tx) + rng.uniform(0.0, 2000.0)
            for m in (model, exact):
                p = m.los_prob(h_rx, h_tx, x)
                assert 0.0 <= p <= 1.0

    def test_monotone_in_horizontal_distance(self):
        model = LosModel(ENV)
        for h_rx, h_tx in ((0.0, 60.0), (0.0, 200.0), (100.0, 100.0), (40.0, 160.0)):
            h = abs(h_rx - h_tx)
            r = np.linspace(1.0, 2000.0, 100)
            x = np.hypot(r, h)
            vals = np.array([model.los_prob(h_rx, h_tx, xv) for xv in x])
            assert np.all(np.diff(vals) <= 1e-12)

    def test_sigmoid_tracks_exact_product(self):
        # Approximation sanity on the fitted environment: mean absolute
        # deviation between the sigmoid and the building product.
        h_tx = 40.0
        r = np.linspace(10.0, 1000.0, 200)
        x = np.hypot(r, h_tx)
        sig = np.array([los_probability_a2g(ENV, 0.0, h_tx, xv) for xv in x])
        exact = np.array([los_probability_exact(ENV, 0.0, h_tx, xv) for xv in x])
        assert np.mean(np.abs(sig - exact)) <= 0.1


class TestFading:
    def test_unit_mean(self):
        rng = np.random.default_rng(3)
        draws = sample_fading(ChannelClass.NLOS, FadingParams(), rng, size=1_000_000)
        assert 0.997 <= draws.mean() <= 1.003

    def test_m3_variance(self):
        rng = np.random.default_rng(4)
        draws = sample_fading(ChannelClass.LOS, FadingParams(m_los=3), rng, size=1_000_000)
        assert draws.var() == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_determinism(self):
        a = sample_fading(ChannelClass.LOS, FadingParams(m_los=3), np.random.default_rng(9), size=100)
        b = sample_fading(ChannelClass.LOS, FadingParams(m_los=3), np.random.default_rng(9), size=100)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("m", [1, 3])
    def test_gamma_distribution_ks(self, m):
        rng = np.random.default_rng(100 + m)
        fading = FadingParams(m_los=m)
        draws = sample_fading(ChannelClass.LOS, fading, rng, size=100_000)
        ks = stats.kstest(draws, stats.gamma(a=m, scale=1.0 / m).cdf).statistic
        assert ks <= 0.01

    def test_nlos_pinned_to_rayleigh(self):
        with pytest.raises(DomainError):
            FadingParams(m_nlos=2)


class TestParamValidation:
    def test_environment_bounds(self):
        with pytest.raises(DomainError):
            Environment(mu=1.5)
        with pytest.raises(DomainError):
            Environment(xi=0.0)

    def test_pathloss_bounds(self):
        with pytest.raises(DomainError):
            PathlossParams(alpha_los=1.5)
        with pytest.raises(DomainError):
            PathlossParams(alpha_los=3.0, alpha_nlos=2.5)
