"""Simulator self-tests: PPP sampling, determinism, degenerate regimes."""

import math

import numpy as np
import pytest

from aeronet.channel import ChannelClass
from aeronet.errors import DomainError
from aeronet.interference import LinkEvent
from aeronet.montecarlo import (
    SimSpec,
    default_window_radius,
    empirical_laplace,
    run_trials,
    sample_ppp_disk,
)
from aeronet.netconfig import AssociationRule, LayerSpec, NetworkConfig, validate

RN = AssociationRule.from_tag("rn")
TS = AssociationRule.from_tag("ts")


def a2g_config(h=100.0, density=1e-5, beta=0.7, sigma2=0.0):
    return validate(
        NetworkConfig(
            layers=(
                LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
                LayerSpec(altitude=h, density_rx=0.0, density_tx=density),
            ),
            target_sinr=beta,
            noise_power=sigma2,
        )
    )


class TestSamplePpp:
    def test_zero_density(self):
        pts = sample_ppp_disk(0.0, 1000.0, np.random.default_rng(0))
        assert pts.shape == (0, 2)

    def test_determinism(self):
        a = sample_ppp_disk(1e-5, 5000.0, np.random.default_rng(5))
        b = sample_ppp_disk(1e-5, 5000.0, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_mean_count(self):
        lam, radius = 1e-5, 5000.0
        rng = np.random.default_rng(6)
        counts = [len(sample_ppp_disk(lam, radius, rng)) for _ in range(10_000)]
        expected = lam * math.pi * radius * radius
        stderr = math.sqrt(expected / 10_000)
        assert abs(np.mean(counts) - expected) <= 3.0 * stderr

    def test_points_inside_disk(self):
        pts = sample_ppp_disk(1e-4, 2000.0, np.random.default_rng(7))
        assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 2000.0)

    def test_negative_density_rejected(self):
        with pytest.raises(DomainError):
            sample_ppp_disk(-1.0, 100.0, np.random.default_rng(0))


class TestRunTrials:
    def test_seed_determinism(self):
        cfg = a2g_config()
        spec = SimSpec(trials=500, seed=123)
        a = run_trials(cfg, RN, spec)
        b = run_trials(cfg, RN, spec)
        assert np.array_equal(a.sinr, b.sinr)
        assert np.array_equal(a.layer, b.layer)
        assert a.stp() == b.stp()

    def test_tiny_beta_always_succeeds(self):
        cfg = a2g_config(beta=1e-12)
        res = run_trials(cfg, RN, SimSpec(trials=500, seed=1))
        assert res.stp() == 1.0

    def test_main_distance_respects_altitude(self):
        cfg = a2g_config(h=100.0)
        res = run_trials(cfg, RN, SimSpec(trials=500, seed=2))
        assert np.all(res.distance >= 100.0)

    def test_association_frequencies_cover_everything(self):
        cfg = a2g_config()
        res = run_trials(cfg, RN, SimSpec(trials=2000, seed=3))
        total = sum(
            res.association_frequency(k, c) for k in (0, 1) for c in ChannelClass
        )
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_transmitter_oriented_runs(self):
        cfg = a2g_config()
        res = run_trials(cfg, TS, SimSpec(trials=500, seed=4, typical_node_layer=1))
        assert len(res.sinr) > 0
        assert np.all(res.layer == 0)  # the only receiver layer

    def test_rows_format(self):
        cfg = a2g_config()
        res = run_trials(cfg, RN, SimSpec(trials=50, seed=5))
        rows = list(res.rows())
        assert len(rows) == len(res.sinr)
        trial, layer, cls, dist, sinr, success = rows[0]
        assert cls in ("L", "N")
        assert isinstance(success, bool)


class TestWindowRadius:
    def test_covers_candidate_distances(self):
        cfg = a2g_config()
        radius = default_window_radius(cfg, RN, 0)
        # Window dwarfs the typical nearest-transmitter distance 1/(2 sqrt(lambda)).
        assert radius > 10.0 / (2.0 * math.sqrt(1e-5))

    def test_discards_stay_rare(self):
        cfg = a2g_config()
        res = run_trials(cfg, RN, SimSpec(trials=2000, seed=8))
        assert res.discard_fraction <= 1e-3


class TestEmpiricalLaplace:
    def test_zero_argument(self):
        cfg = a2g_config()
        event = LinkEvent(0, 1, ChannelClass.LOS, RN, 150.0)
        mean, stderr = empirical_laplace(cfg, event, 0.0, SimSpec(trials=200, seed=0))
        assert mean == 1.0
        assert stderr == 0.0

    def test_noise_only(self):
        sigma2 = 2e-6
        cfg = validate(
            NetworkConfig(
                layers=(
                    LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
                    LayerSpec(altitude=100.0, density_rx=1e-9, density_tx=1e-30),
                ),
                noise_power=sigma2,
            )
        )
        event = LinkEvent(0, 1, ChannelClass.LOS, RN, 150.0)
        s = 1e4
        mean, stderr = empirical_laplace(cfg, event, s, SimSpec(trials=200, seed=1))
        assert mean == pytest.approx(math.exp(-s * sigma2), rel=1e-9)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_determinism(self):
        cfg = a2g_config()
        event = LinkEvent(0, 1, ChannelClass.LOS, RN, 150.0)
        spec = SimSpec(trials=1000, seed=11)
        s = 1e4
        assert empirical_laplace(cfg, event, s, spec) == empirical_laplace(cfg, event, s, spec)
