"""Distance-law and association tests."""

import math

import numpy as np
import pytest

from aeronet.channel import ChannelClass
from aeronet.errors import DomainError
from aeronet.geometry import (
    AssociationAnalysis,
    NearestDistanceLaw,
    association_probabilities,
    candidate_radius,
    main_link_pdf,
    nearest_distance_law,
)
from aeronet.netconfig import (
    AssociationRule,
    Criterion,
    LayerSpec,
    NetworkConfig,
    validate,
)
from aeronet.numerics import QuadratureSpec, integrate_semi_infinite

RN = AssociationRule.from_tag("rn")
RS = AssociationRule.from_tag("rs")
QUAD = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12)


def a2g_config(h=100.0, density=1e-5, **kw):
    return validate(
        NetworkConfig(
            layers=(
                LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
                LayerSpec(altitude=h, density_rx=0.0, density_tx=density),
            ),
            target_sinr=0.7,
            **kw,
        )
    )


class TestNearestDistanceLaw:
    def test_empty_process(self):
        law = NearestDistanceLaw(0.0, 0.0, lambda v: np.ones_like(v))
        assert law.ccdf(100.0) == 1.0
        assert law.pdf(100.0) == 0.0
        assert law.defect_mass == 1.0

    def test_rayleigh_law(self):
        # Constant rho = 1, h = 0, lambda = 1/pi: ccdf(v) = exp(-v^2).
        law = NearestDistanceLaw(1.0 / math.pi, 0.0, lambda v: np.ones_like(v))
        for v in np.linspace(0.2, 3.0, 10):
            assert law.ccdf(float(v)) == pytest.approx(math.exp(-v * v), rel=1e-10)

    def test_ccdf_one_below_altitude_gap(self):
        cfg = a2g_config()
        law = nearest_distance_law(cfg, RN, 0, 1, ChannelClass.LOS)
        assert law.ccdf(0.0) == 1.0
        assert law.ccdf(100.0) == 1.0

    def test_ccdf_monotone(self):
        cfg = a2g_config()
        for c in ChannelClass:
            law = nearest_distance_law(cfg, RN, 0, 1, c)
            grid = np.linspace(law.h, law.h + 5000.0, 200)
            vals = law.ccdf(grid)
            assert np.all(np.diff(vals) <= 1e-15)

    def test_pdf_normalizes_to_existing_mass(self):
        cfg = a2g_config()
        law = nearest_distance_law(cfg, RN, 0, 1, ChannelClass.NLOS)
        total = integrate_semi_infinite(lambda v: float(law.pdf(v)), law.h, QUAD)
        assert total == pytest.approx(1.0 - law.defect_mass, abs=1e-6)

    def test_quantile_inverts_cdf(self):
        cfg = a2g_config()
        law = nearest_distance_law(cfg, RN, 0, 1, ChannelClass.LOS)
        v = law.quantile(0.5)
        assert 1.0 - law.ccdf(v) == pytest.approx(0.5, abs=1e-6)

    def test_zero_density_layer_rejected(self):
        cfg = a2g_config()
        with pytest.raises(DomainError):
            nearest_distance_law(cfg, RN, 0, 0, ChannelClass.LOS)


class TestCandidateRadius:
    def test_nearest_unit_bias(self):
        assert candidate_radius(Criterion.NEAREST, 2.5, 3.5, 7.0, 1.0, 1.0) == 7.0

    def test_strongest_matched_exponents(self):
        assert candidate_radius(Criterion.STRONGEST, 2.5, 2.5, 7.0, 1.0, 1.0) == pytest.approx(7.0)

    def test_strongest_mixed_exponents(self):
        val = candidate_radius(Criterion.STRONGEST, 2.0, 4.0, 2.0, 1.0, 1.0)
        assert val == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_bias_ratio(self):
        assert candidate_radius(Criterion.NEAREST, 2.5, 3.5, 5.0, 2.0, 1.0) == 2.5


class TestAssociationProbabilities:
    def test_single_layer_constant_los(self):
        cfg = a2g_config(los_model="constant", constant_los=1.0)
        report = association_probabilities(cfg, RN, 0, QUAD)
        assert report.probabilities[(1, ChannelClass.LOS)] == pytest.approx(1.0, abs=1e-6)
        assert report.probabilities.get((1, ChannelClass.NLOS), 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_two_identical_layers_split_evenly(self):
        cfg = validate(
            NetworkConfig(
                layers=(
                    LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
                    LayerSpec(altitude=100.0, density_rx=0.0, density_tx=5e-6),
                    LayerSpec(altitude=100.0, density_rx=0.0, density_tx=5e-6),
                ),
                los_model="constant",
                constant_los=1.0,
            )
        )
        report = association_probabilities(cfg, RN, 0, QUAD)
        a1 = report.probabilities[(1, ChannelClass.LOS)]
        a2 = report.probabilities[(2, ChannelClass.LOS)]
        assert a1 == pytest.approx(0.5, abs=1e-6)
        assert a2 == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("h", [50.0, 300.0])
    @pytest.mark.parametrize("rule", [RN, RS])
    def test_probabilities_sum_to_one(self, h, rule):
        cfg = a2g_config(h=h)
        report = association_probabilities(cfg, rule, 0, QUAD)
        assert report.total() == pytest.approx(1.0, abs=1e-6)

    def test_bias_scaling_invariance(self):
        def with_bias(scale):
            return validate(
                NetworkConfig(
                    layers=(
                        LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
                        LayerSpec(altitude=100.0, density_rx=0.0, density_tx=7e-6, bias=1.0 * scale),
                        LayerSpec(altitude=200.0, density_rx=0.0, density_tx=7e-6, bias=2.0 * scale),
                    ),
                    target_sinr=0.7,
                )
            )

        base = association_probabilities(with_bias(1.0), RS, 0, QUAD)
        doubled = association_probabilities(with_bias(2.0), RS, 0, QUAD)
        for key, val in base.probabilities.items():
            assert abs(val - doubled.probabilities[key]) <= 1e-8


class TestMainLinkPdf:
    def test_rayleigh_nearest_neighbor(self):
        # Single constant-LoS layer at h=0: the classical nearest-neighbor
        # density 2 pi lambda y exp(-pi lambda y^2).
        lam = 1e-4
        cfg = validate(
            NetworkConfig(
                layers=(
                    LayerSpec(altitude=0.0, density_rx=lam, density_tx=lam),
                ),
                los_model="constant",
                constant_los=1.0,
            )
        )
        dist = main_link_pdf(cfg, RN, 0, 0, ChannelClass.LOS, QUAD)
        for y in np.linspace(10.0, 150.0, 10):
            expected = 2.0 * math.pi * lam * y * math.exp(-math.pi * lam * y * y)
            assert dist.pdf(float(y)) == pytest.approx(expected, rel=1e-6)

    def test_support_respects_altitude_gap(self):
        cfg = a2g_config()
        dist = main_link_pdf(cfg, RN, 0, 1, ChannelClass.LOS, QUAD)
        assert dist.pdf(50.0) == 0.0
        assert dist.pdf(99.9) == 0.0
        assert dist.pdf(150.0) > 0.0

    def test_normalization(self):
        cfg = a2g_config()
        for c in ChannelClass:
            dist = main_link_pdf(cfg, RN, 0, 1, c, QUAD)
            total = integrate_semi_infinite(lambda y: dist.pdf(float(y)), dist.h, QUAD)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_null_event_rejected(self):
        cfg = a2g_config(los_model="constant", constant_los=1.0)
        analysis = AssociationAnalysis(cfg, RN, 0, QUAD)
        with pytest.raises(DomainError):
            analysis.main_link_pdf(1, ChannelClass.NLOS)
