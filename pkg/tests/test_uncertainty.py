"""
Tests for the uncertainty product from fringe spacing.
"""
import math

import pytest

from core.errors import InsufficientFringesError
from core.models import (
    Estimator, ExperimentConfig, IntrusionMode, IntrusionSpec, ParticleParams, SamplerConfig, ScreenSpec,
    SeedSpec
)
from experiments.double_slit import double_slit
from experiments.uncertainty import analytic_uncertainty_product, uncertainty_product


def product_config(d: float = 5.0, **overrides) -> ExperimentConfig:
    settings = dict(
        particle=ParticleParams(mass=1.0, momentum=2.0 * math.pi),
        slit_separation=d,
        screen=ScreenSpec(n_bins=400, distance=100.0, x_min=-50.0, x_max=50.0),
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


class TestUncertaintyProduct:
    """Test suite for uncertainty_product."""

    def test_analytic_closed_form(self):
        """δr = 2π/p gives δp·δx = π."""
        assert analytic_uncertainty_product(product_config()) == pytest.approx(math.pi, abs=1e-12)

    def test_from_analytic_profile(self):
        """The analytic profile's fringes reproduce π to within 5%."""
        cfg = product_config()
        assert uncertainty_product(double_slit(cfg), cfg) == pytest.approx(math.pi, rel=0.05)

    def test_from_monte_carlo_profile(self):
        """The Monte Carlo profile lands in [0.95π, 1.25π]."""
        cfg = product_config(
            estimator=Estimator.MONTE_CARLO,
            sampler=SamplerConfig(n_paths=100000),
            seeds=SeedSpec(master_seed=42, stream_count=4),
        )
        product = uncertainty_product(double_slit(cfg), cfg)
        assert 0.95 * math.pi <= product <= 1.25 * math.pi

    def test_scale_invariance(self):
        """Doubling d with λ and L fixed leaves the product unchanged within 5%."""
        narrow = product_config(5.0)
        wide = product_config(10.0)
        a = uncertainty_product(double_slit(narrow), narrow)
        b = uncertainty_product(double_slit(wide), wide)
        assert b == pytest.approx(a, rel=0.05)

    def test_bound(self):
        """The product respects δp·δx ≥ π up to 5%."""
        cfg = product_config()
        assert uncertainty_product(double_slit(cfg), cfg) >= math.pi * 0.95

    def test_insufficient_fringes(self):
        """A profile without fringes cannot yield a spacing."""
        cfg = product_config(intrusion=IntrusionSpec(mode=IntrusionMode.RANDOM_KICK, photon_momentum=5.0))
        with pytest.raises(InsufficientFringesError):
            uncertainty_product(double_slit(cfg), cfg)
