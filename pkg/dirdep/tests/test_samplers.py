"""Tests for marginal and joint samplers"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats
from scipy.special import i0, i1

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from shared.errors import ConfigurationError, InputError, SamplerError
from shared.models import TWO_PI, SampleKind
from src import samplers
from src.geometry import sample_to_angles
from src.model_spec import (
    BivariateCosine,
    BivariateVonMises,
    BivariateWrappedCauchy,
    CircularMixture,
    CircularUniform,
    Parabolic,
    ProjectedNormal,
    VmfPair,
    VonMises,
    VonMisesCopula,
    VonMisesFisher,
    WrappedCauchy,
    parse_model,
)
from src.samplers import (
    bcvm_acceptance_ratio,
    bcvm_draws,
    sample_circular,
    sample_joint,
    sample_vmf,
    vm_cdf,
    vm_centered,
    vm_quantile,
    wc_cdf,
    wc_quantile,
)


# Kuiper critical value of V * (sqrt(n) + 0.155 + 0.24 / sqrt(n)) at the 0.1% level
KUIPER_CRITICAL = 2.303


def _kuiper(u: np.ndarray) -> float:
    """Scaled Kuiper statistic of CDF values u against the uniform law"""
    u = np.sort(u)
    n = u.size
    i = np.arange(1, n + 1)
    v = np.max(i / n - u) + np.max(u - (i - 1) / n)
    return v * (np.sqrt(n) + 0.155 + 0.24 / np.sqrt(n))


class TestCircularMarginals:
    """Test suite for VM, WC and uniform angle draws"""

    def test_von_mises_passes_kuiper(self):
        rng = np.random.default_rng(101)
        theta = sample_circular(VonMises(0.0, 2.0), 2000, rng).angles
        assert _kuiper(vm_cdf(theta, 2.0)) < KUIPER_CRITICAL

    def test_shifted_von_mises_passes_kuiper(self):
        rng = np.random.default_rng(102)
        theta = sample_circular(VonMises(np.pi, 0.7), 2000, rng).angles
        assert _kuiper(vm_cdf(theta, 0.7, mu=np.pi)) < KUIPER_CRITICAL

    def test_wrapped_cauchy_passes_kuiper(self):
        rng = np.random.default_rng(103)
        theta = sample_circular(WrappedCauchy(1.0, 0.6), 2000, rng).angles
        assert _kuiper(wc_cdf(theta, 0.6, mu=1.0)) < KUIPER_CRITICAL

    def test_von_mises_mean_resultant_length(self):
        rng = np.random.default_rng(104)
        theta = vm_centered(2.0, 20000, rng)
        expected = i1(2.0) / i0(2.0)
        assert expected == pytest.approx(0.6978, abs=1e-4)
        assert np.mean(np.cos(theta)) == pytest.approx(expected, abs=0.02)
        assert np.mean(np.sin(theta)) == pytest.approx(0.0, abs=0.02)

    def test_wrapped_cauchy_first_moment(self):
        rng = np.random.default_rng(105)
        theta = sample_circular(WrappedCauchy(0.0, 0.5), 20000, rng).angles
        assert np.mean(np.cos(theta)) == pytest.approx(0.5, abs=0.02)

    def test_zero_concentration_is_uniform(self):
        rng = np.random.default_rng(106)
        theta = sample_circular(VonMises(0.0, 0.0), 2000, rng).angles
        assert _kuiper(theta / TWO_PI) < KUIPER_CRITICAL

    def test_uniform_angles_in_range(self, rng):
        theta = sample_circular(CircularUniform(), 500, rng).angles
        assert np.all((theta >= 0.0) & (theta < TWO_PI))

    def test_sphere_marginal_rejected(self, rng):
        with pytest.raises(ConfigurationError, match="not a circular"):
            sample_circular(VonMisesFisher((1.0, 0.0, 0.0), 1.0), 5, rng)

    @pytest.mark.parametrize("n", [0, -3, 2.5, True])
    def test_invalid_sample_size(self, rng, n):
        with pytest.raises(ConfigurationError, match="Sample size"):
            sample_circular(VonMises(0.0, 1.0), n, rng)

    def test_negative_kappa(self, rng):
        with pytest.raises(ConfigurationError, match="kappa"):
            vm_centered(-1.0, 5, rng)


class TestVonMisesFisher:
    """Test suite for Wood's vMF sampler"""

    def test_rows_are_unit_vectors(self, rng):
        s = sample_vmf((0.0, 0.0, 1.0), 5.0, 300, rng)
        assert s.points.shape == (300, 3)
        assert np.allclose(np.linalg.norm(s.points, axis=1), 1.0)

    def test_mean_projection_on_two_sphere(self):
        rng = np.random.default_rng(201)
        mu = np.array([0.0, 1.0, 0.0])
        s = sample_vmf(mu, 2.0, 20000, rng)
        expected = 1.0 / np.tanh(2.0) - 0.5
        assert np.mean(s.points @ mu) == pytest.approx(expected, abs=0.02)

    def test_zero_kappa_is_isotropic(self):
        rng = np.random.default_rng(202)
        s = sample_vmf((1.0, 0.0, 0.0, 0.0), 0.0, 20000, rng)
        assert np.allclose(s.points.mean(axis=0), 0.0, atol=0.03)

    def test_large_kappa_concentrates(self, rng):
        s = sample_vmf((1.0, 0.0, 0.0), 500.0, 200, rng)
        assert np.min(s.points[:, 0]) > 0.9

    def test_non_unit_mean_rejected(self, rng):
        with pytest.raises(InputError, match="unit vector"):
            sample_vmf((1.0, 1.0), 1.0, 5, rng)

    def test_scalar_mean_rejected(self, rng):
        with pytest.raises(InputError, match="two coordinates"):
            sample_vmf((1.0,), 1.0, 5, rng)


class TestCdfAndQuantile:
    """Test suite for marginal CDFs and their inverses"""

    @settings(max_examples=100)
    @given(
        q=st.floats(min_value=0.001, max_value=0.999),
        kappa=st.floats(min_value=0.05, max_value=20.0),
        mu=st.floats(min_value=0.0, max_value=6.0),
    )
    def test_vm_quantile_inverts_cdf(self, q, kappa, mu):
        t = vm_quantile(q, kappa, mu)
        assert 0.0 <= t <= TWO_PI
        assert vm_cdf(t, kappa, mu) == pytest.approx(q, abs=1e-8)

    @settings(max_examples=100)
    @given(
        q=st.floats(min_value=0.001, max_value=0.999),
        rho=st.floats(min_value=0.0, max_value=0.95),
        mu=st.floats(min_value=0.0, max_value=6.0),
    )
    def test_wc_quantile_inverts_cdf(self, q, rho, mu):
        t = wc_quantile(q, rho, mu)
        assert wc_cdf(t, rho, mu) == pytest.approx(q, abs=1e-9)

    def test_vm_cdf_endpoints_and_monotonicity(self):
        t = np.linspace(0.0, TWO_PI, 401)
        f = vm_cdf(t, 3.0, mu=1.0)
        assert f[0] == pytest.approx(0.0, abs=1e-12)
        assert f[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(f) >= -1e-12)

    def test_vm_cdf_matches_quadrature(self):
        kappa = 1.5
        expected, _ = integrate.quad(lambda t: np.exp(kappa * np.cos(t)) / (TWO_PI * i0(kappa)), 0.0, 2.0)
        assert vm_cdf(2.0, kappa) == pytest.approx(expected, abs=1e-6)

    def test_vm_cdf_zero_kappa_is_uniform(self):
        assert vm_cdf(np.pi, 0.0) == pytest.approx(0.5)

    def test_scalar_in_scalar_out(self):
        assert isinstance(vm_cdf(1.0, 1.0), float)
        assert isinstance(wc_quantile(0.25, 0.3), float)
        assert vm_quantile(np.array([0.2, 0.4]), 1.0).shape == (2,)

    def test_wc_cdf_top_of_support(self):
        assert wc_cdf(TWO_PI, 0.4, mu=2.0) == 1.0


class TestJointModels:
    """Test suite for sample_joint across the model families"""

    @pytest.mark.parametrize("text", [
        "VM(0,1) x VM(pi,0.1)",
        "WC(0,exp(-0.1)) x WC(pi,exp(-0.1))",
        "PB(0.8)",
        "BvM(2)",
        "BWC(0.5)",
        "BWC(-0.5)",
        "BCvM(2)",
        "Mix(VM(0,1),VM(pi,0.1),0.5)",
        "vMF((1,0,0),0) x Mix(vMF((1,0,0),0),vMF((1,0,0),2),0.5)",
        "PN(2,(0.1,0.8,0.3))",
        "VMC(2)",
    ])
    def test_supports_match_model(self, text):
        model = parse_model(text)
        pair = sample_joint(model, 40, np.random.default_rng(7))
        assert pair.n == 40
        assert (pair.x.kind, pair.x.ambient_dim) == model.x_kind()
        assert (pair.y.kind, pair.y.ambient_dim) == model.y_kind()

    def test_same_seed_same_sample(self):
        model = parse_model("BCvM(2)")
        a = sample_joint(model, 30, np.random.default_rng(11))
        b = sample_joint(model, 30, np.random.default_rng(11))
        assert np.array_equal(a.x.points, b.x.points)
        assert np.array_equal(a.y.points, b.y.points)

    def test_bivariate_von_mises_keeps_marginals(self):
        rng = np.random.default_rng(301)
        pair = sample_joint(BivariateVonMises(1.0, 1.0, 0.0, 5.0), 2000, rng)
        assert _kuiper(vm_cdf(sample_to_angles(pair.x).angles, 1.0)) < KUIPER_CRITICAL
        assert _kuiper(vm_cdf(sample_to_angles(pair.y).angles, 1.0)) < KUIPER_CRITICAL

    def test_bivariate_wrapped_cauchy_keeps_marginals(self):
        rng = np.random.default_rng(302)
        pair = sample_joint(BivariateWrappedCauchy(0.3, 0.6, -0.5), 2000, rng)
        assert _kuiper(wc_cdf(sample_to_angles(pair.y).angles, 0.6)) < KUIPER_CRITICAL

    def test_bivariate_wrapped_cauchy_first_marginal(self):
        rng = np.random.default_rng(304)
        pair = sample_joint(BivariateWrappedCauchy(0.3, 0.6, 0.5), 2000, rng)
        assert _kuiper(wc_cdf(sample_to_angles(pair.x).angles, 0.3)) < KUIPER_CRITICAL

    def test_parabolic_full_dependence_is_deterministic(self, rng):
        pair = sample_joint(Parabolic(1.0), 200, rng)
        t1 = sample_to_angles(pair.x).angles
        t2 = sample_to_angles(pair.y).angles
        assert t2 == pytest.approx(t1**2 / TWO_PI, abs=1e-9)

    def test_parabolic_second_angle_needs_no_wrapping(self, rng):
        pair = sample_joint(Parabolic(0.6), 500, rng)
        t1 = sample_to_angles(pair.x).angles
        t2 = sample_to_angles(pair.y).angles
        # t2 lies between the scaled square of t1 and the largest admissible value
        assert np.all(t2 >= 0.6 * t1**2 / TWO_PI - 1e-9)
        assert np.all(t2 <= 0.6 * t1**2 / TWO_PI + 0.4 * TWO_PI + 1e-9)

    def test_parabolic_null_second_marginal(self):
        rng = np.random.default_rng(305)
        pair = sample_joint(Parabolic(0.0), 2000, rng)
        t2 = sample_to_angles(pair.y).angles
        # U^2 / (2 pi) has CDF sqrt(t / (2 pi)) on [0, 2 pi)
        assert _kuiper(np.sqrt(t2 / TWO_PI)) < KUIPER_CRITICAL
        t1 = sample_to_angles(pair.x).angles
        assert abs(np.corrcoef(t1, t2)[0, 1]) < 0.1

    def test_bivariate_cosine_without_interaction_factorises(self):
        rng = np.random.default_rng(306)
        t1, t2, _ = bcvm_draws(BivariateCosine(1.0, 2.0, 0.0), 4000, rng)
        assert _kuiper(vm_cdf(t1, 1.0)) < KUIPER_CRITICAL
        assert _kuiper(vm_cdf(t2, 2.0)) < KUIPER_CRITICAL
        assert abs(np.corrcoef(np.cos(t1), np.cos(t2))[0, 1]) < 0.07
        assert abs(np.corrcoef(np.sin(t1), np.sin(t2))[0, 1]) < 0.07

    def test_mixture_with_certain_copy(self, rng):
        pair = sample_joint(CircularMixture(VonMises(0.0, 1.0), VonMises(np.pi, 0.1), 1.0), 50, rng)
        assert np.array_equal(pair.x.points, pair.y.points)

    def test_vmf_pair_with_certain_copy(self, rng):
        pair = sample_joint(VmfPair((0.0, 0.0, 1.0), 1.0, 3.0, 1.0), 50, rng)
        assert np.array_equal(pair.x.points, pair.y.points)

    def test_projected_normal_shapes(self, rng):
        pair = sample_joint(ProjectedNormal(3, 0.1, 0.8, 0.3), 60, rng)
        assert pair.x.points.shape == (60, 3)
        assert pair.y.kind == SampleKind.LINEAR
        assert pair.y.points.shape == (60, 1)

    def test_copula_linear_component(self):
        rng = np.random.default_rng(303)
        pair = sample_joint(VonMisesCopula(2.0), 2000, rng)
        v = pair.y.points[:, 0]
        assert np.all((v >= 0.0) & (v <= 1.0))
        assert stats.kstest(v, "uniform").pvalue > 0.001

    def test_invalid_sample_size(self, rng):
        with pytest.raises(ConfigurationError):
            sample_joint(parse_model("PB(0.5)"), 0, rng)

    def test_unknown_model_type(self, rng):
        with pytest.raises(ConfigurationError, match="Unsupported"):
            sample_joint(VonMises(0.0, 1.0), 5, rng)


class TestBivariateCosineRejection:
    """Test suite for the BCvM rejection sampler"""

    def test_acceptance_matches_quadrature(self):
        rng = np.random.default_rng(401)
        _, _, proposals = bcvm_draws(BivariateCosine(1.0, 1.0, 2.0), 2000, rng)
        expected = bcvm_acceptance_ratio(1.0, 1.0, 2.0)
        assert 2000 / proposals == pytest.approx(expected, rel=0.2)

    def test_acceptance_ratio_of_flat_density(self):
        assert bcvm_acceptance_ratio(0.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_budget_exhaustion(self, monkeypatch, rng):
        monkeypatch.setattr(samplers, "MAX_PROPOSALS", 5)
        with pytest.raises(SamplerError, match="BCvM"):
            bcvm_draws(BivariateCosine(0.0, 0.0, 50.0), 50, rng)
