"""Copula families against 2-D quadrature oracles and structural invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci_integrate
from scipy import stats
from scipy.special import ndtri

from cexpect.copulas import (
    Clayton,
    EmpiricalCopula,
    FGM,
    Gaussian,
    Independence,
    copula_from_config,
    sup_distance,
    sup_distance_swapped,
)
from cexpect.errors import DomainError
from cexpect.rng import philox_stream

ALL_FAMILIES = [
    Independence(),
    Gaussian(rho=0.5),
    Gaussian(rho=-0.7),
    FGM(theta=1.0),
    FGM(theta=-0.6),
    Clayton(alpha=2.0),
    Clayton(alpha=0.7),
]


class TestCdf:
    def test_independence_center(self):
        assert float(Independence().cdf(0.5, 0.5)) == pytest.approx(0.25)

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_boundary_conditions(self, c):
        u = np.linspace(0.0, 1.0, 21)
        np.testing.assert_allclose(np.asarray(c.cdf(u, np.ones_like(u))), u, atol=1e-12)
        np.testing.assert_allclose(np.asarray(c.cdf(np.ones_like(u), u)), u, atol=1e-12)
        np.testing.assert_allclose(np.asarray(c.cdf(u, np.zeros_like(u))), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.asarray(c.cdf(np.zeros_like(u), u)), 0.0, atol=1e-12)

    def test_gaussian_center_against_2d_quadrature_oracle(self):
        # Oracle: dblquad of the bivariate normal density over the quadrant,
        # frozen below; closed check 1/4 + arcsin(rho)/(2 pi) = 1/3.
        rho = 0.5

        def dens(y, x):
            det = 1 - rho * rho
            return math.exp(-(x * x - 2 * rho * x * y + y * y) / (2 * det)) / (
                2 * math.pi * math.sqrt(det)
            )

        oracle, _ = sci_integrate.dblquad(dens, -9, 0, -9, 0, epsabs=1e-12)
        assert oracle == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert float(Gaussian(rho=0.5).cdf(0.5, 0.5)) == pytest.approx(oracle, abs=1e-9)
        assert float(Gaussian(rho=0.5).cdf(0.5, 0.5)) == pytest.approx(
            0.25 + math.asin(rho) / (2 * math.pi), abs=1e-12
        )

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_frechet_bounds_on_grid(self, c):
        g = np.linspace(0.0, 1.0, 100)
        uu, vv = np.meshgrid(g, g)
        vals = np.asarray(c.cdf(uu, vv))
        lower = np.maximum(uu + vv - 1.0, 0.0)
        upper = np.minimum(uu, vv)
        assert np.all(vals >= lower - 1e-12)
        assert np.all(vals <= upper + 1e-12)

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_exchangeable(self, c):
        g = np.linspace(0.0, 1.0, 40)
        uu, vv = np.meshgrid(g, g)
        np.testing.assert_allclose(
            np.asarray(c.cdf(uu, vv)), np.asarray(c.cdf(vv, uu)), atol=1e-12
        )

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_two_increasing_on_random_rectangles(self, c):
        rng = philox_stream(21, 0)
        pts = rng.random((10_000, 4))
        u1 = np.minimum(pts[:, 0], pts[:, 1])
        u2 = np.maximum(pts[:, 0], pts[:, 1])
        v1 = np.minimum(pts[:, 2], pts[:, 3])
        v2 = np.maximum(pts[:, 2], pts[:, 3])
        mass = (
            np.asarray(c.cdf(u2, v2))
            - np.asarray(c.cdf(u2, v1))
            - np.asarray(c.cdf(u1, v2))
            + np.asarray(c.cdf(u1, v1))
        )
        assert float(mass.min()) >= -1e-12

    @given(
        rho=st.floats(min_value=-0.99, max_value=0.99),
        u=st.floats(min_value=0.0, max_value=1.0),
        v=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_gaussian_cdf_within_frechet(self, rho, u, v):
        val = float(Gaussian(rho=rho).cdf(u, v))
        assert max(u + v - 1.0, 0.0) - 1e-12 <= val <= min(u, v) + 1e-12


class TestValidation:
    def test_gaussian_rho_open_interval(self):
        with pytest.raises(DomainError):
            Gaussian(rho=1.0)

    def test_fgm_theta_bounds(self):
        with pytest.raises(DomainError):
            FGM(theta=1.5)

    def test_clayton_alpha_positive(self):
        with pytest.raises(DomainError):
            Clayton(alpha=0.0)


class TestSampling:
    def test_gaussian_rho0_kendall_tau(self):
        u, v = Gaussian(rho=1e-12).sample(philox_stream(22, 0), 100_000)
        tau = stats.kendalltau(u, v).statistic
        assert abs(tau) <= 0.02

    def test_gaussian_rho05_pearson_after_normal_quantile(self):
        u, v = Gaussian(rho=0.5).sample(philox_stream(23, 0), 100_000)
        x, y = ndtri(u), ndtri(v)
        r = float(np.corrcoef(x, y)[0, 1])
        assert abs(r - 0.5) <= 0.02

    def test_fgm_theta1_spearman_against_quadrature_oracle(self):
        # rho_S = 12 int int C du dv - 3; oracle evaluates the double
        # integral directly, and the known theta/3 value must agree.
        theta = 1.0
        ival, _ = sci_integrate.dblquad(
            lambda v, u: u * v * (1 + theta * (1 - u) * (1 - v)), 0, 1, 0, 1, epsabs=1e-12
        )
        oracle = 12 * ival - 3
        assert oracle == pytest.approx(theta / 3.0, abs=1e-9)
        u, v = FGM(theta=1.0).sample(philox_stream(24, 0), 100_000)
        rho_s = stats.spearmanr(u, v).statistic
        assert abs(rho_s - oracle) <= 0.02

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_marginal_uniformity(self, c):
        u, v = c.sample(philox_stream(25, 0), 50_000)
        for coord in (u, v):
            ks = stats.kstest(coord, "uniform").statistic
            assert ks <= 1.63 / math.sqrt(coord.size)

    @pytest.mark.parametrize("c", ALL_FAMILIES, ids=str)
    def test_conditional_quantile_inverts_conditional_cdf(self, c):
        rng = philox_stream(26, 0)
        u = 0.05 + rng.random(200) * 0.9
        w = 0.05 + rng.random(200) * 0.9
        v = np.asarray(c.cond_quantile(u, w))
        w_back = np.asarray(c.cond_cdf(u, v))
        np.testing.assert_allclose(w_back, w, atol=1e-8)

    def test_sample_pair_deterministic(self):
        c = Clayton(alpha=2.0)
        assert c.sample_pair(philox_stream(27, 0)) == c.sample_pair(philox_stream(27, 0))


class TestEmpiricalCopula:
    def test_corner_values(self):
        rng = philox_stream(28, 0)
        e = EmpiricalCopula(rng.random(500), rng.random(500))
        assert e.cdf(1.0, 1.0) == 1.0
        assert e.cdf(0.0, 0.5) == 0.0
        assert e.cdf(0.5, 0.0) == 0.0

    def test_independence_center(self):
        u, v = Independence().sample(philox_stream(29, 0), 100_000)
        e = EmpiricalCopula(u, v)
        assert e.cdf(0.5, 0.5) == pytest.approx(0.25, abs=0.01)

    def test_empty_sample_rejected(self):
        with pytest.raises(DomainError):
            EmpiricalCopula(np.array([]), np.array([]))

    def test_ranks_are_permutations(self):
        rng = philox_stream(30, 0)
        e = EmpiricalCopula(rng.random(100), rng.random(100))
        expect = np.arange(1, 101) / 101.0
        np.testing.assert_allclose(np.sort(e.ranks_u), expect, atol=1e-15)
        np.testing.assert_allclose(np.sort(e.ranks_v), expect, atol=1e-15)

    def test_lattice_matches_pointwise_eval(self):
        rng = philox_stream(31, 0)
        e = EmpiricalCopula(rng.random(2000), rng.random(2000))
        levels, table = e.lattice(9)
        for i, u in enumerate(levels):
            for j, v in enumerate(levels):
                assert table[i, j] == pytest.approx(e.cdf(u, v), abs=1e-12)


class TestSupDistance:
    def test_same_copula_small_distance(self):
        c = Gaussian(rho=0.5)
        u, v = c.sample(philox_stream(32, 0), 100_000)
        e = EmpiricalCopula(u, v)
        assert sup_distance(e, c, grid=50) <= 0.02

    def test_wrong_copula_large_distance(self):
        # Gaussian rho=0.8 cdf at (0.5, 0.5) exceeds 0.25 by ~0.148.
        c = Gaussian(rho=0.8)
        gap = float(c.cdf(0.5, 0.5)) - 0.25
        assert gap > 0.1
        u, v = c.sample(philox_stream(33, 0), 100_000)
        e = EmpiricalCopula(u, v)
        assert sup_distance(e, Independence(), grid=50) >= 0.05

    def test_grid_two_is_corners_only(self):
        u, v = Clayton(alpha=3.0).sample(philox_stream(34, 0), 5000)
        e = EmpiricalCopula(u, v)
        assert sup_distance(e, Independence(), grid=2) == 0.0
        assert sup_distance_swapped(e, Gaussian(rho=0.9), grid=2) == 0.0

    def test_grid_validation(self):
        u, v = Independence().sample(philox_stream(35, 0), 100)
        with pytest.raises(DomainError):
            EmpiricalCopula(u, v).lattice(1)


class TestConfig:
    @pytest.mark.parametrize(
        "cfg",
        [
            {"family": "independence"},
            {"family": "gaussian", "rho": 0.5},
            {"family": "fgm", "theta": -1.0},
            {"family": "clayton", "alpha": 2.0},
        ],
    )
    def test_roundtrip(self, cfg):
        assert copula_from_config(cfg).to_config() == cfg

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            copula_from_config({"family": "gumbel"})
