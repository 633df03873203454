import math

import numpy as np
import pytest

import oracles
from upperfn.empirical.bernstein import beta22_density, uniform_density
from upperfn.empirical.constants import structural_constants
from upperfn.empirical.envelopes import thm3_envelopes
from upperfn.empirical.localized import (CoverRd, F_quadrature, K_check, LLResult, M_hat,
                                         M_hat_simplified, admissible, box_kernel,
                                         check_ratio_lipschitz, cover_and_support,
                                         epanechnikov_kernel, expected_K, gaussian_kernel,
                                         localized_model, thm7_envelopes, supnorm_C,
                                         supnorm_envelopes, supnorm_ll_statistic, triangular_kernel,
                                         xlogx_cap)
from upperfn.errors import DomainError


@pytest.fixture(scope="module")
def epa():
    return localized_model(epanechnikov_kernel())


@pytest.fixture(scope="module")
def consts():
    return structural_constants(0, 1, 2, 1)


class TestKernels:
    def test_ratio_lipschitz_constants(self):
        for K in (triangular_kernel(), epanechnikov_kernel(), gaussian_kernel()):
            assert check_ratio_lipschitz(K, K.L1, 50000) is None

    def test_box_rejected(self):
        with pytest.raises(DomainError):
            localized_model(box_kernel())

    def test_understated_constant_found(self):
        K = epanechnikov_kernel()
        assert check_ratio_lipschitz(K, 0.5, 50000) is not None

    def test_K_check(self):
        K = epanechnikov_kernel()
        assert K_check(K, 1.0) == 0.0
        assert K_check(K, 0.5) == pytest.approx(0.75 * (1 - 0.25), rel=1e-4)

    def test_expected_K_interior(self, epa):
        assert expected_K(epa, uniform_density(), 0.1, 0.5) == pytest.approx(1.0, rel=1e-9)


class TestFBound:
    @pytest.mark.parametrize("dens", [uniform_density(), beta22_density()])
    def test_bound_holds(self, dens):
        m = localized_model(epanechnikov_kernel(), f_inf=dens.f_inf)
        rng = np.random.default_rng(3)
        for r, xb in zip(rng.uniform(0.01, 1, 20), rng.uniform(-0.5, 1.5, 20)):
            assert F_quadrature(m, dens, r, xb) <= m.F_bound() + 1e-12

    def test_value(self, epa):
        assert epa.F_bound() == pytest.approx(8.0 * epa.L2)

    def test_unit_ball_counterexample(self):
        # L = 1 per coordinate understates the ball measure
        m = localized_model(epanechnikov_kernel(), L_measure=(1.0,))
        F = F_quadrature(m, uniform_density(), 0.1, 0.5)
        assert F > m.F_bound()


class TestCover:
    def test_overlap_counts(self):
        assert CoverRd(1, 1.0).frak_n == 3
        assert CoverRd(2, 1.0).frak_n == 9

    def test_cells_contain(self):
        c = CoverRd(1, 1.0)
        assert c.cells_containing(0.5) == [(0,), (1,)]
        assert c.in_neighbourhood(0.2, 1.4)
        assert not c.in_neighbourhood(0.2, 2.6)

    def test_support_check(self, epa):
        _, chk = cover_and_support(1, 1.0, epa, 64)
        assert chk.passed
        g = localized_model(gaussian_kernel())
        _, chk = cover_and_support(1, 1.0, g, 64)
        assert not chk.passed and chk.witness is not None

    def test_bad_radius(self):
        with pytest.raises(DomainError):
            CoverRd(1, 0.0)


class TestPointwiseLocalized:
    def test_equals_general_form(self, epa, consts):
        rs = np.array([0.05, 0.1, 0.3])
        F = np.array([0.9, 0.8, 0.6])
        loc = thm7_envelopes(consts, epa, 64, 64, rs, F, 2.0)
        gK = epa.gK
        gen = thm3_envelopes(consts, gK / rs, F, gK / 1.0, 64, 64, 2.0)
        assert np.allclose(loc.V, gen.V, rtol=1e-12)
        assert np.allclose(loc.U, gen.U, rtol=1e-12)

    def test_scalar_oracle(self, epa, consts):
        rs = np.array([0.05, 0.2])
        F = np.array([0.7, 0.4])
        loc = thm7_envelopes(consts, epa, 50, 50, rs, F, 3.0)
        for j in range(2):
            ref = oracles.localized_V_scalar(consts.lambda1, consts.lambda2, consts.delta_star, 1,
                                        consts.C_NRmk, epa.gK, rs[j], 1.0, F[j], 50, 3.0)
            assert loc.V[0, j] == pytest.approx(ref, rel=1e-12)

    def test_r_range(self, epa, consts):
        with pytest.raises(DomainError):
            thm7_envelopes(consts, epa, 64, 64, np.array([1e-4]), np.array([1.0]), 2.0)


class TestSupNorm:
    def test_C_unit_gK(self, consts):
        m = localized_model(epanechnikov_kernel(), g_sup=4.0 / 3.0)
        assert m.gK == pytest.approx(1.0)
        assert supnorm_C(consts, m) == pytest.approx(36 * consts.C_NRmk)

    def test_ll_bound(self):
        res = LLResult(1.0, {}, 1.25, 5.0, 3)
        assert res.bound(math.e ** 3) == pytest.approx(4840 * 243 / 3)

    def test_M_hat_simplified(self, epa, consts):
        n, p = 100, 1.0
        rs = np.geomspace(1.0 / n, 1.0, 10)
        full = M_hat(consts, epa, rs, 1.0, 3.0)
        simple = M_hat_simplified(consts, epa, n, 1.0, 3.0, p)
        assert np.all(full - supnorm_C(consts, epa) <= simple * (1 + 1e-12))
        small = M_hat(consts, epa, rs, 1.0, 3.0, small=True)
        assert np.all(small < full)

    def test_supnorm_prob_bound(self, epa):
        c = structural_constants(0, 1, 2, 1)
        cover = CoverRd(1, 1.0)
        e = supnorm_envelopes(c, epa, cover, 64, 64, np.array([0.1, 0.5]),
                           np.array([0.5, 1e-6]), 3.0, 5.0)
        assert e.prob_bound == pytest.approx(243 * (4838 * math.exp(-5) + 2 / 64))
        assert e.F_hat[1] == pytest.approx(1 / 64)
        assert np.all(np.isfinite(e.U))

    def test_statistics(self):
        assert admissible(100, 1.0, 1.0)
        assert not admissible(100, 1e-3, 1.0)
        s = supnorm_ll_statistic(1.0, 100, 0.5)
        assert s == pytest.approx(math.sqrt(50) / math.sqrt(math.log(math.log(100))))

    def test_xlogx(self):
        for F in (0.1, 0.3, 1.0, 5.0):
            assert xlogx_cap(F) == pytest.approx(oracles.xlogx_cap(F))
