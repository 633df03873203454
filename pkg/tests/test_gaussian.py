import math

import numpy as np
import pytest

import oracles
from upperfn.chaining import first_type_envelopes
from upperfn.errors import DomainError
from upperfn.gaussian import (WienerIntegralModel, alpha_exponent, intrinsic_constant,
                              intrinsic_constant_direct, doubling_constant,
                              doubling_modulus_pipeline, example_catalog, gaussian_tail_model,
                              lambda1_shift_sup, modulus_p, sup_power_poly, wiener_norm_bounds,
                              thm1_pipeline)


def test_tail_model_mapping():
    V = np.array([1.0, 2.0])
    rho = np.array([[0.0, 0.5], [0.5, 0.0]])
    m = gaussian_tail_model(V, rho)
    assert m.c == 2.0
    assert np.allclose(m.A, math.sqrt(2) * V)
    assert np.allclose(m.a, math.sqrt(2) * rho)
    assert not m.B.any() and not m.b.any()


def test_gaussian_tail_consistency():
    # P(|xi| >= A sqrt(z)) <= 2 e^{-z} for xi ~ N(0, V^2), A = sqrt2 V
    from scipy.stats import norm
    for z in (0.5, 1.0, 3.0, 8.0):
        assert 2 * norm.sf(math.sqrt(2 * z)) <= 2 * math.exp(-z)


class TestWiener:
    def test_alpha_one(self):
        assert alpha_exponent(2, 1, 1) == 1.0
        assert alpha_exponent(3, 1, 5) == 1.0
        assert alpha_exponent(1.5, 1, 0.75) == pytest.approx(2 - 1 / 0.75)

    def test_sup_power_poly_brute(self):
        val, x = sup_power_poly(1.0)
        xs = np.linspace(0, 60, 600001)
        brute = np.max(2.0 ** -xs * (1 + xs ** 2) ** 4)
        assert val == pytest.approx(brute, rel=1e-9)
        assert val == pytest.approx(108855.6, rel=1e-6)
        assert x == pytest.approx(11.454, abs=1e-3)

    def test_frozen_constants(self):
        r = thm1_pipeline(WienerIntegralModel())
        c = r.constants
        assert c["c1"] == 81.0
        assert r.C1 == pytest.approx(641574958387.6719, rel=1e-12)
        assert r.C2 == pytest.approx(0.0956336, rel=1e-5)
        assert c["c8"] == pytest.approx(0.06499, abs=1e-5)
        assert c["c9"] == pytest.approx(0.09191, abs=1e-5)
        assert r.lambda1 == 1.0
        assert r.provenance["c0"] == "assumed"

    def test_C1_oracle_chain(self):
        # re-derive the chain for d=1, p=2 by hand
        c1 = 81.0
        c2 = 4 * 144.0 ** 4 * c1
        c3 = (4 * math.pi ** 2 / 3) ** 4 * c2
        sp = max(2.0 ** (-x / 1e4) * (1 + (x / 1e4) ** 2) ** 4 for x in range(0, 400000))
        c5 = 5 * c3 * sp * 2 ** 0.5
        c6 = 2 * math.sqrt(32 * c5 + 2 ** 0.5 + 1)
        assert thm1_pipeline(WienerIntegralModel()).C1 == pytest.approx(c6, rel=1e-8)

    def test_c8_scalar(self):
        taus = [128.0 * 2 ** (-j / 2) for j in range(10)]
        R0 = sum(math.exp(-t) for t in taus)
        ref = math.exp(-2 ** -1.5 * 8)
        assert thm1_pipeline(WienerIntegralModel()).constants["c8"] == pytest.approx(R0 / ref)

    def test_p_below_two_scaling(self):
        base = thm1_pipeline(WienerIntegralModel(p=2.0))
        m = WienerIntegralModel(p=1.5, mu=4.0)
        r = thm1_pipeline(m)
        assert r.C1 == pytest.approx(base.C1 * 4.0 ** ((2 - 1.5) / 3.0), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            WienerIntegralModel(gamma=0.5)
        with pytest.raises(DomainError):
            WienerIntegralModel(h_min=0.5, h_max=0.25)

    def test_bounds_decrease_with_hmax(self):
        r = thm1_pipeline(WienerIntegralModel())
        p1, _ = wiener_norm_bounds(r, WienerIntegralModel(h_max=2 ** -3))
        p2, _ = wiener_norm_bounds(r, WienerIntegralModel(h_max=2 ** -4))
        assert p2 < p1

    def test_shift_golden(self):
        assert lambda1_shift_sup() == pytest.approx(oracles.golden_shift(), abs=1e-8)
        assert lambda1_shift_sup() < 3


class TestDoubling:
    def test_catalog_ou(self):
        m = example_catalog("ou", sigma=1.0, lam=2.0)
        assert m.c_low == pytest.approx(math.sqrt(2) * math.exp(-2))
        assert m.c_high == pytest.approx(math.sqrt(2))
        assert m.beta == 0.5

    def test_catalog_fbm_levy(self):
        assert example_catalog("fbm", alpha=1.2).beta == pytest.approx(0.6)
        assert example_catalog("levy").beta == 0.5
        with pytest.raises(DomainError):
            example_catalog("fbm", alpha=2.5)
        with pytest.raises(DomainError):
            example_catalog("nope")

    def test_dual_route(self):
        a = intrinsic_constant(2)
        b = intrinsic_constant_direct(2)
        assert a == pytest.approx(b, rel=1e-9)
        assert a == pytest.approx(25544141.714255616, rel=1e-9)

    def test_frozen_levy(self):
        C, _ = doubling_constant(0.5, math.sqrt(2), math.sqrt(2), 2)
        assert C == pytest.approx(25690163.476, rel=1e-9)

    def test_doubling_grid_refinement(self):
        C1, _ = doubling_constant(0.5, math.sqrt(2), math.sqrt(2), 2, J=200)
        C2, _ = doubling_constant(0.5, math.sqrt(2), math.sqrt(2), 2, J=400)
        assert C1 == pytest.approx(C2, rel=1e-6)

    def test_ou_frozen(self):
        expect = {0.5: 1054187.51, 0.25: 558979.05, 0.1: 400784.999}
        for r, a in expect.items():
            t = doubling_modulus_pipeline(example_catalog("ou", r=r))
            assert t.C == pytest.approx(1128473097.58578, rel=1e-9)
            assert t.a == pytest.approx(a, rel=1e-6)
        assert modulus_p(0.5) == pytest.approx(2.348, abs=1e-3)

    def test_a_trend(self):
        a_small = doubling_modulus_pipeline(example_catalog("ou", r=1e-6)).a
        a_mid = doubling_modulus_pipeline(example_catalog("ou", r=1e-2)).a
        assert a_small < a_mid

    def test_vacuous_flag(self):
        t = doubling_modulus_pipeline(example_catalog("ou", r=0.5))
        assert t.extra["vacuous"] and t.bound == 1.0

    def test_vhat_below_envelope(self):
        t = doubling_modulus_pipeline(example_catalog("levy", r=0.25))
        D = np.geomspace(1e-8, 0.25, 30)
        assert np.all(t.vhat(D) <= t.envelope(D) * (1 + 1e-9))

    def test_r_domain(self):
        with pytest.raises(DomainError):
            doubling_modulus_pipeline(example_catalog("levy", r=1.5))


def test_wiener_first_type_runs():
    t = np.linspace(0.1, 1, 10)
    m = gaussian_tail_model(np.sqrt(t), np.sqrt(np.abs(t[:, None] - t[None, :])))
    tV, _, _ = first_type_envelopes(m, math.sqrt(2) - 1, 1.0)
    assert np.all(tV.values >= math.sqrt(2) ** 3 * m.A - 1e-12)
