import math

import numpy as np
import pytest

import oracles
from upperfn.chaining import (SQRT2M1, PartitionFamily, R_cap, TailModel, ell, first_type_envelopes,
                              modulus_envelopes, prop1_bounds, script_R, second_type_envelope,
                              u_eps_s)
from upperfn.errors import DomainError
from upperfn.gaussian import gaussian_tail_model


def wiener_model(n=24):
    t = np.linspace(0.05, 1.0, n)
    rho = np.sqrt(np.abs(t[:, None] - t[None, :]))
    return gaussian_tail_model(np.sqrt(t), rho, t), t


def bernstein_like_model(n=20, seed=0):
    rng = np.random.default_rng(seed)
    P = np.sort(rng.uniform(size=n))
    A = 1.0 + P
    B = 0.5 + 0.25 * P
    a = np.abs(P[:, None] - P[None, :])
    return TailModel(A, B, a, 0.5 * a, 2.0, P)


class TestUEps:
    def test_examples(self):
        assert u_eps_s(4, (1, 0), 0, 0.3) == pytest.approx(2.0)
        assert u_eps_s(3, (0, 1), 0, 0.3) == pytest.approx(3.0)
        assert u_eps_s(0, (1, 1), 1, 1.0) == pytest.approx(2 * math.sqrt(2) + 8, abs=1e-4)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            u_eps_s(-1, (1, 1), 0, 0.5)
        with pytest.raises(DomainError):
            u_eps_s(1, (1, 1), 0, 0.0)


class TestSingleLevel:
    def test_examples(self):
        p, _ = prop1_bounds(2, SQRT2M1, 2)
        assert p == pytest.approx(4 * math.exp(-1), abs=1e-4)
        _, m = prop1_bounds(2, SQRT2M1, 2, q=1, U=2)
        assert m == pytest.approx(2.9430, abs=1e-4)

    def test_eps_window(self):
        with pytest.raises(DomainError):
            prop1_bounds(2, 0.5, 2)
        with pytest.raises(DomainError):
            prop1_bounds(2, SQRT2M1, 0.5)

    def test_monotone_decay(self):
        vals = [prop1_bounds(2, SQRT2M1, y)[0] for y in np.linspace(1, 50, 30)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestEll:
    def test_values(self):
        assert ell(1.0) == 0.0
        assert ell(math.e) == pytest.approx(1.7464, abs=1e-4)
        assert ell(math.sqrt(2)) == pytest.approx(0.8186, abs=1e-4)
        assert ell(7.3) == pytest.approx(oracles.ell(7.3), rel=1e-14)
        with pytest.raises(DomainError):
            ell(0.5)


class TestFirstType:
    def test_single_point_price(self):
        m = TailModel([1.0], [1.0], np.zeros((1, 1)), np.zeros((1, 1)), 1.0)
        tV, _, _ = first_type_envelopes(m, SQRT2M1, 1.0)
        assert tV.extra["P"][0] == pytest.approx(2 * (2 * ell(math.sqrt(2))), abs=1e-12)
        assert tV.extra["P"][0] == pytest.approx(3.2742, abs=1e-4)

    def test_lower_bound_and_z_monotone(self):
        m = bernstein_like_model()
        eps = 0.3
        v1 = first_type_envelopes(m, eps, 2.0)[0].values
        v2 = first_type_envelopes(m, eps, 4.0)[0].values
        assert np.all(v1 >= (1 + eps) ** 3 * m.A * math.sqrt(2.0) - 1e-12)
        assert np.all(v2 > v1)

    def test_scaling_invariance(self):
        m = bernstein_like_model()
        lam = 3.7
        ms = TailModel(lam * m.A, lam * m.B, lam * m.a, lam * m.b, m.c)
        v = first_type_envelopes(m, 0.3, 2.0)[0].values
        vs = first_type_envelopes(ms, 0.3, 2.0)[0].values
        assert np.allclose(vs, lam * v, rtol=1e-9)

    def test_U_vs_V_instancewise(self):
        m = bernstein_like_model()
        tV, tU, _ = first_type_envelopes(m, 0.3, 2.0, q=1)
        mask = tU.extra["M"] >= tV.extra["P"]
        assert np.all(tU.values[mask] >= tV.values[mask] - 1e-12)

    def test_requires_positive_A_low(self):
        m = TailModel([0.0, 1.0], [1.0, 1.0], np.eye(2)[::-1], np.eye(2)[::-1], 1.0)
        with pytest.raises(DomainError):
            first_type_envelopes(m, 0.3, 1.0)

    def test_gaussian_b_zero(self):
        m, _ = wiener_model()
        tV, tU, b = first_type_envelopes(m, SQRT2M1, 2.0)
        assert np.all(np.isfinite(tV.values)) and np.all(tV.values > 0)
        assert b["probability"] == pytest.approx(
            2 * 2 * (1 + math.log1p(math.log1p(SQRT2M1)) ** -2) ** 2 * math.exp(-2))


class TestSecondType:
    def test_single_cell_matches_u_eps(self):
        m, _ = wiener_model()
        fam = PartitionFamily(m, [list(range(m.n))], [1.0], [1.0])
        eps, z = 0.5, 2.0
        tab, _ = second_type_envelope(fam, eps, z)
        Ehat, Rhat = tab.extra["E_hat"][0], tab.extra["R_hat"][0]
        gA = fam.g_A((1 + eps) ** 2)
        ref = u_eps_s(Rhat + z, ((1 + eps) * gA, 0.0), Ehat, eps)
        assert tab.values[0] == pytest.approx(ref, rel=1e-12)

    def test_constant_weights_lambda_one(self):
        m, _ = wiener_model()
        fam = PartitionFamily(m, [[i] for i in range(m.n)], np.ones(m.n), np.ones(m.n))
        assert fam.lambda1 == 1.0 and fam.lambda2 == 1.0

    def test_script_R_cap(self):
        m, t = wiener_model(32)
        fam = PartitionFamily(m, [[i] for i in range(m.n)], t, np.ones(m.n))
        sR, _, _ = script_R(fam, SQRT2M1, 0)
        assert sR <= R_cap(SQRT2M1, 0, b_zero=True)
        m2 = bernstein_like_model()
        fam2 = PartitionFamily(m2, [[i] for i in range(m2.n)], m2.A, m2.B)
        sR2, _, _ = script_R(fam2, SQRT2M1, 0)
        assert sR2 <= R_cap(SQRT2M1, 0)
        assert R_cap(SQRT2M1, 0) == pytest.approx((2 + math.log1p(math.log1p(SQRT2M1)) ** -2) ** 2)

    def test_eps_window(self):
        m, _ = wiener_model()
        fam = PartitionFamily(m, [list(range(m.n))], [1.0], [1.0])
        with pytest.raises(DomainError):
            second_type_envelope(fam, 1.5, 2.0)


class TestModulus:
    def test_diameter_anchor(self):
        m, t = wiener_model()
        d = m.a
        D = float(d.max())
        eps, z = SQRT2M1, 2.0
        tab = modulus_envelopes(m, d, [D], eps, z, theta0=0)
        assert tab.params["single_ell_form"]
        E = tab.extra["E_hat"].max()
        k = (1 + 1 / eps) ** 2
        ref = (1 + eps) ** 3 * D * math.sqrt(4 * k * E + (1 + eps) ** 2 * z)
        assert tab.values[0] == pytest.approx(ref, rel=1e-12)

    def test_increasing_in_delta(self):
        m, _ = wiener_model()
        D = float(m.a.max())
        deltas = np.geomspace(D / 50, D, 12)
        tab = modulus_envelopes(m, m.a, deltas, SQRT2M1, 2.0, theta0=3,
                                E_override=lambda Dl: 1.0)
        assert np.all(np.diff(tab.values) > 0)

    def test_global_constant(self):
        m, _ = wiener_model(12)
        D = float(m.a.max())
        tab = modulus_envelopes(m, m.a, [D / 2, D], SQRT2M1, 2.0)
        assert tab.params["c"] == 2 * m.c
        assert tab.kind == "global_modulus"

    def test_delta_range(self):
        m, _ = wiener_model(8)
        with pytest.raises(DomainError):
            modulus_envelopes(m, m.a, [10.0], SQRT2M1, 2.0, theta0=0)
