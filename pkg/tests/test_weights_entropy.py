import math

import numpy as np
import pytest

import oracles
from upperfn.entropy import (EntropyProvider, build_double_net, capacity_a, chaining_capacity,
                             covering_number_greedy, doubling_ball_provider, entropy_doubling_ball,
                             entropy_log_hyperrectangle, greedy_provider, zero_entropy)
from upperfn.errors import ClassSError, DomainError
from upperfn.weights import (certification_total, certified_s_star, constant_weight,
                             dyadic_partial_sum, ensure_class_S, eval_s_star,
                             inverse_square_weight, s_star)


class TestSStar:
    def test_values(self):
        assert eval_s_star(1.0) == pytest.approx(0.6079271, abs=1e-7)
        assert eval_s_star(math.e) == pytest.approx(0.3039636, abs=1e-7)
        assert eval_s_star(1 / math.e) == pytest.approx(eval_s_star(math.e), rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            eval_s_star(0.0)
        with pytest.raises(DomainError):
            eval_s_star(-1.0)


class TestCertification:
    def test_raw_s_star_sum_fails(self):
        raw = dyadic_partial_sum(s_star(), 200)
        assert raw == pytest.approx(oracles.s_star_sum(200), rel=1e-12)
        # partial sum 3.034, with the integral tail 3.059
        assert raw == pytest.approx(3.034, abs=1e-3)
        assert certification_total(s_star()) == pytest.approx(3.06, abs=0.01)

    def test_certified_s_star(self):
        s = certified_s_star()
        assert s.certified
        assert s.normalization_factor == pytest.approx(0.32686, abs=1e-5)
        assert certification_total(s) <= 1 - 1e-9 + 1e-15

    def test_inverse_square(self):
        s = ensure_class_S(inverse_square_weight())
        # the integral tail bound is slightly loose, so the factor sits just below 1
        assert 0.99999 < s.normalization_factor <= 1.0
        assert certification_total(s) <= 1 - 1e-9 + 1e-15
        k = np.arange(0, 10 ** 6)
        assert float(np.sum(6 / math.pi ** 2 / (1.0 + k) ** 2)) < 1

    def test_constant_rejected(self):
        with pytest.raises(ClassSError):
            ensure_class_S(constant_weight(2.0))

    def test_already_in_class(self):
        s = ensure_class_S(constant_weight(0.0 + 1e-300), K=10, tail_bound=0.0)
        assert s.normalization_factor == 1.0


class TestEntropyFormulas:
    def test_doubling_ball(self):
        assert entropy_doubling_ball(2, 1, 0.25) == pytest.approx(3 * math.log(2))
        assert entropy_doubling_ball(2, 1, 2) == pytest.approx(math.log(2))
        assert entropy_doubling_ball(16, 1, 1) == pytest.approx(math.log(16))

    def test_log_hyperrectangle(self):
        assert entropy_log_hyperrectangle(1, math.e, 2) == pytest.approx(math.log(2) + 1)
        assert entropy_log_hyperrectangle(1, 1, 2 * math.e) == pytest.approx(0.0, abs=1e-15)
        assert entropy_log_hyperrectangle(3, math.e, 1) == pytest.approx(7.1589, abs=1e-4)
        with pytest.raises(DomainError):
            entropy_log_hyperrectangle(1, 0.5, 1)

    def test_provider_zero_beyond_diameter(self):
        E = doubling_ball_provider(2, 1.0)
        assert E(5.0) == 0.0
        assert E(0.1) > E(0.5) >= 0


class TestGreedyCover:
    def test_two_points(self):
        assert covering_number_greedy([0.0, 1.0], "abs", 0.4)[0] == 2
        assert covering_number_greedy([0.0, 1.0], "abs", 1.0)[0] == 1

    def test_empty(self):
        assert covering_number_greedy([], "abs", 1.0) == (0, [])

    def test_64_points(self):
        pts = np.linspace(0, 1, 64)
        count, centers = covering_number_greedy(pts, "abs", 0.1)
        opt = oracles.min_cover_1d(pts, 0.1)
        assert opt == 5
        assert 5 <= count <= 10 and count <= 2 * opt
        D = np.abs(pts[:, None] - pts[None, centers])
        assert np.all(D.min(axis=1) <= 0.1)

    def test_deterministic(self):
        pts = np.random.default_rng(3).uniform(size=40)
        assert covering_number_greedy(pts, "abs", 0.05) == covering_number_greedy(pts, "abs", 0.05)


class TestCapacity:
    def test_single_point(self):
        E = greedy_provider(D=np.zeros((1, 1)))
        assert capacity_a(certified_s_star(), 1.0, E) == 0.0

    def test_zero_kappa(self):
        s = certified_s_star()
        E = doubling_ball_provider(2, 1.0)
        assert chaining_capacity(s, s, (0.0, 0.0), E, E) == 0.0

    def test_doubling_refined_oracle(self):
        s = certified_s_star()
        E = doubling_ball_provider(2, 1.0)
        val = chaining_capacity(s, s, (1.0, 0.0), E, zero_entropy())
        ref = oracles.sup_dyadic(lambda d: d ** -2, lambda d: E(1.0 * s(d) / (48 * d)), 1e-6,
                                 n_per_octave=40, octaves=60)
        assert val > 0 and math.isfinite(val)
        assert abs(val - ref) / val < 5e-3

    def test_monotone_in_kappa(self):
        s = certified_s_star()
        E = greedy_provider(np.linspace(0, 1, 30)[:, None], "abs")
        vals = [capacity_a(s, k, E) for k in (0.5, 1.0, 2.0, 4.0)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


class TestDoubleNet:
    def test_one_point(self):
        net = build_double_net([0.0], "abs", "abs", [(1.0, 1.0)])
        assert net.centers == [0] and net.cardinality_bound == 1

    def test_two_points(self):
        net = build_double_net([0.0, 1.0], "abs", "abs", [(0.5, 0.5)])
        assert sorted(net.centers) == [0, 1]

    def test_random_clouds(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            P = rng.uniform(size=(32, 2))
            pairs = [tuple(rng.uniform(0.1, 0.8, 2)) for _ in range(rng.integers(1, 3))]
            net = build_double_net(list(P), "euclidean", "sup", pairs)
            D1 = np.sqrt(((P[:, None] - P[None, net.centers]) ** 2).sum(-1))
            D2 = np.abs(P[:, None] - P[None, net.centers]).max(-1)
            r1 = min(p[0] for p in pairs)
            r2 = min(p[1] for p in pairs)
            assert np.all(((D1 <= r1) & (D2 <= r2)).any(axis=1))
            assert len(net.centers) <= net.cardinality_bound
