import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobrough import paths as P
from sobrough.controlled import (ControlledPath, compose_smooth, controlled_norm,
                                 coordinate_controlled, remainder,
                                 remainder_norm_hatW, remainder_norm_tildeV,
                                 rough_integral)
from sobrough.fields import PolyMap, PolyVectorField
from sobrough.harness import make_trig_driver, lift_smooth

import oracles

ALPHA, PP = 0.4, 4.0


def lift_line(depth, level=2):
    ts = np.linspace(0.0, 1.0, (1 << depth) + 1)[:, None]
    return P.SampledRoughPath.from_samples(ts, level, ALPHA, PP)


def lift_walk(seed, depth=4, d=1, level=2, scale=0.4):
    rng = np.random.default_rng(seed)
    pts = np.vstack([np.zeros(d), np.cumsum(scale * rng.standard_normal((1 << depth, d)), axis=0)])
    return P.SampledRoughPath.from_samples(pts, level, ALPHA, PP)


class TestRemainder:
    def test_constant_pair_zero(self):
        X = lift_walk(0)
        n = X.n_nodes
        cp = ControlledPath(X, np.full((n, 1), 2.0), np.zeros((n, 1, 1)))
        assert np.all(remainder(cp).pair == 0.0)

    def test_coordinate_projection_zero(self):
        X = lift_walk(1, d=2)
        R = remainder(coordinate_controlled(X))
        assert np.max(np.abs(R.pair)) < 1e-15

    def test_quadratic_remainder(self):
        X = lift_line(4)
        ts = X.times
        cp = ControlledPath(X, (ts**2)[:, None], (2 * ts)[:, None, None])
        R = remainder(cp)
        for (i, j) in [(0, 16), (3, 11), (7, 8)]:
            assert R.pair[i, j, 0] == pytest.approx((ts[j] - ts[i]) ** 2, rel=1e-12)


class TestRemainderNorms:
    def test_zero(self):
        R = P.IntervalFunction.from_pair_matrix(np.zeros((9, 9, 1)))
        assert remainder_norm_tildeV(R, ALPHA, PP) == 0.0
        assert remainder_norm_hatW(R, ALPHA, PP) == 0.0

    def test_quadratic_tildeV_matches_enumeration(self):
        n = 5
        ts = np.linspace(0, 1, n)
        pair = (ts[None, :] - ts[:, None]) ** 2
        pair = np.triu(pair, k=1)[:, :, None]
        R = P.IntervalFunction.from_pair_matrix(pair)
        val = remainder_norm_tildeV(R, ALPHA, PP)
        assert val == oracles.enum_tildeV(R.pair_norms(), ALPHA, PP)

    @given(st.integers(0, 200))
    @settings(max_examples=40)
    def test_tildeV_matches_enumeration_random(self, seed):
        rng = np.random.default_rng(seed)
        n = 5
        pair = np.triu(rng.random((n, n)), k=1)[:, :, None]
        R = P.IntervalFunction.from_pair_matrix(pair)
        assert remainder_norm_tildeV(R, ALPHA, PP) == \
            oracles.enum_tildeV(R.pair_norms(), ALPHA, PP)

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=20)
    def test_tildeV_scaling(self, lam):
        rng = np.random.default_rng(99)
        pair = np.triu(rng.random((9, 9)), k=1)[:, :, None]
        a = remainder_norm_tildeV(P.IntervalFunction.from_pair_matrix(lam * pair), ALPHA, PP)
        b = remainder_norm_tildeV(P.IntervalFunction.from_pair_matrix(pair), ALPHA, PP)
        assert a == pytest.approx(lam * b, rel=1e-12)

    def test_hatW_geometric_closed_form(self):
        for J in (3, 5):
            n = (1 << J) + 1
            ts = np.linspace(0, 1, n)
            pair = np.triu((ts[None, :] - ts[:, None]) ** 2, k=1)[:, :, None]
            R = P.IntervalFunction.from_pair_matrix(pair)
            # per level j: 2^{j(alpha p - 1)} * 2^j * (2^{-2j})^{p/2}
            series = sum(2.0 ** (-j * PP * (1 - ALPHA)) for j in range(J + 1))
            assert remainder_norm_hatW(R, ALPHA, PP) == pytest.approx(series ** (2 / PP), rel=1e-12)

    def test_hatW_scaling(self):
        rng = np.random.default_rng(7)
        pair = np.triu(rng.random((9, 9)), k=1)[:, :, None]
        a = remainder_norm_hatW(P.IntervalFunction.from_pair_matrix(3.0 * pair), ALPHA, PP)
        b = remainder_norm_hatW(P.IntervalFunction.from_pair_matrix(pair), ALPHA, PP)
        assert a == pytest.approx(3.0 * b, rel=1e-13)


class TestControlledNorm:
    def test_zero_path(self):
        X = lift_walk(2)
        cp = ControlledPath(X, np.zeros((X.n_nodes, 1)), np.zeros((X.n_nodes, 1, 1)))
        assert controlled_norm(cp) == 0.0

    def test_constant_path_gives_initial_value(self):
        X = lift_walk(3)
        cp = ControlledPath(X, np.full((X.n_nodes, 2), [1.5, -2.0]),
                            np.zeros((X.n_nodes, 2, 1)))
        assert controlled_norm(cp) == pytest.approx(math.hypot(1.5, 2.0), rel=1e-15)

    def test_recomposition(self):
        X = lift_walk(4)
        ts = X.times
        cp = ControlledPath(X, np.stack([ts, ts**2], axis=1),
                            np.stack([np.ones_like(ts), 2 * ts], axis=1)[:, :, None])
        R = remainder(cp)
        total = (np.linalg.norm(cp.Y[0]) + np.linalg.norm(cp.Yprime[0])
                 + P.sobolev_norm_dyadic(P.VectorPath(cp.Yprime.reshape(X.n_nodes, -1)),
                                         ALPHA, PP).value
                 + remainder_norm_tildeV(R, ALPHA, PP)
                 + remainder_norm_hatW(R, ALPHA, PP))
        assert controlled_norm(cp) == total


class TestCompose:
    def test_constant_map(self):
        X = lift_walk(5, d=2)
        c = np.array([[1.0, 2.0], [3.0, 4.0]])
        F = PolyVectorField.constant(c)
        cp = coordinate_controlled(X)
        out = compose_smooth(F, cp)
        assert np.all(out.Y == c)
        assert np.all(out.Yprime == 0.0)
        assert np.all(remainder(out).pair == 0.0)

    def test_linear_map_derivative(self, rng):
        X = lift_walk(6, d=2)
        A = rng.standard_normal((2, 2, 2))
        F = PolyVectorField.linear(A)
        cp = coordinate_controlled(X)
        out = compose_smooth(F, cp)
        # DF = A exactly, so F(Y)' = A contracted with Y' = A here (Y' = Id)
        expect = np.einsum("aib,bj->aij", A, np.eye(2))
        assert np.allclose(out.Yprime - expect[None], 0.0, atol=1e-14)

    def test_composition_stability_fitted_constant(self):
        # quadratic map, pairs at shrinking perturbation scales; the
        # remainder-difference ratio must not blow up as eps -> 0
        F = PolyVectorField(PolyMap(1, (1, 1), {
            (1,): np.array([[0.6]]), (2,): np.array([[0.25]])}))
        drv = make_trig_driver(3, 1)
        ratios = {}
        for eps in (1e-1, 1e-2, 1e-3):
            X = lift_smooth(drv.samples(5), 2, 5, ALPHA, PP)
            pert = make_trig_driver(4, 1)
            X2 = lift_smooth(drv.samples(5) + eps * pert.samples(5), 2, 5, ALPHA, PP)
            cp1, cp2 = coordinate_controlled(X), coordinate_controlled(X2)
            o1, o2 = compose_smooth(F, cp1), compose_smooth(F, cp2)
            dR = remainder(o1) - remainder(o2)
            lhs = (remainder_norm_tildeV(dR, ALPHA, PP)
                   + remainder_norm_hatW(dR, ALPHA, PP))
            dRin = remainder(cp1) - remainder(cp2)
            rhs = (remainder_norm_tildeV(dRin, ALPHA, PP)
                   + remainder_norm_hatW(dRin, ALPHA, PP)
                   + P.sobolev_norm_dyadic(
                       P.VectorPath((cp1.Yprime - cp2.Yprime).reshape(X.n_nodes, -1)),
                       ALPHA, PP).value
                   + P.mixed_dist(X, X2, ALPHA, PP).value
                   + P.inhom_sobolev_dist(X, X2, ALPHA, PP).total)
            ratios[eps] = lhs / rhs
        assert ratios[1e-3] <= 2.0 * ratios[1e-1]

    def test_requires_matching_state_dim(self):
        X = lift_walk(7, d=2)
        cp = coordinate_controlled(X)
        F = PolyVectorField.scalar([0.0, 1.0])
        with pytest.raises(P.PathError):
            compose_smooth(F, cp)


class TestRoughIntegral:
    def test_constant_integrand_exact(self):
        X = lift_walk(8, d=2, depth=5)
        n = X.n_nodes
        c = np.array([[2.0, -1.0]])
        cp = ControlledPath(X, np.tile(c, (n, 1, 1)), np.zeros((n, 1, 2, 2)))
        res = rough_integral(cp)
        x1 = X.nodes[:, X.alg.slice(1)]
        assert np.allclose(res.values[:, 0], x1 @ c[0], atol=1e-14)

    def test_telescoping_exact(self):
        for J in (4, 8, 10):
            X = lift_line(J)
            ts = X.times
            cp = ControlledPath(X, ts[:, None, None], np.ones((X.n_nodes, 1, 1, 1)))
            res = rough_integral(cp)
            assert res.values[-1, 0] == 0.5
            assert np.all(res.refinement[:, 0] == 0.5)

    def test_additivity(self):
        X = lift_walk(9, depth=5)
        cp = compose_smooth(PolyVectorField.scalar([0.1, 0.8]), coordinate_controlled(X))
        I = rough_integral(cp).values[:, 0]
        for (s, u, t) in [(0, 7, 20), (3, 16, 32), (0, 16, 32)]:
            assert (I[u] - I[s]) + (I[t] - I[u]) == pytest.approx(I[t] - I[s], abs=1e-12)

    def test_smooth_lift_matches_trapezoid_oracle(self):
        drv = make_trig_driver(11, 1)
        F = PolyVectorField(PolyMap(1, (1, 1), {(1,): np.array([[1.0]]),
                                                (2,): np.array([[0.4]])}))
        errs = []
        for J in (6, 8, 10):
            X = lift_smooth(drv.samples(J), 2, J, ALPHA, PP)
            cp = compose_smooth(F, coordinate_controlled(X))
            val = rough_integral(cp, diagnostics=False).values[-1, 0]
            fine = drv.samples(J + 6)
            g = F.eval_batch(fine)
            oracle = oracles.trapezoid_stieltjes(g, fine)[0]
            errs.append(abs(val - oracle))
        order = -np.polyfit((6, 8, 10), np.log2(errs), 1)[0]
        assert order >= 3 * ALPHA - 1 - 0.1
        assert errs[-1] < 1e-5

    def test_refinement_order_on_smooth_lift(self):
        # affine integrands telescope exactly, so use a quadratic one
        drv = make_trig_driver(12, 1)
        X = lift_smooth(drv.samples(8), 2, 8, ALPHA, PP)
        cp = compose_smooth(PolyVectorField.scalar([0.2, 0.5, 0.3]), coordinate_controlled(X))
        res = rough_integral(cp)
        assert res.refinement_order >= 3 * ALPHA - 1

    def test_integral_pair_is_controlled(self):
        # closure: (I, Y) is itself a controlled path with finite norm
        X = lift_walk(13, depth=5)
        cp = compose_smooth(PolyVectorField.scalar([0.3, 0.4]), coordinate_controlled(X))
        res = rough_integral(cp)
        out = ControlledPath(X, res.values, res.gubinelli)
        val = controlled_norm(out)
        assert math.isfinite(val) and val > 0
        dR = remainder(out).pair - res.remainder.pair
        assert np.max(np.abs(dR)) < 1e-14

    def test_integration_stability_fitted_constant(self):
        # paired drivers at shrinking eps: remainder-difference ratio stays bounded
        drv = make_trig_driver(14, 1)
        pert = make_trig_driver(15, 1)
        F = PolyVectorField.scalar([0.5, 0.3])
        ratios = {}
        for eps in (1e-1, 1e-2, 1e-3):
            X1 = lift_smooth(drv.samples(5), 2, 5, ALPHA, PP)
            X2 = lift_smooth(drv.samples(5) + eps * pert.samples(5), 2, 5, ALPHA, PP)
            cp1 = compose_smooth(F, coordinate_controlled(X1))
            cp2 = compose_smooth(F, coordinate_controlled(X2))
            r1 = rough_integral(cp1, diagnostics=False)
            r2 = rough_integral(cp2, diagnostics=False)
            dR = r1.remainder - r2.remainder
            lhs = (remainder_norm_tildeV(dR, ALPHA, PP)
                   + remainder_norm_hatW(dR, ALPHA, PP))
            dRin = remainder(cp1) - remainder(cp2)
            rhs = (remainder_norm_tildeV(dRin, ALPHA, PP)
                   + remainder_norm_hatW(dRin, ALPHA, PP)
                   + P.sobolev_norm_dyadic(
                       P.VectorPath((cp1.Yprime - cp2.Yprime).reshape(X1.n_nodes, -1)),
                       ALPHA, PP).value
                   + P.mixed_dist(X1, X2, ALPHA, PP).value
                   + P.inhom_sobolev_dist(X1, X2, ALPHA, PP).total)
            ratios[eps] = lhs / rhs
        assert ratios[1e-3] <= 2.0 * ratios[1e-1]

    def test_depth_zero_rejected(self):
        ts = np.array([[0.0], [1.0]])
        X = P.SampledRoughPath.from_samples(ts, 2, ALPHA, PP)
        cp = ControlledPath(X, np.zeros((2, 1, 1)), np.zeros((2, 1, 1, 1)))
        with pytest.raises(P.PathError):
            rough_integral(cp)

    def test_wrong_vshape_rejected(self):
        X = lift_walk(16, depth=3)
        cp = ControlledPath(X, np.zeros((X.n_nodes, 1)), np.zeros((X.n_nodes, 1, 1)))
        with pytest.raises(P.PathError):
            rough_integral(cp)
