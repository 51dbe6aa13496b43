import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_affine_point, random_sigma_point
from vrnbw.measures import (
    SIGMA_GAP,
    Sigma,
    dykstra_project_to_sigma,
    in_sigma,
    project_to_sigma,
    project_to_simplex,
    support,
    uniform_on,
)


class TestUniformOn:
    def test_three_of_four(self):
        np.testing.assert_allclose(uniform_on([0, 1, 2], 4), [1 / 3, 1 / 3, 1 / 3, 0])

    def test_barycenter(self):
        n = 7
        np.testing.assert_allclose(uniform_on(range(n), n), np.full(n, 1 / n))

    def test_point_mass(self):
        np.testing.assert_allclose(uniform_on([1], 4), [0, 1, 0, 0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            uniform_on([], 4)

    def test_entropy_matches_support_size(self):
        for size in range(1, 8):
            v = uniform_on(range(size), 9)
            pos = v[v > 0]
            assert abs(-(pos * np.log(pos)).sum() - np.log(size)) < 1e-12
            assert support(v).size == size


class TestSigmaMembership:
    def test_uniform_triple_is_boundary(self):
        m = in_sigma(uniform_on([0, 1, 2], 4))
        assert m.contained and m.boundary and not m.interior

    def test_barycenter_is_interior(self):
        m = in_sigma(uniform_on(range(5), 5))
        assert m.contained and m.interior

    def test_concentrated_vector_excluded(self):
        m = in_sigma(np.array([0.5, 0.3, 0.1, 0.1]))
        assert not m.contained  # 0.5 > 1/3 + 0.1

    def test_nonprobability_excluded(self):
        assert not Sigma(4).contains(np.array([0.5, 0.5, 0.25, -0.25]))


def _kkt_multipliers_exist(v, x, tol=1e-8):
    """Verify stationarity of the projection QP with nonnegative multipliers.

    v - x must lie in the cone spanned by the outward normals of the active
    constraints plus the span of the all-ones normal; checked with
    nonnegative least squares.
    """
    from scipy.optimize import nnls

    n = v.size
    cols = [np.ones(n), -np.ones(n)]  # free equality multiplier as +/- split
    for i in range(n):
        if x[i] <= 1e-10:
            e = np.zeros(n)
            e[i] = -1.0
            cols.append(e)
    for i, j in itertools.permutations(range(n), 2):
        if x[i] - x[j] >= SIGMA_GAP - 1e-10:
            e = np.zeros(n)
            e[i], e[j] = 1.0, -1.0
            cols.append(e)
    A = np.column_stack(cols)
    target = v - x
    _, resid = nnls(A, target)
    return resid <= tol * max(1.0, np.linalg.norm(target))


def _active_set_qp_oracle(v, gap=SIGMA_GAP, max_active=4):
    """Projection onto Sigma by brute-force active-set enumeration.

    Enumerates subsets of the n + n(n-1) facet constraints, solves each
    equality-constrained QP by KKT, and returns the feasible solution whose
    multipliers are nonnegative.  Exponential, so only for small n.
    """
    n = v.size
    cons = []  # rows g with constraint g.x <= c
    rhs = []
    for i in range(n):
        g = np.zeros(n)
        g[i] = -1.0
        cons.append(g)
        rhs.append(0.0)
    for i, j in itertools.permutations(range(n), 2):
        g = np.zeros(n)
        g[i], g[j] = 1.0, -1.0
        cons.append(g)
        rhs.append(gap)
    cons = np.array(cons)
    rhs = np.array(rhs)
    ones = np.ones(n)
    best = None
    for k in range(0, max_active + 1):
        for sel in itertools.combinations(range(len(cons)), k):
            G = np.vstack([ones[None, :], cons[list(sel)]])
            c = np.concatenate([[1.0], rhs[list(sel)]])
            # KKT: [I G^T; G 0] [x; lam] = [v; c]
            m = G.shape[0]
            K = np.block([[np.eye(n), G.T], [G, np.zeros((m, m))]])
            try:
                sol = np.linalg.solve(K, np.concatenate([v, c]))
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n + 1 :]
            if np.any(lam < -1e-10):
                continue
            if (cons @ x - rhs).max() > 1e-10:
                continue
            if best is None or np.linalg.norm(x - v) < np.linalg.norm(best - v) - 1e-12:
                best = x
        if best is not None:
            return best
    raise RuntimeError("active-set enumeration failed")


class TestProjection:
    def test_identity_on_sigma(self, rng):
        for n in (4, 5, 6):
            for _ in range(20):
                v = random_sigma_point(rng, n)
                np.testing.assert_allclose(project_to_sigma(v), v, atol=1e-12)

    def test_against_active_set_oracle(self, rng):
        for _ in range(25):
            v = random_affine_point(rng, 4)
            mine = project_to_sigma(v)
            oracle = _active_set_qp_oracle(v)
            np.testing.assert_allclose(mine, oracle, atol=1e-9)
            assert _kkt_multipliers_exist(v, mine)

    def test_spec_corner_case_qp(self):
        v = np.array([0.7, 0.1, 0.1, 0.1])
        x = project_to_sigma(v)
        oracle = _active_set_qp_oracle(v)
        np.testing.assert_allclose(x, oracle, atol=1e-10)
        assert _kkt_multipliers_exist(v, x)
        assert x.max() - x.min() <= SIGMA_GAP + 1e-12

    def test_vertex_certificate(self, rng):
        # projection of a simplex vertex beats 1e4 random feasible points
        v = np.array([1.0, 0.0, 0.0, 0.0])
        x = project_to_sigma(v)
        d = np.linalg.norm(x - v)
        for _ in range(10_000):
            w = random_sigma_point(rng, 4)
            assert d <= np.linalg.norm(w - v) + 1e-10

    def test_idempotent(self, rng):
        for _ in range(50):
            v = random_affine_point(rng, 6)
            x = project_to_sigma(v)
            np.testing.assert_allclose(project_to_sigma(x), x, atol=1e-10)

    def test_band_bound_on_output(self, rng):
        for _ in range(50):
            x = project_to_sigma(random_affine_point(rng, 5))
            assert x.max() - x.min() <= SIGMA_GAP + 1e-12
            assert x.min() >= -1e-14
            assert abs(x.sum() - 1.0) <= 1e-12

    def test_agrees_with_dykstra(self, rng):
        for n in (4, 6, 8):
            for _ in range(10):
                v = random_affine_point(rng, n)
                np.testing.assert_allclose(
                    project_to_sigma(v),
                    dykstra_project_to_sigma(v, iters=2000),
                    atol=1e-8,
                )

    @given(
        st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=4, max_size=9),
        st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=4, max_size=9),
    )
    @settings(max_examples=60, deadline=None)
    def test_lipschitz_pairs(self, xs, ys):
        n = min(len(xs), len(ys))
        u = np.array(xs[:n])
        v = np.array(ys[:n])
        u -= (u.sum() - 1.0) / n
        v -= (v.sum() - 1.0) / n
        pu, pv = project_to_sigma(u), project_to_sigma(v)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-10

    def test_simplex_projection_threshold(self):
        v = np.array([0.9, 0.4, -0.3])
        x = project_to_simplex(v)
        assert abs(x.sum() - 1.0) < 1e-12 and x.min() >= 0.0
