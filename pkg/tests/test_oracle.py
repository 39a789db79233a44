import math

import numpy as np
import pytest

from maxent_ml.errors import InvalidInput, InvalidRange, NoFeasiblePoint
from maxent_ml.oracle import SimplexGrid, coherent_grid_points, grid_maxent, grid_ml
from maxent_ml.solver import solve_maxent_coherent, solve_ml_scalar

from conftest import random_instance


class TestSimplexGrid:
    def test_points(self):
        P = SimplexGrid(3, 0.25).points()
        assert P.shape == (15, 3)
        assert np.all(np.abs(P.sum(axis=1) - 1) <= 1e-12)
        assert np.all(P >= 0)

    def test_default_size(self):
        assert SimplexGrid(3).points().shape[0] == math.comb(502, 2)

    @pytest.mark.parametrize("kw", [dict(m=4), dict(m=3, step=0), dict(m=2, step=0.3)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInput):
            SimplexGrid(**kw)


class TestGridMaxent:
    def test_symmetric(self):
        np.testing.assert_allclose(grid_maxent([0, 1], 0.5), [0.5, 0.5])

    def test_constant(self):
        q = grid_maxent([5, 5, 5], 5.0)
        np.testing.assert_allclose(q, [1 / 3] * 3, atol=0.002)

    def test_matches_solver(self):
        u, r = np.array([0.0, 1.0, 2.0]), np.array([0.5, 0.3, 0.2])
        q = grid_maxent(u, 0.7)
        assert np.abs(q.probs - solve_maxent_coherent(u, r).pmf.probs).sum() <= 0.01

    def test_points_are_coherent(self, rng):
        for _ in range(50):
            u, r = random_instance(rng, 3, 3)
            c = float(u @ r)
            grid = SimplexGrid(3)
            P = coherent_grid_points(u, c, grid)
            assert P.shape[0] > 0
            assert np.all(np.abs(P @ u - c) <= np.ptp(u) * grid.step)
            q = grid_maxent(u, c, grid)
            assert abs(q.probs @ u - c) <= np.ptp(u) * grid.step

    def test_infeasible(self):
        with pytest.raises(NoFeasiblePoint):
            grid_maxent([0, 1, 2], 2.5)
        with pytest.raises(NoFeasiblePoint):
            grid_maxent([5, 5, 5], 4.0)

    def test_dimension(self):
        with pytest.raises(InvalidInput):
            grid_maxent([0, 1, 2], 1.0, SimplexGrid(2))

    def test_agreement(self, rng):
        for _ in range(50):
            u, r = random_instance(rng, 3, 3)
            q = grid_maxent(u, float(u @ r))
            assert np.abs(q.probs - solve_maxent_coherent(u, r).pmf.probs).sum() <= 5 * 0.002


class TestGridMl:
    def test_zero(self):
        assert abs(grid_ml([0, 1], [0.5, 0.5], -2, 2, 1e-3)) <= 1e-3

    def test_ln3(self):
        assert abs(grid_ml([0, 1], [0.75, 0.25], 0, 2, 1e-3) - math.log(3)) <= 1e-3

    def test_constant(self):
        assert grid_ml([1, 1, 1], [0.2, 0.3, 0.5], -1.5, 2, 1e-3) == -1.5

    @pytest.mark.parametrize("lo,hi,step", [(1, 0, 0.1), (0, 1, 0), (0, math.inf, 0.1)])
    def test_invalid(self, lo, hi, step):
        with pytest.raises(InvalidRange):
            grid_ml([0, 1], [0.5, 0.5], lo, hi, step)

    def test_agreement(self, rng):
        for _ in range(100):
            u, r = random_instance(rng, 2, 3)
            lam0 = solve_ml_scalar(u, r).lambda0
            lam = grid_ml(u, r, math.floor(lam0) - 2, math.ceil(lam0) + 2, 1e-3)
            assert abs(lam - lam0) <= 1e-3
