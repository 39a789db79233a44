import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxent_ml.core import (
    ConstraintSystem,
    DualSolution,
    Pmf,
    Potential,
    Sample,
    as_pmf,
    coherence,
    dist,
    entropy_of_potential,
    log_likelihood,
    log_partition,
    mean_value,
    scale,
    shannon_entropy,
    shift,
)
from maxent_ml.errors import DimensionMismatch, InvalidInput, SupportMismatch

from conftest import mp_dist

# values frozen from 50-digit mpmath evaluation
DIST_1000 = [0.73105857863000487925, 0.26894142136999512075]
DIST_012 = [0.66524095577482188953, 0.24472847105479765247, 0.090030573170380457998]
COHERENCE_012 = 0.27521038260444143153
ENT_01 = 0.26894142136999512075
H_TWO_THIRDS = 0.63651416829481281845
LL_012 = -1.1076059644443803045

potentials = st.integers(2, 10).flatmap(
    lambda m: arrays(float, m, elements=st.floats(-10, 10, allow_nan=False))
)


class TestDist:
    def test_uniform(self):
        np.testing.assert_allclose(dist([0, 0, 0]), [1 / 3] * 3, rtol=0, atol=1e-15)

    def test_ln2(self):
        np.testing.assert_allclose(dist([0, math.log(2)]), [2 / 3, 1 / 3], rtol=0, atol=1e-15)

    def test_large_magnitude(self):
        p = dist([1000, 1001])
        np.testing.assert_allclose(p, DIST_1000, rtol=0, atol=1e-15)
        np.testing.assert_allclose(p, [math.e / (math.e + 1), 1 / (math.e + 1)], atol=1e-15)

    def test_extreme_no_overflow(self):
        p = dist([-800.0, 0.0, 800.0])
        assert np.all(np.isfinite(p.probs))
        assert p[0] == pytest.approx(1.0)

    def test_strictly_positive_and_normalized(self, rng):
        for _ in range(100):
            u = rng.uniform(-30, 30, rng.integers(1, 12))
            p = dist(u).probs
            assert np.all(p > 0)
            assert abs(p.sum() - 1) <= 1e-12
            np.testing.assert_allclose(p, mp_dist(u), rtol=1e-13, atol=1e-300)

    @pytest.mark.parametrize("bad", [[0.0, math.inf], [math.nan, 1.0], [], [[0, 1]]])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(InvalidInput):
            dist(bad)

    def test_accepts_potential(self):
        assert np.array_equal(dist(Potential([0, 1])).probs, dist([0, 1]).probs)


class TestShift:
    def test_identity(self):
        assert list(shift([0, 1], 0).values) == [0, 1]

    def test_shift_five(self):
        v = shift([0, 1], 5)
        assert list(v.values) == [5, 6]
        np.testing.assert_allclose(dist(v), dist([0, 1]), atol=1e-12, rtol=0)

    def test_negative(self):
        v = shift([3, 7, -2], -3)
        assert list(v.values) == [0, 4, -5]
        np.testing.assert_allclose(dist(v), dist([3, 7, -2]), atol=1e-12, rtol=0)

    def test_nonfinite(self):
        with pytest.raises(InvalidInput):
            shift([0, 1], math.nan)

    @given(potentials, st.floats(-100, 100))
    def test_invariance(self, u, C):
        assert np.max(np.abs(dist(shift(u, C)).probs - dist(u).probs)) <= 1e-12

    @given(potentials, st.floats(-5, 5), st.floats(-5, 5))
    def test_collinear_closure(self, u, lam, k):
        a = dist(scale(scale(u, k), lam)).probs
        b = dist(scale(u, lam * k)).probs
        assert np.max(np.abs(a - b)) <= 1e-12


class TestMeanValueAndCoherence:
    def test_uniform_average(self):
        assert mean_value([0, 1, 2], [1 / 3] * 3) == pytest.approx(1.0, abs=1e-15)

    def test_constant(self):
        assert mean_value([5, 5, 5], [0.2, 0.3, 0.5]) == 5.0

    def test_dot(self):
        assert mean_value([0, 1], [0.25, 0.75]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mean_value([0, 1, 2], [0.5, 0.5])

    def test_coherence_self(self):
        assert coherence([1, 4, 2], [0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.0

    def test_coherence_extremes(self):
        assert coherence([0, 1], [1, 0], [0, 1]) == -1.0

    def test_coherence_derived(self):
        c = coherence([0, 1, 2], [0.5, 0.3, 0.2], dist([0, 1, 2]))
        assert c == pytest.approx(COHERENCE_012, abs=1e-15)

    def test_coherence_mismatch(self):
        with pytest.raises(DimensionMismatch):
            coherence([0, 1], [0.5, 0.5], [1 / 3] * 3)

    @given(potentials, st.data())
    def test_antisymmetry_and_bounds(self, u, data):
        m = len(u)
        w = data.draw(arrays(float, (2, m), elements=st.floats(0.01, 1)))
        p, q = w[0] / w[0].sum(), w[1] / w[1].sum()
        assert coherence(u, p, q) == -coherence(u, q, p)
        assert u.min() <= mean_value(u, p) <= u.max()


class TestEntropies:
    def test_ent_zero(self):
        assert entropy_of_potential([0, 0, 0]) == 0.0

    def test_ent_constant(self):
        assert entropy_of_potential([5, 5, 5]) == pytest.approx(5.0, abs=1e-14)

    def test_ent_derived(self):
        assert entropy_of_potential([0, 1]) == pytest.approx(ENT_01, abs=1e-15)

    def test_shannon_degenerate(self):
        assert shannon_entropy([1, 0]) == 0.0

    def test_shannon_uniform(self):
        assert shannon_entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-15)

    def test_shannon_derived(self):
        assert shannon_entropy([2 / 3, 1 / 3]) == pytest.approx(H_TWO_THIRDS, abs=1e-15)

    def test_shannon_rejects_negative(self):
        with pytest.raises(InvalidInput):
            shannon_entropy([1.5, -0.5])

    @given(potentials)
    def test_entropy_identity(self, u):
        lhs = shannon_entropy(dist(u)) - entropy_of_potential(u)
        assert abs(lhs - log_partition(u)) <= 1e-10

    @given(potentials, st.floats(-100, 100))
    def test_gauge(self, u, C):
        assert abs(entropy_of_potential(u + C) - entropy_of_potential(u) - C) <= 1e-10

    @given(st.integers(1, 10).flatmap(lambda m: arrays(float, m, elements=st.floats(0, 1))))
    def test_shannon_bounds(self, w):
        if w.sum() == 0:
            return
        h = shannon_entropy(w / w.sum())
        assert 0 <= h <= math.log(len(w))


class TestLogLikelihood:
    def test_equality_case(self):
        assert log_likelihood([0.5, 0.5], [0.5, 0.5]) == pytest.approx(-math.log(2), abs=1e-15)

    def test_single_support(self):
        assert log_likelihood([1, 0], [0.7, 0.3]) == pytest.approx(math.log(0.7), abs=1e-15)

    def test_derived(self):
        ll = log_likelihood([0.5, 0.3, 0.2], dist([0, 1, 2]))
        assert ll == pytest.approx(LL_012, abs=1e-14)

    def test_support_mismatch(self):
        with pytest.raises(SupportMismatch):
            log_likelihood([0.5, 0.5], [1.0, 0.0])

    def test_zero_frequency_ignores_zero_prob(self):
        assert log_likelihood([1.0, 0.0], [1.0, 0.0]) == 0.0

    def test_gibbs_bound(self, rng):
        for _ in range(1000):
            m = int(rng.integers(2, 8))
            r, p = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
            assert log_likelihood(r, p) <= log_likelihood(r, r) + 1e-15
            assert log_likelihood(r, r) == pytest.approx(-shannon_entropy(r), abs=1e-14)


class TestTypes:
    def test_pmf_renormalizes_small_drift(self):
        p = as_pmf([0.5, 0.5 + 5e-10])
        assert abs(p.sum() - 1) <= 1e-15

    def test_pmf_rejects_large_drift(self):
        with pytest.raises(InvalidInput):
            Pmf([0.5, 0.6])

    def test_pmf_immutable(self):
        p = Pmf([0.5, 0.5])
        with pytest.raises(ValueError):
            p.probs[0] = 1.0

    def test_sample(self):
        s = Sample([3, 1, 0])
        assert s.total == 4
        np.testing.assert_array_equal(s.frequencies(), [0.75, 0.25, 0.0])

    @pytest.mark.parametrize("counts", [[0, 0], [-1, 2], [1.5, 2], []])
    def test_sample_invalid(self, counts):
        with pytest.raises(InvalidInput):
            Sample(counts)

    def test_constraint_system(self):
        sys = ConstraintSystem([[0, 1, 1], [2, 2, 2]], [0.5, 2])
        assert sys.shape == (2, 3)
        assert list(sys.constant_rows()) == [False, True]
        with pytest.raises(DimensionMismatch):
            ConstraintSystem([[0, 1]], [0.5, 0.5])
        with pytest.raises(InvalidInput):
            ConstraintSystem([[0, math.inf]], [0.5])

    def test_dual_solution_lambda0(self):
        sol = DualSolution(lam=[0.5], pmf=dist([0, 0.5]), residual_inf=0.0,
                           iterations=1, converged=True)
        assert sol.lambda0 == 0.5
        two = DualSolution(lam=[0.5, 1.0], pmf=dist([0, 0.5]), residual_inf=0.0,
                           iterations=1, converged=True)
        with pytest.raises(DimensionMismatch):
            two.lambda0


def test_pure_functions_thread_safe(rng):
    from concurrent.futures import ThreadPoolExecutor

    us = [rng.uniform(-5, 5, 6) for _ in range(64)]
    serial = [dist(u).probs for u in us]
    with ThreadPoolExecutor(8) as ex:
        threaded = [p.probs for p in ex.map(dist, us)]
    for a, b in zip(serial, threaded):
        assert np.array_equal(a, b)
