import json

import numpy as np
import pytest

from ipmlab.priors import (
    DiscretePrior,
    PriorPair,
    choose_K,
    construct_prior_pair,
    mean_abs,
    moment,
)
from oracles import prior_gap_simplex


def delta_pair(a):
    """Symmetric two-atom measure (delta_{-a} + delta_a)/2."""
    return DiscretePrior(max(a, 1.0), np.array([-a, a]), np.array([0.5, 0.5]))


def test_moment_trivials():
    p = delta_pair(0.4)
    assert moment(p, 0) == 1.0
    assert moment(p, 1) == 0.0
    assert abs(moment(p, 2) - 0.16) < 1e-15
    zero = DiscretePrior(1.0, np.array([0.0]), np.array([1.0]))
    assert mean_abs(zero) == 0.0
    assert abs(mean_abs(delta_pair(0.4)) - 0.4) < 1e-15


def test_odd_moments_vanish_exactly():
    rng = np.random.default_rng(0)
    t = np.sort(rng.random(5))
    w = rng.random(5)
    support = np.concatenate([-t[::-1], t])
    weights = np.concatenate([w[::-1], w])
    p = DiscretePrior(1.0, support, weights / weights.sum())
    for l in (1, 3, 5, 7):
        assert moment(p, l) == 0.0


def test_discrete_prior_validation():
    with pytest.raises(ValueError, match="symmetric"):
        DiscretePrior(1.0, np.array([-0.5, 1.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="sum to 1"):
        DiscretePrior(1.0, np.array([-0.5, 0.5]), np.array([0.5, 0.6]))
    with pytest.raises(ValueError, match="within"):
        DiscretePrior(0.3, np.array([-0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="increasing"):
        DiscretePrior(1.0, np.array([0.5, -0.5]), np.array([0.5, 0.5]))


def test_k1_pair_is_the_classical_solution():
    pair = construct_prior_pair(1, 1.0, 2001)
    # q1 = (delta_{-1/2} + delta_{1/2})/2; q0 = 3/4 delta_0 + 1/8 delta_{+-1}
    assert abs(pair.gap - 0.25) < 1e-8
    assert abs(pair.kappa - 0.125) < 1e-8
    assert np.allclose(pair.q1.support, [-0.5, 0.5], atol=1e-12)
    assert np.allclose(pair.q1.weights, [0.5, 0.5], atol=1e-8)
    assert np.allclose(pair.q0.support, [-1.0, 0.0, 1.0], atol=1e-12)
    assert np.allclose(pair.q0.weights, [0.125, 0.75, 0.125], atol=1e-8)


def test_k1_gap_matches_simplex_oracle():
    pair = construct_prior_pair(1, 1.0, 401)
    assert abs(pair.gap - prior_gap_simplex(1, 1.0, 401)) < 1e-6


def test_k8_pair_properties():
    pair = construct_prior_pair(8, 1.0, 2001)
    for l in range(17):
        assert abs(moment(pair.q1, l) - moment(pair.q0, l)) <= 1e-9
    assert 0.1 <= pair.gap * 8 / 1.0 <= 1.0
    # regression anchor for the grid optimum
    assert abs(pair.gap - 0.0349359731) < 1e-6


def test_gap_decreases_with_K():
    gaps = [construct_prior_pair(K, 1.0, 801).gap for K in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    # exhausting the matched orders drives the gap toward zero
    assert gaps[-1] < 0.1


def test_grid_refinement_monotone():
    for K in (2, 3):
        coarse = construct_prior_pair(K, 1.0, 501).gap
        fine = construct_prior_pair(K, 1.0, 1001).gap  # superset grid
        assert fine >= coarse - 1e-6


def test_scale_covariance():
    base = construct_prior_pair(3, 1.0, 801)
    scaled = construct_prior_pair(3, 2.5, 801)
    assert abs(scaled.gap / 2.5 - base.gap) < 1e-8
    assert abs(scaled.kappa - base.kappa) < 1e-8


def test_perturbed_variable_order_same_objective():
    # re-solving with permuted variables must land on the same optimum
    from scipy.optimize import linprog

    from ipmlab.priors import folded_lp

    t, c, A_eq, b_eq = folded_lp(4, 1.0, 601)
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    rng = np.random.default_rng(1)
    perm = rng.permutation(c.size)
    res_p = linprog(c[perm], A_eq=A_eq[:, perm], b_eq=b_eq,
                    bounds=(0, None), method="highs")
    assert abs(res.fun - res_p.fun) < 1e-8


def test_construct_validation_errors():
    with pytest.raises(ValueError, match="4K"):
        construct_prior_pair(1, 1.0, 3)
    with pytest.raises(ValueError, match="4K"):
        construct_prior_pair(8, 1.0, 35)
    with pytest.raises(ValueError):
        construct_prior_pair(0, 1.0, 100)
    with pytest.raises(ValueError):
        construct_prior_pair(1, -1.0, 100)


def test_pair_consistency_checks():
    pair = construct_prior_pair(2, 1.0, 501)
    assert abs(mean_abs(pair.q1) - mean_abs(pair.q0) - pair.gap) < 1e-12
    with pytest.raises(ValueError, match="gap"):
        PriorPair(pair.q0, pair.q1, pair.K, pair.gap + 0.1,
                  (pair.gap + 0.1) * pair.K / 2.0)


def test_pair_json_round_trip():
    pair = construct_prior_pair(2, 1.0, 501)
    blob = json.dumps(pair.to_json(), sort_keys=True)
    back = PriorPair.from_json(json.loads(blob))
    assert back.K == pair.K and back.gap == pair.gap and back.kappa == pair.kappa
    assert np.array_equal(back.q0.support, pair.q0.support)
    assert np.array_equal(back.q1.weights, pair.q1.weights)


def test_choose_K_examples():
    assert choose_K(16, 2.0) == 3
    assert choose_K(16, 1e-12) == 1   # clamp at 1
    with pytest.raises(ValueError):
        choose_K(15, 2.0)


def test_choose_K_monotone_sweep():
    ns = np.arange(16, 10 ** 6 + 1)
    vals = np.maximum(1, np.ceil(np.log(ns) / np.log(np.log(ns)))).astype(int)
    assert np.all(np.diff(vals) >= 0)
    # vectorized sweep agrees with the scalar implementation on samples
    for n in (16, 17, 100, 1234, 99999, 10 ** 6):
        assert choose_K(n, 2.0) == vals[n - 16]
