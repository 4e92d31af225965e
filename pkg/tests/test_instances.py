import json
import math

import numpy as np
import pytest
from scipy import stats

from ipmlab.besov import besov_norm, ipm_closed_form
from ipmlab.haar import DyadicDensity, analyze, eval_basis, uniform_density
from ipmlab.instances import HardInstance, build_density, draw_theta, sample, true_ipm
from ipmlab.priors import DiscretePrior, construct_prior_pair


def test_zero_theta_gives_uniform():
    h = HardInstance(dim=1, J=2, beta=1.0, gamma=0.5, n=64, theta=np.zeros(4))
    dens = build_density(h)
    assert np.abs(dens.values - 1.0).max() == 0.0
    assert true_ipm(h) == 0.0


def test_hand_built_two_cell_density():
    h = HardInstance(dim=1, J=0, beta=0.0, gamma=1.0, n=4, theta=np.array([1.0]))
    dens = build_density(h)
    assert np.allclose(dens.values, [1.5, 0.5], atol=1e-15)
    # amplitude 1/2, level-0 weight 1, one coordinate
    assert abs(true_ipm(h) - 0.5) < 1e-15


def test_analyze_recovers_theta():
    rng = np.random.default_rng(0)
    for d, J in [(1, 3), (2, 2)]:
        theta = rng.uniform(-1, 1, size=1 << (d * J))
        n = 4 ** (d * J + 2)  # large n keeps the budget comfortable
        h = HardInstance(dim=d, J=J, beta=0.5, gamma=0.5, n=n, theta=theta)
        c = analyze(build_density(h))
        mother = c.detail[J][c.n_orientations - 1]
        assert np.abs(mother - theta * h.amplitude).max() < 1e-12
        other = np.concatenate(
            [c.detail[j].ravel() for j in range(c.max_level) if j != J]
            + [c.detail[J][: c.n_orientations - 1].ravel()]
        )
        assert np.abs(other).max() < 1e-12
        assert abs(c.scaling - 1.0) < 1e-14


def test_product_form_pointwise():
    rng = np.random.default_rng(1)
    d, J = 2, 1
    theta = rng.uniform(-1, 1, size=4)
    h = HardInstance(dim=d, J=J, beta=0.5, gamma=0.5, n=256, theta=theta)
    a = h.amplitude
    dens = build_density(h)
    grid = dens.grid()
    o_star = (1 << d) - 1
    for _ in range(50):
        x = rng.random(d)
        total = 1.0 + a * sum(
            theta[k] * eval_basis(d, J, o_star, k, x) for k in range(4)
        )
        prod = 1.0
        for k in range(4):
            prod *= 1.0 + a * theta[k] * eval_basis(d, J, o_star, k, x)
        assert abs(total - prod) < 1e-12
        cell = tuple(min(int(xi * grid.shape[0]), grid.shape[0] - 1) for xi in x)
        assert abs(grid[cell] - total) < 1e-12


def test_validity_errors_name_the_coordinate():
    theta = np.zeros(4)
    theta[2] = 1.0
    bad = HardInstance(dim=1, J=2, beta=0.0, gamma=0.5, n=2, theta=theta)
    with pytest.raises(ValueError, match="k=2"):
        build_density(bad)
    # smoothness budget violation at k=1: amplitude exceeds (2^{dJ})^{-(beta/d+1/2)}
    theta2 = np.zeros(4)
    theta2[1] = 1.0
    tight = HardInstance(dim=1, J=2, beta=2.0, gamma=0.5, n=16, theta=theta2)
    with pytest.raises(ValueError, match="k=1"):
        true_ipm(tight)


def test_true_ipm_equals_closed_form():
    rng = np.random.default_rng(2)
    for d, J, gamma in [(1, 3, 0.5), (2, 1, 1.0), (1, 0, 0.0)]:
        theta = rng.uniform(-1, 1, size=1 << (d * J))
        h = HardInstance(dim=d, J=J, beta=0.3, gamma=gamma, n=4 ** (d * J + 2),
                         theta=theta)
        dens = build_density(h)
        u = analyze(uniform_density(d, J + 1))
        assert abs(true_ipm(h) - ipm_closed_form(u, analyze(dens), gamma)) < 1e-12


def test_built_density_stays_in_the_smoothness_ball():
    rng = np.random.default_rng(3)
    h = HardInstance(dim=1, J=4, beta=1.0, gamma=0.5, n=4096,
                     theta=rng.uniform(-1, 1, size=16))
    norm = besov_norm(analyze(build_density(h)), 1.0)
    assert norm <= h.M + 1.0


def test_instance_json_round_trip():
    h = HardInstance(dim=2, J=1, beta=0.7, gamma=0.3, n=100,
                     theta=np.array([0.1, -0.2, 0.3, 0.0]), M=2.0)
    back = HardInstance.from_json(json.loads(json.dumps(h.to_json())))
    assert back.dim == h.dim and back.J == h.J and back.n == h.n
    assert back.M == h.M and np.array_equal(back.theta, h.theta)


def test_draw_theta_delta_prior_and_determinism():
    p = DiscretePrior(1.0, np.array([0.0]), np.array([1.0]))
    rng = np.random.default_rng(4)
    assert np.all(draw_theta(p, 10, rng) == 0.0)
    pair = construct_prior_pair(2, 1.0, 501)
    a = draw_theta(pair.q1, 100, np.random.default_rng(7))
    b = draw_theta(pair.q1, 100, np.random.default_rng(7))
    assert np.array_equal(a, b)
    c = draw_theta(pair.q1, 100, np.random.default_rng(8))
    assert not np.array_equal(a, c)


def test_draw_theta_monte_carlo_mean_abs():
    pair = construct_prior_pair(2, 1.0, 501)
    from ipmlab.priors import mean_abs, moment

    rng = np.random.default_rng(5)
    n = 10 ** 5
    draws = np.abs(draw_theta(pair.q1, n, rng))
    want = mean_abs(pair.q1)
    sd = math.sqrt(max(moment(pair.q1, 2) - want ** 2, 0.0))
    assert abs(draws.mean() - want) <= 3.0 * sd / math.sqrt(n) + 1e-12


def test_sample_uniform_chi_square():
    dens = uniform_density(1, 3)
    rng = np.random.default_rng(6)
    pts = sample(dens, 20000, rng)
    assert pts.shape == (20000, 1)
    counts = np.histogram(pts[:, 0], bins=8, range=(0.0, 1.0))[0]
    _, pvalue = stats.chisquare(counts)
    assert pvalue > 1e-4


def test_sample_single_cell_density():
    vals = np.zeros(8)
    vals[5] = 8.0
    dens = DyadicDensity(1, 3, vals)
    pts = sample(dens, 500, np.random.default_rng(7))
    assert np.all((pts >= 5 / 8) & (pts < 6 / 8))


def test_sample_reproducible_and_in_range():
    h = HardInstance(dim=2, J=1, beta=0.5, gamma=0.5, n=256,
                     theta=np.array([0.4, -0.4, 0.2, -0.2]))
    dens = build_density(h)
    a = sample(dens, 300, np.random.default_rng(8))
    b = sample(dens, 300, np.random.default_rng(8))
    assert np.array_equal(a, b)
    assert a.shape == (300, 2)
    assert np.all((a >= 0.0) & (a < 1.0))
