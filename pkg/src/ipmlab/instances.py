"""Composite-hypothesis densities: uniform plus level-J all-mother bumps.

An instance perturbs the uniform density by n^{-1/2} sum_k theta_k h_{Jk}
using only the all-mother orientation at level J, whose basis functions have
disjoint supports across cells.  The metric value against uniform is then a
single weighted l1 sum of theta, exactly matching the closed-form coefficient
metric on the built density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .haar import DyadicDensity
from .priors import DiscretePrior

__all__ = ["HardInstance", "build_density", "true_ipm", "draw_theta", "sample"]


@dataclass(frozen=True, eq=False)
class HardInstance:
    """Perturbation parameters: amplitude is n^{-1/2}, one theta per level-J cell."""

    dim: int
    J: int
    beta: float
    gamma: float
    n: int
    theta: np.ndarray
    M: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.J < 0:
            raise ValueError(f"J must be nonnegative, got {self.J}")
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.beta < 0.0 or self.gamma < 0.0:
            raise ValueError("smoothness indices must be nonnegative")
        if self.M <= 0.0:
            raise ValueError(f"M must be positive, got {self.M}")
        th = np.ascontiguousarray(self.theta, dtype=float).ravel()
        if th.size != 1 << (self.dim * self.J):
            raise ValueError(
                f"theta must have 2^(d J) = {1 << (self.dim * self.J)} entries, got {th.size}"
            )
        if not np.all(np.isfinite(th)):
            raise ValueError("theta entries must be finite")
        th.flags.writeable = False
        object.__setattr__(self, "theta", th)

    @property
    def amplitude(self) -> float:
        return self.n ** -0.5

    @property
    def smoothness_budget(self) -> float:
        """Largest admissible amplitude * |theta_k|: (2^{dJ})^{-(beta/d + 1/2)} M."""
        return (2.0 ** (self.dim * self.J)) ** -(self.beta / self.dim + 0.5) * self.M

    def validate(self):
        """Raise naming the first offending coordinate if the instance is invalid."""
        a = self.amplitude
        peak = 2.0 ** (0.5 * self.dim * self.J)
        bad = np.abs(self.theta) * (a * peak) > 1.0 + 1e-12
        if np.any(bad):
            k = int(np.argmax(bad))
            raise ValueError(
                f"density would be negative: coordinate k={k} has "
                f"amplitude*|theta|*2^(dJ/2) = {a * peak * abs(self.theta[k]):.6g} > 1"
            )
        budget = self.smoothness_budget
        over = np.abs(self.theta) * a > budget + 1e-12
        if np.any(over):
            k = int(np.argmax(over))
            raise ValueError(
                f"smoothness budget exceeded at k={k}: amplitude*|theta| = "
                f"{a * abs(self.theta[k]):.6g} > {budget:.6g}"
            )

    def to_json(self) -> dict:
        return {"dim": self.dim, "J": self.J, "beta": self.beta, "gamma": self.gamma,
                "n": self.n, "theta": self.theta.tolist(), "M": self.M}

    @classmethod
    def from_json(cls, obj: dict):
        return cls(int(obj["dim"]), int(obj["J"]), float(obj["beta"]),
                   float(obj["gamma"]), int(obj["n"]),
                   np.asarray(obj["theta"], dtype=float), float(obj.get("M", 1.0)))


def _mother_pattern(dim: int) -> np.ndarray:
    """Sign tensor of the all-mother basis function on one cell, shape (2,)*dim."""
    return reduce(np.multiply.outer, [np.array([1.0, -1.0])] * dim)


def build_density(h: HardInstance) -> DyadicDensity:
    """Materialize 1 + n^{-1/2} sum_k theta_k h_{Jk} at resolution J + 1.

    Uses the all-mother orientation only, so bumps on distinct cells have
    disjoint supports and the product form prod_k (1 + a theta_k h_{Jk}) holds
    cellwise.
    """
    h.validate()
    d, J = h.dim, h.J
    theta_grid = h.theta.reshape((1 << J,) * d)
    bump = h.amplitude * 2.0 ** (0.5 * d * J)
    block = np.multiply.outer(theta_grid, _mother_pattern(d)) * bump
    # Interleave (cell, subcell) axes: (k_0, ..., k_{d-1}, b_0, ..., b_{d-1})
    # -> (k_0, b_0, k_1, b_1, ...), then flatten to the resolution J+1 grid.
    order = [axis for a in range(d) for axis in (a, d + a)]
    values = 1.0 + block.transpose(order).reshape((1 << (J + 1),) * d).ravel()
    return DyadicDensity(d, J + 1, values)


def true_ipm(h: HardInstance) -> float:
    """Exact metric value to uniform: (2^{-dJ})^{gamma/d + 1/2} n^{-1/2} sum |theta|."""
    h.validate()
    weight = (2.0 ** (-h.dim * h.J)) ** (h.gamma / h.dim + 0.5)
    return weight * h.amplitude * math.fsum(abs(t) for t in h.theta)


def draw_theta(p: DiscretePrior, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. draws from the discrete prior via inverse CDF."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    cdf = np.cumsum(p.weights)
    cdf[-1] = 1.0  # guard against rounding in the final bin
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return p.support[np.minimum(idx, p.support.size - 1)]


def sample(density: DyadicDensity, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. points from a dyadic density, shape (n, dim).

    Draws the cell from the categorical cell-mass distribution, then places
    the point uniformly inside; exact for piecewise constants.  Consumes one
    rng.random(n) block for cells followed by one rng.random((n, dim)) block
    for offsets.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    cdf = np.cumsum(density.values)
    cdf /= cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"),
                     density.values.size - 1)
    offsets = rng.random((n, density.dim))
    side = 1 << density.level
    points = np.empty((n, density.dim))
    for a in range(density.dim - 1, -1, -1):
        points[:, a] = (idx % side + offsets[:, a]) / side
        idx = idx // side
    return points
