"""Moment-matched symmetric prior pairs via a finite linear program.

Two symmetric probability measures on [-tau, tau] share all moments up to
order 2K yet differ maximally in mean absolute value.  The pair is the exact
optimum of a primal LP over a fixed symmetric grid: symmetry is imposed by
optimizing folded weights on [0, tau] and mirroring, which makes every odd
moment vanish identically and halves the problem size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "DiscretePrior",
    "PriorPair",
    "SolverError",
    "construct_prior_pair",
    "moment",
    "mean_abs",
    "choose_K",
]

_PRUNE_EPS = 1e-12


class SolverError(RuntimeError):
    """LP did not return an optimal vertex."""

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class DiscretePrior:
    """Symmetric discrete probability measure on [-tau, tau]."""

    tau: float
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        s = np.ascontiguousarray(self.support, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        if s.ndim != 1 or s.shape != w.shape:
            raise ValueError("support and weights must be 1-d arrays of equal length")
        if s.size == 0:
            raise ValueError("prior needs at least one atom")
        if np.any(np.diff(s) <= 0.0):
            raise ValueError("support must be strictly increasing")
        if np.any(np.abs(s) > self.tau * (1.0 + 1e-12) + 1e-15):
            raise ValueError(f"support must lie within [-{self.tau}, {self.tau}]")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        # t -> -t invariance: reversed support negates, reversed weights match.
        if not np.allclose(s, -s[::-1], atol=1e-12, rtol=0.0):
            raise ValueError("support is not symmetric under t -> -t")
        if not np.allclose(w, w[::-1], atol=1e-12, rtol=0.0):
            raise ValueError("weights are not symmetric under t -> -t")
        s.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    def to_json(self) -> dict:
        return {"tau": self.tau, "support": self.support.tolist(),
                "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj: dict):
        return cls(float(obj["tau"]), np.asarray(obj["support"], dtype=float),
                   np.asarray(obj["weights"], dtype=float))


def moment(p: DiscretePrior, l: int) -> float:
    """l-th raw moment, compensated summation."""
    if l < 0:
        raise ValueError(f"moment order must be nonnegative, got {l}")
    return math.fsum(w * t ** l for t, w in zip(p.support, p.weights))


def mean_abs(p: DiscretePrior) -> float:
    return math.fsum(w * abs(t) for t, w in zip(p.support, p.weights))


@dataclass(frozen=True, eq=False)
class PriorPair:
    """Pair (q0, q1) with moments matched through order 2K and gap in E|t|.

    ``gap`` = E_{q1}|t| - E_{q0}|t| >= 0 and ``kappa`` = gap * K / (2 tau) is
    the empirical constant of the construction.
    """

    q0: DiscretePrior
    q1: DiscretePrior
    K: int
    gap: float
    kappa: float

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if self.q0.tau != self.q1.tau:
            raise ValueError("q0 and q1 must share tau")
        if self.gap < 0.0:
            raise ValueError(f"gap must be nonnegative, got {self.gap}")
        got = mean_abs(self.q1) - mean_abs(self.q0)
        if abs(got - self.gap) > 1e-12 * max(1.0, abs(self.gap)):
            raise ValueError(f"stored gap {self.gap!r} differs from measures ({got!r})")
        if abs(self.kappa - self.gap * self.K / (2.0 * self.tau)) > 1e-12:
            raise ValueError("kappa must equal gap * K / (2 tau)")
        for l in range(2 * self.K + 1):
            resid = abs(moment(self.q1, l) - moment(self.q0, l))
            if resid > 1e-9:
                raise ValueError(f"moment {l} mismatch {resid:.3e} exceeds 1e-9")

    @property
    def tau(self) -> float:
        return self.q0.tau

    def to_json(self) -> dict:
        return {"tau": self.tau, "K": self.K, "gap": self.gap, "kappa": self.kappa,
                "q0": self.q0.to_json(), "q1": self.q1.to_json()}

    @classmethod
    def from_json(cls, obj: dict):
        return cls(DiscretePrior.from_json(obj["q0"]),
                   DiscretePrior.from_json(obj["q1"]),
                   int(obj["K"]), float(obj["gap"]), float(obj["kappa"]))


def folded_grid(tau: float, grid_size: int) -> np.ndarray:
    """Nonnegative half of the symmetric grid {-tau + 2 tau i / (grid_size-1)}."""
    i = np.arange(grid_size)
    s = -tau + 2.0 * tau * i / (grid_size - 1)
    if grid_size % 2 == 1:
        t = s[(grid_size - 1) // 2:].copy()
        t[0] = 0.0
    else:
        t = s[grid_size // 2:].copy()
    return t


def folded_lp(K: int, tau: float, grid_size: int):
    """Objective and equality system of the folded gap-maximization LP.

    Variables are [q0 folded weights, q1 folded weights]; minimizing the
    returned objective maximizes E_{q1}|t| - E_{q0}|t| subject to unit mass
    and equal even moments 2..2K.
    """
    t = folded_grid(tau, grid_size)
    m = t.size
    c = np.concatenate([t, -t])
    rows = [
        np.concatenate([np.ones(m), np.zeros(m)]),
        np.concatenate([np.zeros(m), np.ones(m)]),
    ]
    b = [1.0, 1.0]
    for l in range(1, K + 1):
        powers = t ** (2 * l)
        rows.append(np.concatenate([-powers, powers]))
        b.append(0.0)
    return t, c, np.array(rows), np.array(b)


def _unfold(t: np.ndarray, folded_weights: np.ndarray, tau: float) -> DiscretePrior:
    keep = folded_weights > _PRUNE_EPS
    tt, ww = t[keep], folded_weights[keep]
    ww = ww / ww.sum()
    atoms, weights = [], []
    for ti, wi in zip(tt, ww):
        if ti == 0.0:
            atoms.append(0.0)
            weights.append(wi)
        else:
            atoms.extend([-ti, ti])
            weights.extend([wi / 2.0, wi / 2.0])
    order = np.argsort(atoms)
    return DiscretePrior(tau, np.asarray(atoms)[order], np.asarray(weights)[order])


def construct_prior_pair(K: int, tau: float, grid_size: int = 2001) -> PriorPair:
    """Solve the folded LP and return the optimal moment-matched pair.

    The identical pair q0 = q1 is always feasible, so infeasibility signals an
    internal error; iteration-limit terminations surface as
    :class:`SolverError` with the iteration count.  Weights below 1e-12 are
    pruned and the measures renormalized and mirrored before packaging.
    """
    if K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    if grid_size < 4 * K + 4:
        raise ValueError(f"grid_size must be at least 4K + 4 = {4 * K + 4}, got {grid_size}")
    t, c, A_eq, b_eq = folded_lp(K, tau, grid_size)
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 1:
        raise SolverError(f"LP iteration limit reached after {res.nit} iterations",
                          iterations=int(res.nit))
    if res.status != 0:
        raise SolverError(f"LP solver failed (status {res.status}): {res.message}")
    m = t.size
    q0 = _unfold(t, res.x[:m], tau)
    q1 = _unfold(t, res.x[m:], tau)
    gap = max(mean_abs(q1) - mean_abs(q0), 0.0)
    return PriorPair(q0, q1, K, gap, gap * K / (2.0 * tau))


def choose_K(n: int, c: float) -> int:
    """Moment order (c/2) log n / log log n, rounded up and clamped to >= 1."""
    if n < 16:
        raise ValueError(f"sample size must be at least 16, got {n}")
    if c < 0.0:
        raise ValueError(f"c must be nonnegative, got {c}")
    return max(1, math.ceil(0.5 * c * math.log(n) / math.log(math.log(n))))
