"""Finite-sample lower-bound certificate for metric estimation.

The certificate chains exactly computable quantities: the mean-|t| separation
of a moment-matched prior pair, a total-variation bound on the induced n-fold
mixtures obtained by telescoping products and an l1-to-l2 step whose l2 form
has the closed-form kernel (1 + theta theta'/n)^n, and concentration slacks
for the composite functionals.  Everything is deterministic given the pair.

The l2 form is also a moment series: expanding the kernel binomially, odd
moments cancel by symmetry and matched even moments wipe out every order
l <= K, leaving sum_{l>K} (m1(2l) - m0(2l))^2 C(n,2l)/n^{2l}.  The direct
kernel evaluation and the series are independent routes to the same number
and are kept as mutual oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .estimator import choose_truncation
from .priors import DiscretePrior, PriorPair, choose_K, construct_prior_pair, mean_abs, moment

__all__ = [
    "LowerBoundCertificate",
    "TelescopingResult",
    "l2_cross",
    "l2_distance_sq",
    "l2_moment_series",
    "tv_upper_bound",
    "tv_analytic_envelope",
    "separation",
    "concentration_delta",
    "lower_bound_certificate",
    "telescoping_check",
    "rate_exponent",
]

_MP_DPS = 50


def rate_exponent(beta: float, gamma: float, d: int) -> float:
    """Estimation-rate exponent (beta + gamma) / (2 beta + d)."""
    return (beta + gamma) / (2.0 * beta + d)


def _check_kernel_domain(pa: DiscretePrior, pb: DiscretePrior, n: int):
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    worst = max(abs(pa.support[0]), abs(pa.support[-1])) * \
        max(abs(pb.support[0]), abs(pb.support[-1]))
    if 1.0 - worst / n <= 0.0:
        raise ValueError(
            f"kernel (1 + t t'/n)^n undefined: requires tau^2 < n, "
            f"got tau^2 = {worst:.6g} with n = {n}"
        )


def l2_cross(pa: DiscretePrior, pb: DiscretePrior, n: int) -> float:
    """Exact double sum over both supports of w_i w_j (1 + s_i s_j / n)^n.

    Evaluated as exp(n log1p(s s'/n)) so large n cannot overflow.
    """
    _check_kernel_domain(pa, pb, n)
    prod = np.multiply.outer(pa.support, pb.support) / n
    kernel = np.exp(n * np.log1p(prod))
    weights = np.multiply.outer(pa.weights, pb.weights)
    return math.fsum((weights * kernel).ravel())


def _signed_atoms(pair: PriorPair) -> list:
    """Union support with signed weights q1 - q0."""
    atoms: dict[float, float] = {}
    for t, w in zip(pair.q1.support, pair.q1.weights):
        atoms[float(t)] = atoms.get(float(t), 0.0) + w
    for t, w in zip(pair.q0.support, pair.q0.weights):
        atoms[float(t)] = atoms.get(float(t), 0.0) - w
    return sorted(atoms.items())


def l2_distance_sq(pair: PriorPair, n: int) -> float:
    """l2 form of the per-coordinate mixture difference.

    Equals l2_cross(q1,q1) + l2_cross(q0,q0) - 2 l2_cross(q1,q0).  For a
    matched pair the three terms agree to within ~n^{-(2K+2)}, far below float
    resolution of the individual crosses, so the combination is evaluated in
    extended precision on the signed atom union: sum_{x,y} e_x e_y kernel(x,y)
    with e = q1 - q0.  Values within -1e-12 of zero clamp to zero; anything
    more negative is an error.
    """
    _check_kernel_domain(pair.q0, pair.q1, n)
    atoms = _signed_atoms(pair)
    with mp.workdps(_MP_DPS):
        total = mp.mpf(0)
        n_mp = mp.mpf(n)
        for x, ex in atoms:
            xm = mp.mpf(x)
            for y, ey in atoms:
                kernel = (1 + xm * mp.mpf(y) / n_mp) ** n
                total += mp.mpf(ex) * mp.mpf(ey) * kernel
        val = float(total)
    if val < -1e-12:
        raise ArithmeticError(f"l2 form evaluated to {val:.3e} < -1e-12")
    return max(val, 0.0)


def l2_moment_series(pair: PriorPair, n: int) -> float:
    """Moment-series route: sum_{l=1}^{floor(n/2)} (m1(2l)-m0(2l))^2 C(n,2l)/n^{2l}.

    Binomial ratios go through log-factorials to stay finite at large n.  The
    tail is cut once its envelope 4 tau^{4l}/(2l)! falls below 1e-30 of the
    accumulated sum (the series terms are nonnegative, so truncation is safe).
    """
    _check_kernel_domain(pair.q0, pair.q1, n)
    tau = pair.tau
    log_n = math.log(n)
    terms = []
    total = 0.0
    for l in range(1, n // 2 + 1):
        two_l = 2 * l
        dm = moment(pair.q1, two_l) - moment(pair.q0, two_l)
        log_ratio = (math.lgamma(n + 1) - math.lgamma(two_l + 1)
                     - math.lgamma(n - two_l + 1) - two_l * log_n)
        term = dm * dm * math.exp(log_ratio)
        terms.append(term)
        total += term
        envelope = math.exp(two_l * 2.0 * math.log(tau) - math.lgamma(two_l + 1)
                            ) * 4.0 if tau > 0 else 0.0
        if envelope < max(total, 1e-300) * 1e-30:
            break
    return math.fsum(terms)


def tv_upper_bound(pair: PriorPair, J: int, d: int, n: int) -> float:
    """Per-coordinate l1-to-l2 bound summed over 2^{dJ} coordinates.

    TV(p0, p1) <= (1/2) 2^{dJ} sqrt(l2_distance_sq); compare against
    :func:`tv_analytic_envelope` for the closed-form ceiling.
    """
    if J < 0 or d < 1:
        raise ValueError("J must be nonnegative and d positive")
    return 0.5 * 2.0 ** (d * J) * math.sqrt(l2_distance_sq(pair, n))


def tv_analytic_envelope(K: int, tau: float, J: int, d: int) -> float:
    """Closed-form ceiling 2^{dJ} tau^{2K} exp(tau^4/2) / sqrt((2K)!)."""
    if tau <= 0.0:
        return 0.0
    log_val = (d * J * math.log(2.0) + 2 * K * math.log(tau)
               - 0.5 * math.lgamma(2 * K + 1) + 0.5 * tau ** 4)
    return math.exp(log_val)


def separation(pair: PriorPair, n: int, beta: float, gamma: float, d: int) -> float:
    """Prior separation of the metric functional: n^{-(beta+gamma)/(2beta+d)} gap."""
    return n ** -rate_exponent(beta, gamma, d) * pair.gap


def concentration_delta(p: DiscretePrior, J: int, d: int, scale: float) -> float:
    """Concentration slack of the averaged functional under one prior.

    The functional is scale times the mean of 2^{dJ} i.i.d. |theta_k|; its mean
    absolute deviation is bounded by the exact sd of |t| over sqrt(count).
    """
    m1 = mean_abs(p)
    var = moment(p, 2) - m1 * m1
    sd = math.sqrt(max(var, 0.0))
    return scale * sd / math.sqrt(2.0 ** (d * J))


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Every component of the two-hypothesis risk bound, plus the bound itself.

    value = (separation / 4) (1 - min(tv_bound, 1)) - (delta0 + delta1) / 2;
    nonpositive values are flagged, not errors.
    """

    n: int
    d: int
    beta: float
    gamma: float
    J: int
    K: int
    tau: float
    separation: float
    tv_bound: float
    tv_envelope: float
    delta0: float
    delta1: float
    value: float
    flagged: bool

    def normalized_ratio(self) -> float:
        """value over the target envelope n^{-exponent} loglog(n)/log(n)."""
        denom = (self.n ** -rate_exponent(self.beta, self.gamma, self.d)
                 * math.log(math.log(self.n)) / math.log(self.n))
        return self.value / denom

    def to_json(self) -> dict:
        return {
            "n": self.n, "d": self.d, "beta": self.beta, "gamma": self.gamma,
            "J": self.J, "K": self.K, "tau": self.tau,
            "separation": self.separation, "tv_bound": self.tv_bound,
            "tv_envelope": self.tv_envelope, "delta0": self.delta0,
            "delta1": self.delta1, "value": self.value, "flagged": self.flagged,
            "normalized_ratio": self.normalized_ratio(),
        }


def lower_bound_certificate(n: int, beta: float, gamma: float, d: int,
                            c: float = 2.0, tau: float = 1.0,
                            grid_size: int = 2001,
                            pair: PriorPair | None = None) -> LowerBoundCertificate:
    """Compose prior construction, TV bound, separation and slacks into one bound.

    ``pair`` short-circuits the LP when the caller sweeps many n with shared K.
    """
    if n < 16:
        raise ValueError(f"certificate requires n >= 16, got {n}")
    K = pair.K if pair is not None else choose_K(n, c)
    if pair is None:
        pair = construct_prior_pair(K, tau, grid_size)
    J = choose_truncation(n, beta, d)
    sep = separation(pair, n, beta, gamma, d)
    tv = tv_upper_bound(pair, J, d, n)
    envelope = tv_analytic_envelope(K, pair.tau, J, d)
    scale = n ** -rate_exponent(beta, gamma, d)
    delta0 = concentration_delta(pair.q0, J, d, scale)
    delta1 = concentration_delta(pair.q1, J, d, scale)
    value = 0.25 * sep * (1.0 - min(tv, 1.0)) - 0.5 * (delta0 + delta1)
    return LowerBoundCertificate(
        n=n, d=d, beta=beta, gamma=gamma, J=J, K=K, tau=pair.tau,
        separation=sep, tv_bound=tv, tv_envelope=envelope,
        delta0=delta0, delta1=delta1, value=value, flagged=value <= 0.0,
    )


@dataclass(frozen=True)
class TelescopingResult:
    ok: bool
    lhs: float
    rhs: float


def telescoping_check(a, b) -> TelescopingResult:
    """Verify |prod a - prod b| <= sum_i |a_i - b_i| prod_{k<i} b_k prod_{k>i} a_k.

    Holds for nonnegative sequences; returns the verdict with both sides.
    """
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.ndim != 1 or av.shape != bv.shape:
        raise ValueError("sequences must be 1-d and of equal length")
    if av.size < 2:
        raise ValueError(f"sequences must have length >= 2, got {av.size}")
    if np.any(av < 0.0) or np.any(bv < 0.0):
        raise ValueError("sequences must be nonnegative")
    lhs = abs(float(np.prod(av)) - float(np.prod(bv)))
    prefix_b = np.concatenate([[1.0], np.cumprod(bv)[:-1]])
    suffix_a = np.concatenate([np.cumprod(av[::-1])[:-1][::-1], [1.0]])
    rhs = float(np.sum(np.abs(av - bv) * prefix_b * suffix_a))
    ok = lhs <= rhs + 1e-10 * max(1.0, rhs)
    return TelescopingResult(ok=ok, lhs=lhs, rhs=rhs)
