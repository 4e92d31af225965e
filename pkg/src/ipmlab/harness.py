"""Monte Carlo rate experiments with deterministic seeding.

Each (n, replicate) task derives its own generator from the master seed, so
reports are pure functions of their configuration and identical whether
replicates run serially or on a thread pool.  Error is always the absolute
difference between the plug-in estimate and the exact metric value computed
from population coefficients.

Target families
---------------
null       both measures uniform; the error is the pure stochastic term.
boundary   fixed density with all-mother details at every level riding the
           smoothness-ball boundary with alternating signs; saturates the
           truncation bias.
hard       per-replicate perturbation with theta drawn i.i.d. from one prior
           of a moment-matched pair (replicates alternate between the two, so
           the mean error tracks the two-hypothesis average risk that the
           certificate bounds).  The prior scale saturates the smoothness
           budget exactly at every n.
dudley     empirical-measure baseline against the exact uniform reference at
           a fixed deep truncation.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .besov import ipm_closed_form
from .estimator import choose_truncation, empirical_coeffs, plugin_ipm
from .haar import DyadicDensity, WaveletCoeffs, synthesize
from .instances import HardInstance, build_density, draw_theta, sample, true_ipm
from .lecam import lower_bound_certificate, rate_exponent
from .priors import PriorPair, choose_K, construct_prior_pair

__all__ = [
    "RateSweepConfig",
    "RateRow",
    "RateReport",
    "rate_sweep",
    "fit_slope",
    "certificate_sweep",
    "certificates_csv",
    "seed_for",
    "boundary_density",
    "RATE_CSV_HEADER",
    "CERTIFICATE_CSV_HEADER",
]

_TARGETS = ("null", "boundary", "hard", "dudley")

RATE_CSV_HEADER = "n,mean_error,stderr,reps"
CERTIFICATE_CSV_HEADER = "n,separation,tv_bound,delta,value,normalized_ratio"


def seed_for(master_seed: int, n: int, replicate_index: int) -> np.random.Generator:
    """Independent generator for one (n, replicate) task.

    The three integers seed the entropy pool jointly, so distinct triples give
    distinct streams and identical triples replay bit-identical sample paths.
    """
    return np.random.default_rng([int(master_seed), int(n), int(replicate_index)])


def _resolve_workers(workers: int) -> int:
    if workers == 0:
        env = os.environ.get("IPMLAB_THREADS", "0")
        try:
            workers = int(env)
        except ValueError:
            workers = 0
    if workers == 0:
        workers = min(os.cpu_count() or 1, 8)
    return max(1, workers)


@dataclass(frozen=True)
class RateSweepConfig:
    """One rate experiment: target family, smoothness, n-grid, replication."""

    target: str
    d: int
    beta: float
    gamma: float
    n_grid: tuple
    reps: int = 50
    master_seed: int = 0
    M: float = 1.0
    carrier_level: int = 9      # boundary family resolution
    c: float = 2.0              # hard family moment-order control
    grid_size: int = 2001       # hard family prior grid
    L_max: int | None = None    # dudley truncation; default from the largest n
    workers: int = 0            # 0 = IPMLAB_THREADS or cpu count

    def validate(self):
        if self.target not in _TARGETS:
            raise ValueError(f"unknown target {self.target!r}; expected one of {_TARGETS}")
        if self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if self.beta < 0.0 or self.gamma < 0.0:
            raise ValueError("beta and gamma must be nonnegative")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) < 4:
            raise ValueError(f"n-grid needs at least 4 points, got {len(grid)}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n-grid must be strictly increasing")
        if grid[0] < 2:
            raise ValueError("n-grid entries must be at least 2")
        if self.reps < 10:
            raise ValueError(f"reps must be at least 10, got {self.reps}")
        if self.M <= 0.0:
            raise ValueError("M must be positive")
        if self.target == "hard" and grid[0] < 16:
            raise ValueError("hard family requires every n >= 16")
        if self.target == "boundary" and self.carrier_level < 1:
            raise ValueError("carrier_level must be at least 1")
        if self.L_max is not None and self.L_max < 1:
            raise ValueError("L_max must be at least 1")

    @property
    def ns(self) -> tuple:
        return tuple(int(n) for n in self.n_grid)

    def theoretical_exponent(self) -> float:
        if self.target == "dudley":
            return -1.0 / self.d
        return -rate_exponent(self.beta, self.gamma, self.d)


@dataclass(frozen=True)
class RateRow:
    n: int
    mean_error: float
    stderr: float
    reps: int


@dataclass(frozen=True)
class RateReport:
    """Aggregated sweep with the fitted log-log slope."""

    config: RateSweepConfig
    rows: tuple
    slope: float
    intercept: float
    slope_stderr: float
    theoretical_exponent: float

    def csv_text(self) -> str:
        lines = [RATE_CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.n},{r.mean_error:.17g},{r.stderr:.17g},{r.reps}")
        return "\n".join(lines) + "\n"

    def slope_summary(self) -> dict:
        return {
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "theoretical_exponent": self.theoretical_exponent,
        }


def boundary_density(d: int, beta: float, carrier_level: int, M: float = 1.0):
    """Bias-saturating target and its population coefficient tree.

    Every level below the carrier gets all-mother details of magnitude
    amp * 2^{-j(beta + d/2)} with alternating signs; amp sits on the
    smoothness ball but is capped so the density stays nonnegative for every
    sign pattern (the per-level sup norms sum to at most 1).
    """
    L = carrier_level
    cap = (1.0 - 1e-9) / math.fsum(2.0 ** (-j * beta) for j in range(L))
    amp = min(M, cap)
    n_or = (1 << d) - 1
    detail = []
    for j in range(L):
        cells = 1 << (d * j)
        level = np.zeros((n_or, cells))
        signs = np.where(np.arange(cells) % 2 == 0, 1.0, -1.0)
        level[n_or - 1] = amp * 2.0 ** (-j * (beta + 0.5 * d)) * signs
        detail.append(level)
    coeffs = WaveletCoeffs(d, L, 1.0, tuple(detail))
    fn = synthesize(coeffs)
    density = DyadicDensity(d, L, fn.values)
    return density, coeffs


def _hard_context(n: int, cfg: RateSweepConfig):
    """Prior pair saturating the smoothness budget exactly at this n."""
    J = choose_truncation(n, cfg.beta, cfg.d)
    budget = (2.0 ** (cfg.d * J)) ** -(cfg.beta / cfg.d + 0.5) * cfg.M
    tau_eff = budget * math.sqrt(n)
    K = choose_K(n, cfg.c)
    pair = construct_prior_pair(K, tau_eff, cfg.grid_size)
    return J, pair


def _replicate_error(cfg: RateSweepConfig, n: int, rep: int, ctx) -> float:
    rng = seed_for(cfg.master_seed, n, rep)
    d = cfg.d
    if cfg.target == "null":
        x = rng.random((n, d))
        y = rng.random((n, d))
        return plugin_ipm(x, y, cfg.beta, cfg.gamma, d)
    if cfg.target == "boundary":
        density, truth = ctx
        x = rng.random((n, d))
        y = sample(density, n, rng)
        return abs(plugin_ipm(x, y, cfg.beta, cfg.gamma, d) - truth)
    if cfg.target == "hard":
        J, pair = ctx
        prior = pair.q0 if rep % 2 == 0 else pair.q1
        theta = draw_theta(prior, 1 << (d * J), rng)
        inst = HardInstance(dim=d, J=J, beta=cfg.beta, gamma=cfg.gamma, n=n,
                            theta=theta, M=cfg.M)
        density = build_density(inst)
        truth = true_ipm(inst)
        x = rng.random((n, d))
        y = sample(density, n, rng)
        return abs(plugin_ipm(x, y, cfg.beta, cfg.gamma, d) - truth)
    # dudley: exact uniform reference against one deep empirical measure
    L_max, uniform_tree = ctx
    y = rng.random((n, d))
    emp = empirical_coeffs(y, L_max, d)
    return ipm_closed_form(uniform_tree, emp.coeffs, cfg.gamma)


def rate_sweep(config: RateSweepConfig) -> RateReport:
    """Run every (n, replicate) task, aggregate by sorted key, fit the slope."""
    config.validate()
    ns = config.ns
    contexts = {}
    for n in ns:
        if config.target == "boundary":
            if "boundary" not in contexts:
                density, coeffs = boundary_density(config.d, config.beta,
                                                   config.carrier_level, config.M)
                uniform_tree = WaveletCoeffs.zeros(config.d, config.carrier_level, 1.0)
                truth = ipm_closed_form(uniform_tree, coeffs, config.gamma)
                contexts["boundary"] = (density, truth)
            contexts[n] = contexts["boundary"]
        elif config.target == "hard":
            contexts[n] = _hard_context(n, config)
        elif config.target == "dudley":
            if "dudley" not in contexts:
                L_max = config.L_max
                if L_max is None:
                    L_max = math.ceil(math.log2(max(ns)) / config.d) + 2
                contexts["dudley"] = (L_max, WaveletCoeffs.zeros(config.d, L_max, 1.0))
            contexts[n] = contexts["dudley"]
        else:
            contexts[n] = None

    tasks = [(n, r) for n in ns for r in range(config.reps)]
    workers = _resolve_workers(config.workers)
    errors = {}
    if workers == 1:
        for n, r in tasks:
            errors[(n, r)] = _replicate_error(config, n, r, contexts[n])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {(n, r): pool.submit(_replicate_error, config, n, r, contexts[n])
                    for n, r in tasks}
        for key, fut in futs.items():
            errors[key] = fut.result()

    rows = []
    for n in ns:
        errs = np.array([errors[(n, r)] for r in range(config.reps)])
        stderr = float(errs.std(ddof=1) / math.sqrt(config.reps)) if config.reps > 1 else 0.0
        rows.append(RateRow(n=n, mean_error=float(errs.mean()), stderr=stderr,
                            reps=config.reps))
    slope, intercept, slope_stderr = fit_slope([(r.n, r.mean_error) for r in rows])
    return RateReport(config=config, rows=tuple(rows), slope=slope,
                      intercept=intercept, slope_stderr=slope_stderr,
                      theoretical_exponent=config.theoretical_exponent())


def fit_slope(points) -> tuple:
    """Ordinary least squares of log(error) on log(n): (slope, intercept, stderr).

    Exact-zero errors have no log; the caller should switch to a family with
    nonvanishing error instead.
    """
    pts = [(float(n), float(e)) for n, e in points]
    if len(pts) < 3:
        raise ValueError(f"slope fit needs at least 3 points, got {len(pts)}")
    if any(n <= 0 or e <= 0 for n, e in pts):
        raise ValueError("slope fit requires positive n and positive errors")
    lx = np.log([n for n, _ in pts])
    ly = np.log([e for _, e in pts])
    m = len(pts)
    sxx = float(((lx - lx.mean()) ** 2).sum())
    slope = float(((lx - lx.mean()) * (ly - ly.mean())).sum() / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    sigma_sq = float((resid ** 2).sum()) / (m - 2)
    return slope, intercept, math.sqrt(max(sigma_sq, 0.0) / sxx)


def certificate_sweep(n_grid, beta: float, gamma: float, d: int, c: float = 2.0,
                      tau: float = 1.0, grid_size: int = 2001) -> tuple:
    """Lower-bound certificates over an n-grid, reusing prior pairs per K."""
    ns = tuple(int(n) for n in n_grid)
    if not ns:
        raise ValueError("n-grid must be nonempty")
    pairs: dict[int, PriorPair] = {}
    out = []
    for n in ns:
        K = choose_K(n, c)
        if K not in pairs:
            pairs[K] = construct_prior_pair(K, tau, grid_size)
        out.append(lower_bound_certificate(n, beta, gamma, d, c=c, tau=tau,
                                           grid_size=grid_size, pair=pairs[K]))
    return tuple(out)


def certificates_csv(certs) -> str:
    lines = [CERTIFICATE_CSV_HEADER]
    for cert in certs:
        delta = 0.5 * (cert.delta0 + cert.delta1)
        lines.append(
            f"{cert.n},{cert.separation:.17g},{cert.tv_bound:.17g},"
            f"{delta:.17g},{cert.value:.17g},{cert.normalized_ratio():.17g}"
        )
    return "\n".join(lines) + "\n"
