"""Figure rendering for sweep outputs.

Charts are written straight to files (format from the extension; SVG works)
next to the delimited reports, so a sweep leaves both machine- and
eyeball-readable artifacts.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_rate_plot", "save_certificate_plot"]


def save_rate_plot(report, path):
    """Log-log error-vs-n chart with the fitted and theoretical slopes."""
    ns = np.array([r.n for r in report.rows], dtype=float)
    means = np.array([r.mean_error for r in report.rows])
    errs = np.array([r.stderr for r in report.rows])
    fig, ax = plt.subplots(figsize=(8.0, 6.0))
    ax.errorbar(ns, means, yerr=errs, fmt="o-", capsize=3,
                label=f"{report.config.target} mean error")
    fitted = math.exp(report.intercept) * ns ** report.slope
    ax.plot(ns, fitted, "--",
            label=f"fit slope {report.slope:.3f} +- {report.slope_stderr:.3f}")
    theory = means[0] * (ns / ns[0]) ** report.theoretical_exponent
    ax.plot(ns, theory, ":",
            label=f"theory slope {report.theoretical_exponent:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("mean |estimate - exact|")
    ax.set_title(f"target={report.config.target}  d={report.config.d}  "
                 f"beta={report.config.beta}  gamma={report.config.gamma}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_certificate_plot(certs, path):
    """Certificate components versus n (log-x, symlog-y so flags stay visible)."""
    ns = np.array([c.n for c in certs], dtype=float)
    fig, ax = plt.subplots(figsize=(8.0, 6.0))
    ax.plot(ns, [0.25 * c.separation for c in certs], "o-", label="separation / 4")
    ax.plot(ns, [0.5 * (c.delta0 + c.delta1) for c in certs], "s-",
            label="(delta0 + delta1) / 2")
    ax.plot(ns, [c.tv_bound for c in certs], "^-", label="tv bound")
    ax.plot(ns, [c.value for c in certs], "d-", label="certified value")
    ax.set_xscale("log")
    ax.set_yscale("symlog", linthresh=1e-8)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("sample size n")
    ax.set_ylabel("component value")
    ax.set_title("lower-bound certificate components")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
