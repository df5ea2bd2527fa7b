"""Figure rendering for the CLI report path.

Every subcommand that emits time series or sweeps also renders a PNG next to
the CSV, using the Agg backend.  Figures carry no timestamps or environment
text so reruns of the same configuration produce byte-identical files (the
MANIFEST hashes them along with the data).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = dict(dpi=110, metadata={"Software": None})


def save_norms_figure(path, records) -> None:
    """Temperature and velocity norms along a simulate run."""
    t = [r.t for r in records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.2, 3.4), sharex=True)
    ax1.plot(t, [r.theta_l2 for r in records], label=r"$\|\theta\|$")
    ax1.plot(t, [r.theta_hbeta for r in records], label=r"$\|\Lambda^\beta\theta\|$")
    ax1.plot(t, [r.theta_h2beta for r in records], label=r"$\|\Lambda^{2\beta}\theta\|$")
    ax1.set_xlabel("t")
    ax1.set_title("temperature norms")
    ax1.legend(fontsize=8)
    ax2.plot(t, [r.u_l2 for r in records], label=r"$\|u\|$")
    ax2.plot(t, [r.u_halpha for r in records], label=r"$\|\Lambda^\alpha u\|$")
    ax2.plot(t, [r.u_h2alpha for r in records], label=r"$\|\Lambda^{2\alpha}u\|$")
    ax2.set_xlabel("t")
    ax2.set_title("velocity norms")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_squeezing_figure(path, result) -> None:
    """δ̂(m) against m, with the measured growth factor for reference."""
    ms = sorted(m for m, v in result.delta_hat.items() if v is not None)
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    if ms:
        ax.semilogy(ms, [result.delta_hat[m] for m in ms], "o-", label=r"$\hat\delta(m)$")
    if result.l_hat is not None:
        ax.axhline(result.l_hat, color="gray", ls="--", lw=1, label=r"$\hat{l}$")
    ax.axhline(1.0, color="black", lw=0.8)
    ax.set_xlabel("m")
    ax.set_ylabel("ratio to y(0)")
    ax.set_title("high-mode contraction vs retained modes")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_determining_figure(path, result) -> None:
    """d(t) decay curves, one per slaved mode count."""
    fig, ax = plt.subplots(figsize=(5.8, 3.8))
    for m in sorted(result.runs):
        run = result.runs[m]
        d = np.maximum(run.d_series, 1e-300)
        if np.all(run.d_series == 0.0):
            continue
        ax.semilogy(run.t_series, d, label=f"m={m}")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|Q_m w\|^2 + \|Q_m \eta\|^2$")
    ax.set_title("slaved-difference decay")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_inequalities_figure(path, reports) -> None:
    """Worst margins (hard checks) and fitted constants (soft checks)."""
    names = [r.inequality for r in reports]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    xs = np.arange(len(reports))
    vals = [r.fitted_constant if r.fitted_constant is not None else r.worst_margin for r in reports]
    colors = ["tab:orange" if r.fitted_constant is not None else "tab:blue" for r in reports]
    ax.bar(xs, vals, color=colors)
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=25, ha="right", fontsize=8)
    ax.set_ylabel("fitted constant / worst margin")
    ax.set_title("inequality suite")
    ax.axhline(0.0, color="black", lw=0.8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_threshold_figure(path, eigen, alpha: float, required: float, m_star) -> None:
    """λ_{m+1}^{α−1/2} against the determining-modes requirement."""
    ms = np.unique(np.round(np.geomspace(1, eigen.count - 1, 200)).astype(int))
    lhs = np.array([eigen.eigenvalue_of(m + 1) ** (alpha - 0.5) for m in ms])
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ax.loglog(ms, lhs, label=r"$\lambda_{m+1}^{\alpha-1/2}$")
    if np.isfinite(required) and required > 0:
        ax.axhline(required, color="tab:red", ls="--", lw=1, label="required")
    if m_star is not None and m_star >= 1:
        ax.axvline(m_star, color="gray", ls=":", lw=1, label=f"m* = {m_star}")
    ax.set_xlabel("m")
    ax.set_title("determining-modes threshold")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_gronwall_figure(path, record) -> None:
    """y(t) with the fitted exponential envelope (log scale)."""
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    y = np.maximum(record.y, 1e-300)
    ax.semilogy(record.t, y, label="y(t)")
    env_log = np.log(max(record.y[0], 1e-300)) + record.log_c_hat + record.growth_integral
    ax.semilogy(record.t, np.exp(np.minimum(env_log, 700)), "--", label="fitted envelope")
    ax.set_xlabel("t")
    ax.set_title("difference energy vs fitted bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
