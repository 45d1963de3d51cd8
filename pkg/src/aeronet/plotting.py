"""Figure rendering for CLI reports.

Each renderer takes the rows already written to the delimited output and
saves a PNG next to it.  Kept deliberately simple: one figure per report,
headless backend, no styling beyond labels.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_evaluate(report, path):
    """Per-layer STP and ASE bars."""
    layers = sorted(report.per_layer_stp)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.bar([str(k) for k in layers], [report.per_layer_stp[k] for k in layers])
    ax1.axhline(report.network_stp, color="k", ls="--", lw=1, label="network")
    ax1.set_xlabel("layer")
    ax1.set_ylabel("STP")
    ax1.legend()
    ax2.bar([str(k) for k in layers], [report.per_layer_ase[k] for k in layers])
    ax2.set_xlabel("layer")
    ax2.set_ylabel("ASE [bps/Hz/m$^2$]")
    fig.suptitle(f"rule {report.rule_tag}")
    return _save(fig, path)


def plot_sweep(variable, xs, columns, path, logx=False):
    """Objective curves over the swept variable.

    ``columns`` maps a column label to a list of values (None where the
    point failed); Monte Carlo columns ending in _stderr are drawn as error
    bars on their base column.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in columns.items():
        if label.endswith("_stderr"):
            continue
        err = columns.get(label + "_stderr")
        pts = [(x, v, err[i] if err else None) for i, (x, v) in enumerate(zip(xs, values)) if v is not None]
        if not pts:
            continue
        px, pv, pe = zip(*pts)
        if err:
            ax.errorbar(px, pv, yerr=pe, fmt="o", ms=3, capsize=2, label=label)
        else:
            ax.plot(px, pv, marker=".", label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(variable)
    ax.legend()
    return _save(fig, path)


def plot_split(result, path, objective="ase"):
    """Normalized objective against the density split fraction."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.splits, result.normalized, marker=".")
    ax.axvline(result.argmax_split, color="k", ls="--", lw=1)
    ax.set_xlabel("density fraction of first layer")
    ax.set_ylabel(f"normalized {objective}")
    ax.set_title(f"total density {result.lambda_total:g} /m$^2$")
    return _save(fig, path)


def plot_validation(rows, path):
    """Analytic vs Monte Carlo values with error bars, one point per row."""
    labels = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(rows))
    ax.plot(xs, [r[1] for r in rows], "s", label="analytic")
    ax.errorbar(xs, [r[2] for r in rows], yerr=[3 * r[3] for r in rows], fmt="o", ms=3, capsize=2, label="Monte Carlo (3 se)")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.legend()
    return _save(fig, path)
