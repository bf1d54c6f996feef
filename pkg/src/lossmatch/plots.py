"""Figure rendering for the report paths.

Renders the utility sweeps and cutoff tables next to their delimited data.
Plots are presentation only: every number they draw is also emitted as CSV,
and no verification depends on the images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_example(report, outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    by_rol: dict = {}
    for lam, rol, u in report.lam_rows:
        by_rol.setdefault(rol.compact(), []).append((float(lam), float(u)))
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, pts in by_rol.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=name)
    ax.set_xlabel("loss dominance")
    ax.set_ylabel("expected utility")
    ax.set_title(f"Utility of each report, score={float(report.omega):g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "sweep_lambda.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    by_rol = {}
    for w, rol, u in report.omega_rows:
        by_rol.setdefault(rol.compact(), []).append((float(w), float(u)))
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, pts in by_rol.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=name)
    ax.set_xlabel("priority score")
    ax.set_ylabel("expected utility")
    ax.set_title(f"Utility of each report, loss dominance={float(report.lam_for_omega):g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "sweep_omega.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def render_classify(report, outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scores = sorted(report.per_score)
    shares = [report.trm_share(s) for s in scores]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(s) for s in scores], shares)
    ax.axhline(report.trm_share(), linestyle="--", linewidth=1)
    ax.set_xlabel("priority score")
    ax.set_ylabel("top-rank monotone share")
    ax.set_ylim(0, 1)
    fig.tight_layout()
    path = outdir / "trm_shares.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_elite(report, outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    levels = [float(l) for l in report.problem.levels]
    cuts = [report.cutoffs[l] for l in report.problem.levels]
    ax.plot(levels, cuts, marker="o")
    ax.set_xlabel("loss dominance")
    ax.set_ylabel("application cutoff score")
    ax.set_ylim(0, 1)
    fig.tight_layout()
    path = outdir / "elite_cutoffs.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
