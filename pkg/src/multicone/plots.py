"""Figure rendering for workbench reports.

Every renderer writes a PNG with a fixed name into the target directory and
returns the path. The Agg backend is forced so the CLI works headless.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .domination import direction_clouds
from .projective import Multicone


def _save(fig, outdir, name):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_pressure(pb, outdir, name="pressure.png"):
    """Upper/lower pressure brackets against depth."""
    depths = list(range(1, pb.depth + 1))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(depths, pb.uppers, "o-", label="upper bound", color="#1f5fa8")
    kind = "certified" if pb.lower_certified else "heuristic"
    ax.plot(depths, pb.lowers, "s-", label=f"lower bound ({kind})",
            color="#b3541e")
    ax.fill_between(depths, pb.lowers, pb.uppers, alpha=0.15, color="gray")
    ax.set_xlabel("depth n")
    ax.set_ylabel(f"pressure bracket at s = {pb.s:g}")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, outdir, name)


def plot_kappa(rows, outdir, name="kappa.png"):
    """Almost-multiplicativity constants against depth (log scale)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([r.depth for r in rows], [max(r.kappa, 1e-300) for r in rows],
                "o-", color="#2a7d4f")
    ax.set_xlabel("depth n")
    ax.set_ylabel("kappa_n")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    return _save(fig, outdir, name)


def _draw_arcs(ax, cone: Multicone, radius, color, label):
    first = True
    for arc in cone.arcs:
        # both representatives of each projective arc
        for off in (0.0, math.pi):
            th = np.linspace(arc.start + off, arc.start + arc.length + off, 64)
            ax.plot(th, np.full_like(th, radius), color=color, lw=5,
                    solid_capstyle="butt",
                    label=label if first else None)
            first = False


def plot_cone(t, certificate, outdir, name="cone.png", cloud_depth=5):
    """Multicone arcs on the circle with u/s direction clouds.

    Accepts certificate = None; then only the clouds are drawn.
    """
    fig = plt.figure(figsize=(5.5, 5.5))
    ax = fig.add_subplot(projection="polar")
    try:
        cloud = direction_clouds(t, cloud_depth)
        us = np.concatenate([cloud.u_dirs, cloud.u_dirs + math.pi])
        ss = np.concatenate([cloud.s_dirs, cloud.s_dirs + math.pi])
        ax.plot(us, np.full_like(us, 0.84), ".", ms=3, color="#1f5fa8",
                label="u-directions")
        ax.plot(ss, np.full_like(ss, 0.68), ".", ms=3, color="#b3541e",
                label="s-directions")
    except Exception:
        pass
    if certificate is not None:
        _draw_arcs(ax, certificate.cone, 1.0, "#2a7d4f",
                   f"multicone ({certificate.mode})")
        for i in range(1, len(t) + 1):
            img = certificate.cone.apply(t.matrix(i))
            _draw_arcs(ax, img, 0.94 - 0.02 * i, "#888888",
                       "images" if i == 1 else None)
    ax.set_rlim(0, 1.1)
    ax.set_rticks([])
    ax.set_thetagrids(range(0, 360, 45))
    ax.legend(loc="upper right", bbox_to_anchor=(1.25, 1.1), fontsize=8)
    fig.tight_layout()
    return _save(fig, outdir, name)


def plot_bands(gibbs, quasi, outdir, name="bands.png"):
    """Gibbs-type and quasi-Bernoulli ratio bands against depth."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=False)
    for ax, band, title in ((axes[0], gibbs, "gibbs-type ratio"),
                            (axes[1], quasi, "quasi-bernoulli ratio")):
        ax.fill_between(band.depths, band.mins, band.maxs, alpha=0.25,
                        color="#1f5fa8")
        ax.plot(band.depths, band.mins, "v-", ms=4, color="#1f5fa8")
        ax.plot(band.depths, band.maxs, "^-", ms=4, color="#1f5fa8")
        ax.axhline(1.0, color="gray", lw=0.8, ls="--")
        ax.set_xlabel("depth n")
        ax.set_title(title, fontsize=10)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, outdir, name)


def render_report_plots(report, outdir) -> list[str]:
    """All figures that apply to the given report, written into outdir."""
    os.makedirs(outdir, exist_ok=True)
    made = []
    t = report.config.tuple()
    pb = getattr(report, "pressure", None)
    if pb is not None:
        made.append(plot_pressure(pb, outdir))
    rows = getattr(report, "kappa_rows", ())
    if rows:
        made.append(plot_kappa(rows, outdir))
    cert = None
    if getattr(report, "classification", None) is not None:
        ev = report.classification.evidence
        if ev.domination is not None and ev.domination.certificate is not None:
            cert = ev.domination.certificate
        elif ev.unstable_certificate is not None:
            cert = ev.unstable_certificate
    elif getattr(report, "domination", None) is not None:
        if report.domination.certificate is not None:
            cert = report.domination.certificate
        elif getattr(report, "unstable_certificate", None) is not None:
            cert = report.unstable_certificate
    made.append(plot_cone(t, cert, outdir,
                          cloud_depth=min(report.config.cloud_depth, 6)))
    gibbs = getattr(report, "gibbs_band", None)
    quasi = getattr(report, "quasi_band", None)
    if gibbs is not None and quasi is not None:
        made.append(plot_bands(gibbs, quasi, outdir))
    return made
