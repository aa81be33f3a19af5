"""Report figures rendered to files next to the delimited output.

Three diagnostic panels accompany an analysis report: the trajectory in the
coordinates of its fitted cone, the invariant drifts on a log scale, and the
constancy of the angle to the cone axis.  Rendering always targets files
(Agg backend); nothing here opens a window.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import charts, dynamics
from .geom import rotation_to_axis
from .integrate import Trajectory


def _positions(traj: Trajectory) -> np.ndarray:
    kind = traj.meta.get("kind")
    if kind == "dirac":
        r, _ = dynamics.unpack_dirac(traj.states)
        return r
    if kind == "yang":
        u, r, _, _, _ = dynamics.unpack_yang(traj.states)
        return charts.stereo_to_cartesian(u, r)
    raise ValueError(f"no figure support for trajectory kind {kind!r}")


def render_report_figures(traj: Trajectory, report, out_stem) -> list[Path]:
    """Write the three report figures next to ``out_stem`` and list the paths."""
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    x = _positions(traj)
    t = traj.times
    paths: list[Path] = []

    # trajectory projected onto the frame of its cone axis
    axis = np.asarray(report.direction, dtype=float)
    completion = rotation_to_axis(axis, axis.shape[0] - 1)
    b1, b2 = completion[0], completion[1]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    ax1.plot(x @ b1, x @ b2, lw=0.8)
    ax1.scatter([0.0], [0.0], marker="+", color="k")
    ax1.set_aspect("equal")
    ax1.set_xlabel("transverse 1")
    ax1.set_ylabel("transverse 2")
    ax1.set_title("view along the cone axis")
    ax2.plot(np.linalg.norm(x - (x @ axis)[:, None] * axis, axis=1),
             x @ axis, lw=0.8)
    ax2.set_xlabel("distance from axis")
    ax2.set_ylabel("height along axis")
    ax2.set_title(f"cone profile (aperture {math.degrees(report.aperture):.2f} deg)")
    fig.tight_layout()
    path = out_stem.with_name(out_stem.name + ".trajectory.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    # invariant drifts
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    big_l = traj.monitors.get("L")
    tiny = 1e-18
    if big_l is not None:
        ax.semilogy(t, np.linalg.norm(big_l - big_l[0], axis=1) + tiny,
                    label="|L(t) - L(0)|")
    speed = traj.monitors.get("speed")
    if speed is not None:
        ax.semilogy(t, np.abs(speed - speed[0]) + tiny, label="|speed drift|")
    norm_e = traj.monitors.get("norm_e")
    if norm_e is not None:
        ax.semilogy(t, np.abs(norm_e - norm_e[0]) + tiny, label="||e| drift|")
    ax.set_xlabel("t")
    ax.set_ylabel("absolute drift")
    ax.set_title("conserved-quantity drift")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out_stem.with_name(out_stem.name + ".monitors.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    # angle to the axis against the closed-form constant
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    cos_angle = x @ axis / np.linalg.norm(x, axis=1)
    ax.plot(t, cos_angle, lw=0.8, label="cos(angle to axis)")
    ax.axhline(math.cos(report.aperture), color="k", ls="--", lw=0.8,
               label="cos(aperture)")
    ax.set_xlabel("t")
    ax.set_ylabel("cosine")
    ax.set_title("constancy of the cone angle")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out_stem.with_name(out_stem.name + ".cone.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths
