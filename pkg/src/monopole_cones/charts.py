"""Coordinate charts on punctured Euclidean space and the extended Hopf maps.

The working chart combines stereographic projection of the direction (from
the north pole) with the radius: a point ``x`` in punctured R^{n+1} away from
the positive last-coordinate axis is described by ``(u, r)`` with ``u`` in
R^n and ``r = |x| > 0``:

    x = (2 r u / (|u|^2 + 1),  r (|u|^2 - 1) / (|u|^2 + 1))

All chart functions broadcast over leading axes, so a whole trajectory can be
converted in one call.  The Hopf projections and local trivializations work
on quaternion pairs; complex numbers ride along as quaternions with zero j, k
parts.
"""

from __future__ import annotations

import numpy as np

from .errors import ChartSingularity, OutsideChart, ZeroVector
from .geom import Quaternion
from .tolerances import DEFAULT as TOL


def _check_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("chart radius must be positive")
    return r


def stereo_to_cartesian(u, r) -> np.ndarray:
    """Map chart coordinates ``(u, r)`` to Cartesian coordinates.

    Parameters
    ----------
    u : array_like, shape (..., n)
    r : array_like, shape (...)

    Returns
    -------
    numpy.ndarray, shape (..., n+1)
        Cartesian point of Euclidean norm exactly ``r`` (to round-off).
    """
    u = np.asarray(u, dtype=float)
    r = _check_radius(r)
    s = 1.0 + np.sum(u * u, axis=-1)
    head = 2.0 * r[..., None] * u / s[..., None]
    last = r * (s - 2.0) / s          # (|u|^2 - 1) / (|u|^2 + 1), one rounding
    return np.concatenate([head, last[..., None]], axis=-1)


def cartesian_to_stereo(x) -> tuple[np.ndarray, np.ndarray]:
    """Inverse chart: Cartesian point(s) to ``(u, r)``.

    Raises
    ------
    ZeroVector
        If any point has norm below the zero threshold.
    ChartSingularity
        If any point lies within the guard band around the positive
        last-coordinate axis, where the chart degenerates.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < TOL.zero_vector):
        raise ZeroVector("chart is undefined at the origin")
    excess = r - x[..., -1]
    if np.any(excess < TOL.chart_guard * r):
        raise ChartSingularity(
            "point on or near the excluded positive axis of the chart")
    u = x[..., :-1] / excess[..., None]
    return u, r


def push_velocity(u, r, u_dot, r_dot) -> np.ndarray:
    """Differential of :func:`stereo_to_cartesian` applied to ``(u_dot, r_dot)``.

    The result satisfies the metric identity
    ``|x_dot|^2 = 4 r^2 |u_dot|^2 / (|u|^2+1)^2 + r_dot^2``.
    """
    u = np.asarray(u, dtype=float)
    r = _check_radius(r)
    u_dot = np.asarray(u_dot, dtype=float)
    r_dot = np.asarray(r_dot, dtype=float)
    s = 1.0 + np.sum(u * u, axis=-1)
    uu = np.sum(u * u_dot, axis=-1)
    head = (2.0 / s)[..., None] * (r_dot[..., None] * u + r[..., None] * u_dot) \
        - (4.0 * r * uu / (s * s))[..., None] * u
    last = r_dot * (s - 2.0) / s + 4.0 * r * uu / (s * s)
    return np.concatenate([head, last[..., None]], axis=-1)


def pull_velocity(u, r, x_dot) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`push_velocity` at the chart point ``(u, r)``."""
    u = np.asarray(u, dtype=float)
    r = _check_radius(r)
    x_dot = np.asarray(x_dot, dtype=float)
    x = stereo_to_cartesian(u, r)
    r_dot = np.sum(x * x_dot, axis=-1) / r
    s = 1.0 + np.sum(u * u, axis=-1)
    excess = 2.0 * r / s              # r - x_last, computed without cancellation
    u_dot = (x_dot[..., :-1] * excess[..., None]
             - x[..., :-1] * (r_dot - x_dot[..., -1])[..., None]) \
        / (excess * excess)[..., None]
    return u_dot, r_dot


# ----------------------------------------------------------------------
# extended Hopf maps
# ----------------------------------------------------------------------

def _pair_norms(z1: Quaternion, z2: Quaternion) -> tuple[float, float, float]:
    n1 = z1.norm()
    n2 = z2.norm()
    total = np.hypot(n1, n2)
    if total < TOL.zero_vector:
        raise ZeroVector("the pair (z1, z2) must be nonzero")
    return n1, n2, total


def hopf_project(z1: Quaternion, z2: Quaternion, algebra: str = "quaternion") -> np.ndarray:
    """Extended Hopf projection of a nonzero pair onto punctured R^{n+1}.

    ``f(z1, z2) = (2 z1 z2* / N, (|z1|^2 - |z2|^2) / N)`` with
    ``N = sqrt(|z1|^2 + |z2|^2)``.  Constant on fibers ``(z1 a, z2 a)`` for
    unit ``a``, and ``|f| = N``.

    Parameters
    ----------
    algebra : {"quaternion", "complex"}
        Selects the output dimension: R^5 for quaternions, R^3 for complex
        inputs (which must have zero j, k parts).
    """
    n1, n2, total = _pair_norms(z1, z2)
    prod = (z1 * z2.conjugate()) * (2.0 / total)
    last = (n1 - n2) * (n1 + n2) / total
    if algebra == "complex":
        if not (z1.is_complex() and z2.is_complex()):
            raise ValueError("complex projection requires zero j, k parts")
        return np.array([prod.w, prod.x, last])
    if algebra != "quaternion":
        raise ValueError(f"unknown algebra {algebra!r}")
    return np.array([prod.w, prod.x, prod.y, prod.z, last])


def chart_coordinates(z1: Quaternion, z2: Quaternion, chart: int,
                      algebra: str = "quaternion") -> tuple[np.ndarray, float]:
    """Chart coordinates ``(u, r)`` of a bundle point, for chart 1 or 2.

    Chart 1 divides by ``z1`` (``u = z2 z1^{-1}``), chart 2 by ``z2``
    (``u = z1 z2^{-1}``); chart 2 is the one the dynamics use.
    """
    n1, n2, total = _pair_norms(z1, z2)
    denom = {1: (z1, n1), 2: (z2, n2)}.get(chart)
    if denom is None:
        raise ValueError(f"chart must be 1 or 2, got {chart}")
    z_den, n_den = denom
    if n_den < TOL.zero_vector:
        raise OutsideChart(f"z{chart} vanishes; point outside chart {chart}")
    u = (z2 * z1.inverse()) if chart == 1 else (z1 * z2.inverse())
    if algebra == "complex":
        if not u.is_complex(1e-9):
            raise ValueError("complex chart requires zero j, k parts")
        return np.array([u.w, u.x]), float(total)
    return u.as_vector(), float(total)


def local_trivialization(z1: Quaternion, z2: Quaternion, chart: int,
                         algebra: str = "quaternion") -> tuple[np.ndarray, Quaternion]:
    """Split a bundle point into ``(base point, unit fiber coordinate)``.

    The fiber coordinate is ``z_i / |z_i|`` for the chosen chart, so acting on
    the right by a unit quaternion multiplies the fiber on the right.
    """
    if chart not in (1, 2):
        raise ValueError(f"chart must be 1 or 2, got {chart}")
    z_den = z1 if chart == 1 else z2
    if z_den.norm() < TOL.zero_vector:
        raise OutsideChart(f"z{chart} vanishes; point outside chart {chart}")
    base = hopf_project(z1, z2, algebra=algebra)
    return base, z_den.normalized()


# ----------------------------------------------------------------------
# packing helpers between K^2 and flat coordinates
# ----------------------------------------------------------------------

def split_pair(x) -> tuple[Quaternion, Quaternion]:
    """Split an R^8 (or R^4) point into its quaternion (or complex) pair."""
    x = np.asarray(x, dtype=float)
    if x.shape == (8,):
        return Quaternion(*x[:4]), Quaternion(*x[4:])
    if x.shape == (4,):
        return (Quaternion(x[0], x[1], 0.0, 0.0),
                Quaternion(x[2], x[3], 0.0, 0.0))
    raise ValueError(f"expected a 4- or 8-vector, got shape {x.shape}")


def join_pair(z1: Quaternion, z2: Quaternion, algebra: str = "quaternion") -> np.ndarray:
    """Pack a pair back into flat coordinates (R^8, or R^4 for complex)."""
    if algebra == "complex":
        return np.array([z1.w, z1.x, z2.w, z2.x])
    return np.concatenate([z1.as_vector(), z2.as_vector()])
