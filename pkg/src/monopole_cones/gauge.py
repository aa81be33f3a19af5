"""Connections, gauge potentials and curvatures of the two monopole bundles.

The abelian bundle lives over punctured R^3, the su(2) bundle over punctured
R^5.  The su(2) Lie algebra is represented throughout as R^3 in the basis
(i, j, k) with the Euclidean inner product; brackets are quaternion
commutators.  Matrix-valued quantities broadcast over leading axes so a whole
history of states can be evaluated in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import ChartSingularity, ZeroVector
from .geom import Quaternion, as_vector
from .integrate import rk4_step
from .tolerances import DEFAULT as TOL


# ----------------------------------------------------------------------
# abelian monopole on punctured R^3
# ----------------------------------------------------------------------

def dirac_gauge_potential(x) -> np.ndarray:
    """Coefficient triple of the abelian gauge potential in (dx, dy, dz).

    ``A = (y, -x, 0) / (2 r (z + r))`` with the imaginary unit factored out.
    Singular on the negative z-axis, which is the chart's excluded ray.
    """
    x = as_vector(x, 3, "position")
    r = float(np.linalg.norm(x))
    if r < TOL.zero_vector:
        raise ZeroVector("gauge potential undefined at the origin")
    lift = x[2] + r
    if lift < TOL.chart_guard * r:
        raise ChartSingularity("point on or near the negative z-axis")
    return np.array([x[1], -x[0], 0.0]) / (2.0 * r * lift)


def dirac_curvature(x) -> np.ndarray:
    """Curvature coefficients of (dx^dy, dx^dz, dy^dz): ``(-z, y, -x)/(2 r^3)``."""
    x = as_vector(x, 3, "position")
    r = float(np.linalg.norm(x))
    if r < TOL.zero_vector:
        raise ZeroVector("curvature undefined at the origin")
    return np.array([-x[2], x[1], -x[0]]) / (2.0 * r**3)


def dirac_vertical_field(p) -> np.ndarray:
    """Generator of the circle action on punctured R^4 at ``p``."""
    p = as_vector(p, 4, "bundle point")
    return np.array([-p[1], p[0], -p[3], p[2]])


def dirac_connection(p, tangent) -> float:
    """Connection one-form on punctured R^4 evaluated on a tangent vector.

    Normalized so the vertical generator evaluates to 1; radial vectors are
    horizontal and evaluate to 0.
    """
    p = as_vector(p, 4, "bundle point")
    tangent = as_vector(tangent, 4, "tangent")
    n2 = float(p @ p)
    if n2 < TOL.zero_vector**2:
        raise ZeroVector("connection undefined at the origin")
    return float(dirac_vertical_field(p) @ tangent) / n2


# ----------------------------------------------------------------------
# su(2) monopole on punctured R^5
# ----------------------------------------------------------------------

def vertical_fields(p) -> np.ndarray:
    """The three vertical fields of the su(2) action on punctured R^8.

    Returns shape ``(..., 3, 8)``.  Each field has norm ``|p|``, the three are
    pairwise orthogonal, and all are orthogonal to ``p``.
    """
    p = np.asarray(p, dtype=float)
    x1, x2, x3, x4, x5, x6, x7, x8 = (p[..., i] for i in range(8))
    l1 = np.stack([-x2, x1, x4, -x3, -x6, x5, x8, -x7], axis=-1)
    l2 = np.stack([-x3, -x4, x1, x2, -x7, -x8, x5, x6], axis=-1)
    l3 = np.stack([-x4, x3, -x2, x1, -x8, x7, -x6, x5], axis=-1)
    return np.stack([l1, l2, l3], axis=-2)


def su2_connection(p, tangent) -> np.ndarray:
    """su(2)-valued connection one-form on punctured R^8, in the (i, j, k) basis.

    Reproduces the basis: evaluated on the k-th vertical field it returns the
    k-th standard basis vector of R^3.
    """
    p = np.asarray(p, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    n2 = np.sum(p * p, axis=-1)
    if np.any(n2 < TOL.zero_vector**2):
        raise ZeroVector("connection undefined at the origin")
    fields = vertical_fields(p)
    return np.einsum("...kj,...j->...k", fields, tangent) / n2[..., None]


def gauge_matrix(u) -> np.ndarray:
    """The 3x4 gauge-potential matrix of the su(2) monopole in chart coordinates.

    ``A = [[-u2, u1, u4, -u3], [-u3, -u4, u1, u2], [-u4, u3, -u2, u1]]``
    divided by ``|u|^2 + 1``.  Shape ``(..., 3, 4)``.
    """
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = (u[..., i] for i in range(4))
    s = 1.0 + np.sum(u * u, axis=-1)
    rows = np.stack([
        np.stack([-u2, u1, u4, -u3], axis=-1),
        np.stack([-u3, -u4, u1, u2], axis=-1),
        np.stack([-u4, u3, -u2, u1], axis=-1),
    ], axis=-2)
    return rows / s[..., None, None]


def charge_matrix(e) -> np.ndarray:
    """Antisymmetric 4x4 matrix coupling the charge vector to the velocity.

    Linear in ``e``; shape ``(..., 4, 4)``.  Force = ``E u_dot / (2 r^2)``.
    """
    e = np.asarray(e, dtype=float)
    e1, e2, e3 = (e[..., i] for i in range(3))
    z = np.zeros_like(e1)
    return np.stack([
        np.stack([z, e1, e2, e3], axis=-1),
        np.stack([-e1, z, -e3, e2], axis=-1),
        np.stack([-e2, e3, z, -e1], axis=-1),
        np.stack([-e3, -e2, e1, z], axis=-1),
    ], axis=-2)


def spin_matrix(u, u_dot, gauge: np.ndarray | None = None) -> np.ndarray:
    """Antisymmetric 3x3 precession matrix with entries ``B_i = A_i . u_dot``.

    Drives the charge rotation ``e_dot = -2 B e``.  Pass a precomputed gauge
    matrix to avoid rebuilding it in hot loops.
    """
    u_dot = np.asarray(u_dot, dtype=float)
    a = gauge_matrix(u) if gauge is None else gauge
    b = np.einsum("...ij,...j->...i", a, u_dot)
    b1, b2, b3 = (b[..., i] for i in range(3))
    z = np.zeros_like(b1)
    return np.stack([
        np.stack([z, -b3, b2], axis=-1),
        np.stack([b3, z, -b1], axis=-1),
        np.stack([-b2, b1, z], axis=-1),
    ], axis=-2)


def yang_curvature(u, du1, du2) -> np.ndarray:
    """su(2) curvature two-form evaluated on a pair of chart tangent vectors.

    Computed quaternionically as ``(du1* du2 - du2* du1) / (2 (|u|^2+1)^2)``
    and returned in the (i, j, k) basis.  With this normalization the
    two-form expands as one half of the commutator field strength on basis
    pairs: ``F(e_a, e_b) = (dA + [A, A])_ab / 2``.
    """
    u = as_vector(u, 4, "chart point")
    q1 = Quaternion.from_vector(as_vector(du1, 4, "du1"))
    q2 = Quaternion.from_vector(as_vector(du2, 4, "du2"))
    s = 1.0 + float(u @ u)
    f = q1.conjugate() * q2 - q2.conjugate() * q1
    return f.imag / (2.0 * s * s)


def bracket(a, b) -> np.ndarray:
    """su(2) bracket of two (i, j, k)-basis vectors via quaternion commutators."""
    qa = Quaternion(0.0, *as_vector(a, 3))
    qb = Quaternion(0.0, *as_vector(b, 3))
    return (qa * qb - qb * qa).imag


def yang_identity_residuals(u, u_dot, e, fd_step: float = TOL.fd_step) -> tuple[float, float, float]:
    """Residuals of the three algebraic identities tying A, E and the charge flow.

    1. ``u . E u_dot = (|u|^2 + 1) (A u_dot . e)``          (exact algebra)
    2. ``e A E = -|e|^2 u / (|u|^2 + 1)``                   (exact algebra)
    3. ``E_dot u_dot = 2 (|u_dot|^2 E u + (u . E u_dot) u_dot
       - (u . u_dot) E u_dot) / (|u|^2 + 1)``

    The third uses a finite-difference ``E_dot`` along the curve with constant
    ``u_dot`` and the charge evolving by its precession equation, which keeps
    the check independent of the closed form it validates.
    """
    u = as_vector(u, 4, "u")
    u_dot = as_vector(u_dot, 4, "u_dot")
    e = as_vector(e, 3, "e")
    s = 1.0 + float(u @ u)
    a = gauge_matrix(u)
    big_e = charge_matrix(e)
    e_du = big_e @ u_dot
    adu_e = float((a @ u_dot) @ e)

    res1 = abs(float(u @ e_du) - s * adu_e)
    res2 = float(np.linalg.norm((e @ a) @ big_e + (e @ e) * u / s))

    def charge_flow(t: float, ev: np.ndarray) -> np.ndarray:
        return -2.0 * spin_matrix(u + t * u_dot, u_dot) @ ev

    h = fd_step

    def charge_at(t: float) -> np.ndarray:
        # a few RK4 substeps reach |t| <= 2h with error far below h^2
        ev, steps = e, 8
        for k in range(steps):
            ev = rk4_step(charge_flow, t * k / steps, ev, t / steps)
        return ev

    e_dot_fd = (charge_matrix(charge_at(h)) - charge_matrix(charge_at(-h))) / (2.0 * h)
    rhs = 2.0 * (float(u_dot @ u_dot) * (big_e @ u)
                 + float(u @ e_du) * u_dot
                 - float(u @ u_dot) * e_du) / s
    res3 = float(np.linalg.norm(e_dot_fd @ u_dot - rhs))
    return res1, res2, res3
