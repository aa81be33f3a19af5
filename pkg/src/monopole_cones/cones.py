"""k-dimensional cones in R^n and their geodesics.

A cone (vertex at the origin) is the set of points whose radial projection
onto the unit sphere lies in a fixed affine k-plane meeting the sphere in
more than one point.  Stored as that generating plane, with the aperture
``psi in (0, pi/2]`` derived from the offset norm (``cos psi = |offset|``)
and, for hyperplane cones, the axis direction parallel to the offset.

The canonical position puts the generating plane's span on the first k
coordinate axes and its offset on axis k+1; geodesics are then integrable in
the stereographic cone chart

    phi(v, r) = (2 v r sin(psi) / (|v|^2+1),
                 (|v|^2-1) r sin(psi) / (|v|^2+1),
                 r cos(psi)).

Everything here is pure and immutable; fits and integrations over different
sample sets can run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import stencils
from .errors import (ChartSingularity, CollidingTrajectory, DegenerateApex,
                     NoIntersection, NotOnCone, PoorFit, ZeroVector)
from .geom import (AffinePlane, Sphere, as_vector, orthonormalize,
                   rotation_from_frame, rotation_to_axis, unit)
from .tolerances import DEFAULT as TOL


def _normal_completion(basis: np.ndarray) -> np.ndarray:
    """Deterministic unit normal to an (n-1)-dimensional row-span in R^n."""
    n = basis.shape[1]
    projector = np.eye(n) - basis.T @ basis
    # project axis vectors in index order; the first with a healthy residual
    # fixes the normal, its sign chosen by the first significant component
    for i in range(n):
        candidate = projector[:, i]
        norm = np.linalg.norm(candidate)
        if norm > 0.5:
            normal = candidate / norm
            for comp in normal:
                if abs(comp) > TOL.zero_vector:
                    return normal if comp > 0 else -normal
    raise ValueError("basis does not span a hyperplane")


@dataclass(frozen=True)
class Cone:
    """A k-dimensional cone in R^n, stored as its generating affine plane.

    ``aperture`` is the angle in (0, pi/2] with cosine equal to the offset
    norm.  ``direction`` is the unit axis (parallel to the offset); for flat
    hyperplane cones (offset zero) it is a deterministic normal completion
    and ``is_flat`` is set, and for flat lower-dimensional cones it is None.
    """

    plane: AffinePlane
    aperture: float
    direction: np.ndarray | None

    @classmethod
    def from_plane(cls, plane: AffinePlane) -> "Cone":
        offset_norm = float(np.linalg.norm(plane.offset))
        if offset_norm >= 1.0 - TOL.zero_vector:
            raise NoIntersection(
                f"plane offset norm {offset_norm:.12f} leaves at most one sphere point")
        aperture = math.acos(min(offset_norm, 1.0))
        if offset_norm > TOL.zero_vector:
            direction = plane.offset / offset_norm
        elif plane.dim == plane.ambient_dim - 1:
            direction = _normal_completion(plane.basis)
        else:
            direction = None
        return cls(plane=plane, aperture=aperture, direction=direction)

    @property
    def ambient_dim(self) -> int:
        return self.plane.ambient_dim

    @property
    def dim(self) -> int:
        return self.plane.dim

    @property
    def is_flat(self) -> bool:
        """True when the generating plane passes through the origin (psi = pi/2)."""
        return float(np.linalg.norm(self.plane.offset)) <= TOL.zero_vector

    def membership_residual(self, x) -> np.ndarray:
        """Distance of the radial projection of ``x`` from the generating plane."""
        x = np.asarray(x, dtype=float)
        norms = np.linalg.norm(x, axis=-1)
        if np.any(norms < TOL.zero_vector):
            raise ZeroVector("the origin belongs to no cone")
        return self.plane.residual(x / norms[..., None])

    def contains(self, x, tol: float = TOL.cone_membership) -> bool:
        return bool(np.all(self.membership_residual(x) <= tol))

    def same_cone(self, other: "Cone", tol: float = 1e-8) -> bool:
        return self.plane.same_plane(other.plane, tol)


def cone_from_direction(direction, psi: float, ambient_dim: int) -> Cone:
    """Hyperplane cone of aperture ``psi`` directed along ``direction``.

    Membership means ``x . direction = |x| |direction| cos(psi)``; the
    opposite nappe is excluded.  The plane basis is completed from the
    direction by a deterministic Givens sweep.
    """
    direction = as_vector(direction, ambient_dim, "direction")
    if not 0.0 < psi <= math.pi / 2.0 + 1e-15:
        raise ValueError(f"aperture must lie in (0, pi/2], got {psi}")
    axis = unit(direction)
    rot = rotation_to_axis(axis, ambient_dim - 1)
    basis = rot[:-1, :]                     # rows orthogonal to the axis
    offset = math.cos(psi) * axis
    offset = offset - basis.T @ (basis @ offset)    # snap round-off
    return Cone.from_plane(AffinePlane(offset=offset, basis=basis))


def plane_sphere_intersection(plane: AffinePlane) -> Sphere:
    """Intersection of an affine k-plane with the unit sphere.

    A (k-1)-sphere centred at the plane's offset with radius
    ``sqrt(1 - |offset|^2)``.
    """
    a2 = float(plane.offset @ plane.offset)
    if a2 >= (1.0 - TOL.zero_vector) ** 2:
        raise NoIntersection(
            f"plane at distance {math.sqrt(a2):.12f} misses the unit sphere")
    return Sphere(center=plane.offset, radius=math.sqrt(1.0 - a2), plane=plane)


def canonicalize(cone: Cone) -> tuple[np.ndarray, float]:
    """Rotation taking the cone to canonical position, and its aperture.

    The rotation maps the generating plane's basis onto the first k axes and
    the offset direction onto axis k+1, so the image is the standard cone of
    the same aperture in the first k+1 coordinates.  Built from Givens sweeps
    in fixed index order: an already-canonical cone maps to the identity.
    """
    if cone.is_flat:
        frame = cone.plane.basis
    else:
        frame = np.vstack([cone.plane.basis, cone.direction])
    # near-flat cones normalize a tiny offset, which amplifies round-off in
    # the axis direction; re-orthonormalizing keeps the sweep well-posed
    frame = orthonormalize(frame)
    if frame.shape[0] == frame.shape[1] and np.linalg.det(frame) < 0.0:
        # a left-handed full frame cannot rotate onto the identity; flipping
        # one span vector leaves the plane (and the cone) unchanged
        frame[0] = -frame[0]
    return rotation_from_frame(frame), cone.aperture


def unique_embedding(cone: Cone) -> Cone:
    """The unique hyperplane cone of the same aperture containing ``cone``.

    Generated by ``offset + (span offset)^perp``.  Flat cones are refused:
    with a zero offset the axis, and with it the embedding, is undefined.
    """
    offset = cone.plane.offset
    if float(np.linalg.norm(offset)) < TOL.zero_vector:
        raise DegenerateApex("flat cone: no unique hyperplane embedding")
    n = cone.ambient_dim
    rot = rotation_to_axis(offset, n - 1)
    basis = rot[:-1, :]
    snapped = offset - basis.T @ (basis @ offset)
    return Cone.from_plane(AffinePlane(offset=snapped, basis=basis))


# ----------------------------------------------------------------------
# canonical cone chart
# ----------------------------------------------------------------------

def cone_param(v, r, psi: float) -> np.ndarray:
    """Chart map of the canonical cone: ``(v, r)`` to ambient coordinates.

    ``v`` has shape ``(..., n-1)`` for an n-dimensional cone; the result has
    shape ``(..., n+1)`` and norm exactly ``r``.
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("cone chart radius must be positive")
    sin_psi, cos_psi = math.sin(psi), math.cos(psi)
    s = 1.0 + np.sum(v * v, axis=-1)
    head = 2.0 * v * (r * sin_psi / s)[..., None]
    mid = (s - 2.0) / s * r * sin_psi
    last = np.broadcast_to(r * cos_psi, mid.shape)
    return np.concatenate([head, mid[..., None], last[..., None]], axis=-1)


def cone_param_inverse(x, psi: float,
                       membership_tol: float = TOL.cone_membership) -> tuple[np.ndarray, np.ndarray]:
    """Inverse chart of the canonical cone.

    Raises :class:`NotOnCone` when the relative residual of the defining
    equation exceeds ``membership_tol`` and :class:`ChartSingularity` within
    the guard band of the chart's excluded ray.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < TOL.zero_vector):
        raise ZeroVector("cone chart undefined at the origin")
    sin_psi, cos_psi = math.sin(psi), math.cos(psi)
    residual = np.abs(x[..., -1] / r - cos_psi)
    if np.any(residual > membership_tol):
        raise NotOnCone(
            f"point off the aperture-{psi:.6f} cone by {float(np.max(residual)):.3e}")
    denom = r * sin_psi - x[..., -2]
    if np.any(denom < TOL.chart_guard * r):
        raise ChartSingularity("sample on or near the cone chart's excluded ray")
    v = x[..., :-2] / denom[..., None]
    return v, r


def cone_metric(v, r, psi: float) -> np.ndarray:
    """Metric matrix of the canonical cone chart at ``(v, r)``.

    Diagonal: ``4 r^2 sin^2(psi) / (|v|^2+1)^2`` on the v-block and 1 on the
    radial coordinate.
    """
    v = as_vector(v, name="v")
    m = v.shape[0]
    s = 1.0 + float(v @ v)
    g = np.eye(m + 1)
    g[:m, :m] *= 4.0 * r * r * math.sin(psi) ** 2 / (s * s)
    return g


def cone_christoffel(v, r: float, psi: float) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, i, j]`` of the canonical cone chart.

    Literal evaluation of the three-case closed form, where exactly one index
    equal to the radial slot selects the mixed case; the index order is
    (upper, lower, lower).
    """
    v = as_vector(v, name="v")
    if not r > 0.0:
        raise ValueError("cone chart radius must be positive")
    m = v.shape[0]          # number of v coordinates; slot m is the radius
    n = m + 1
    s = 1.0 + float(v @ v)
    sin2 = math.sin(psi) ** 2
    gamma = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                radial_count = (k == m) + (i == m) + (j == m)
                if radial_count == 0:
                    gamma[k, i, j] = 2.0 * (v[k] * (i == j)
                                            - v[i] * (j == k)
                                            - v[j] * (k == i)) / s
                elif radial_count == 1:
                    gamma[k, i, j] = (-4.0 * r * sin2 * (i == j) / (s * s)
                                      + ((i == k) + (j == k)) / r)
    return gamma


def cone_geodesic_rhs(v, r, v_dot, r_dot, psi: float) -> tuple[np.ndarray, np.ndarray]:
    """Accelerations of the cone geodesic equations in chart coordinates.

    ``v_ddot = -(2 |v_dot|^2 v - 4 (v.v_dot) v_dot) / (|v|^2+1) - 2 r_dot v_dot / r``
    ``r_ddot = 4 r sin^2(psi) |v_dot|^2 / (|v|^2+1)^2``

    Broadcasts over leading axes.
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    v_dot = np.asarray(v_dot, dtype=float)
    r_dot = np.asarray(r_dot, dtype=float)
    s = 1.0 + np.sum(v * v, axis=-1)
    vv = np.sum(v_dot * v_dot, axis=-1)
    vdv = np.sum(v * v_dot, axis=-1)
    v_ddot = -(2.0 * vv[..., None] * v - 4.0 * vdv[..., None] * v_dot) / s[..., None] \
        - 2.0 * (r_dot / r)[..., None] * v_dot
    r_ddot = 4.0 * r * math.sin(psi) ** 2 * vv / (s * s)
    return v_ddot, r_ddot


@dataclass(frozen=True)
class AnalyticConeGeodesic:
    """Closed-form geodesic on the standard cone in R^3 directed along +z.

    ``t = 0`` is the point of closest approach, at radius ``r0`` with speed
    ``v0``:

        x(t) = sqrt(r0^2 + v0^2 t^2) * (sin(psi) cos(chi), sin(psi) sin(chi), cos(psi)),
        chi(t) = arctan(v0 t / r0) / sin(psi).

    The radius is ``sqrt(r0^2 + v0^2 t^2)`` and the speed is constant ``v0``.
    A flat cone (psi = pi/2) unrolls to the straight line ``(r0, v0 t, 0)``.
    """

    r0: float
    v0: float
    psi: float

    def __post_init__(self):
        if not self.r0 > 0.0:
            raise ValueError(f"closest-approach radius must be positive, got {self.r0}")
        if not self.v0 > 0.0:
            raise ValueError(f"speed must be positive, got {self.v0}")
        if not 0.0 < self.psi <= math.pi / 2.0 + 1e-15:
            raise ValueError(f"aperture must lie in (0, pi/2], got {self.psi}")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        sin_psi, cos_psi = math.sin(self.psi), math.cos(self.psi)
        radius = np.sqrt(self.r0**2 + (self.v0 * t) ** 2)
        chi = np.arctan(self.v0 * t / self.r0) / sin_psi
        return np.stack([radius * sin_psi * np.cos(chi),
                         radius * sin_psi * np.sin(chi),
                         radius * cos_psi], axis=-1)

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        sin_psi, cos_psi = math.sin(self.psi), math.cos(self.psi)
        radius = np.sqrt(self.r0**2 + (self.v0 * t) ** 2)
        chi = np.arctan(self.v0 * t / self.r0) / sin_psi
        radius_dot = self.v0**2 * t / radius
        chi_dot = self.v0 * self.r0 / (radius**2 * sin_psi)
        cos_chi, sin_chi = np.cos(chi), np.sin(chi)
        return np.stack([
            radius_dot * sin_psi * cos_chi - radius * sin_psi * sin_chi * chi_dot,
            radius_dot * sin_psi * sin_chi + radius * sin_psi * cos_chi * chi_dot,
            radius_dot * cos_psi], axis=-1)


def embed_two_cone_points(points, ambient_dim: int) -> np.ndarray:
    """Embed standard 2-cone points of R^3 into the standard cone of R^n.

    The first two components stay put and the axis component moves to the
    last slot, landing on ``(x1, x2, 0, ..., 0, x3)``.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != 3:
        raise ValueError("expected points with three components")
    if ambient_dim < 3:
        raise ValueError("ambient dimension must be at least 3")
    out = np.zeros(points.shape[:-1] + (ambient_dim,))
    out[..., 0] = points[..., 0]
    out[..., 1] = points[..., 1]
    out[..., -1] = points[..., 2]
    return out


# ----------------------------------------------------------------------
# plane fits and geodesic residuals on sampled trajectories
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TwoConeFit:
    """Result of fitting a 2-cone to radial projections of samples."""

    cone: Cone
    residual: float
    singular_values: np.ndarray


def fit_two_cone(samples, rank_tol: float = TOL.plane_fit_rank,
                 residual_tol: float = TOL.plane_fit_residual) -> TwoConeFit:
    """Least-squares 2-cone through the radial projections of the samples.

    The projections are centred and decomposed by singular values; the two
    leading right singular vectors span the fitted plane and the remaining
    spectrum yields the RMS residual ``sqrt(sum_i>=3 s_i^2 / N)``.

    Raises
    ------
    CollidingTrajectory
        If the centred projections have numerical rank below 2 (radial or
        near-radial data determine no plane).
    PoorFit
        If the RMS residual exceeds ``residual_tol``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 10:
        raise ValueError("need at least 10 samples of equal dimension")
    norms = np.linalg.norm(samples, axis=1)
    if np.any(norms < TOL.zero_vector):
        raise ZeroVector("sample at the origin")
    alpha = samples / norms[:, None]
    centre = alpha.mean(axis=0)
    centred = alpha - centre
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    if s[0] < TOL.zero_vector or s[1] < rank_tol * s[0]:
        raise CollidingTrajectory(
            "radial projections are rank-deficient; no 2-plane is determined")
    residual = float(np.sqrt(np.sum(s[2:] ** 2) / samples.shape[0]))
    if residual > residual_tol:
        raise PoorFit(f"plane-fit residual {residual:.3e} exceeds {residual_tol:.1e}")
    plane = AffinePlane.from_spanning(centre, vt[:2])
    return TwoConeFit(cone=Cone.from_plane(plane), residual=residual,
                      singular_values=s)


def _chart_pole_refuge(directions: np.ndarray) -> np.ndarray:
    """A unit vector kept as far from every sample direction as the data allow.

    The directions of a sampled cone geodesic trace a circular arc, so the
    span of their centred cloud is (at most) a 2-plane.  Any unit vector
    orthogonal to that span, pointed away from the cloud's offset, sees every
    sample at a right angle or more.  On a 1-sphere, where no such vector
    exists, the middle of the largest angular gap is the best refuge.
    """
    n, k = directions.shape
    mean = directions.mean(axis=0)
    centred = directions - mean
    _, svals, vt = np.linalg.svd(centred, full_matrices=False)
    rank = int(np.sum(svals > max(TOL.zero_vector, 1e-9 * svals[0])))
    span = vt[:rank]
    residual = mean - span.T @ (span @ mean)
    res_norm = float(np.linalg.norm(residual))
    if res_norm > 1e-9:
        return -residual / res_norm
    if rank < k:
        # the cloud's plane passes through the origin; complete it
        projector = np.eye(k) - span.T @ span
        for i in range(k):
            candidate = projector[:, i]
            norm = float(np.linalg.norm(candidate))
            if norm > 0.5:
                return candidate / norm
    if k != 2:
        raise ValueError("sample directions fill the sphere; no chart is safe")
    angles = np.sort(np.arctan2(directions[:, 1], directions[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * math.pi]]))
    widest = int(np.argmax(gaps))
    middle = angles[widest] + 0.5 * gaps[widest]
    return np.array([math.cos(middle), math.sin(middle)])


def cone_chart_coordinates(cone: Cone, samples) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart coordinates of samples lying on ``cone``, via a safe rotation.

    The cone is first canonicalized; a further rotation inside the cone's
    symmetry group (acting on the first k coordinates) then moves the chart's
    excluded ray to a refuge direction at least a quarter turn from every
    sample.  Returns ``(v, r, rotation)`` with the composed rotation, where
    trailing ambient coordinates (zero on the cone) are dropped before
    charting.

    Raises :class:`NotOnCone` if any sample leaves the cone beyond tolerance.
    """
    samples = np.asarray(samples, dtype=float)
    rot, psi = canonicalize(cone)
    k = cone.dim
    y = samples @ rot.T
    trailing = y[:, k + 1:]
    if trailing.size and np.max(np.abs(trailing)) > TOL.cone_membership * np.max(
            np.linalg.norm(samples, axis=1)):
        raise NotOnCone("samples leave the span of the canonical cone")
    y = y[:, :k + 1]
    r = np.linalg.norm(y, axis=1)
    directions = y[:, :k] / (r * math.sin(psi))[:, None]
    inner = rotation_to_axis(_chart_pole_refuge(directions), k - 1)
    block = np.eye(cone.ambient_dim)
    block[:k, :k] = inner
    y_safe = np.concatenate([y[:, :k] @ inner.T, y[:, k:k + 1]], axis=1)
    v, r = cone_param_inverse(y_safe, psi)
    return v, r, block @ rot


def geodesic_residual(times, samples, cone: Cone) -> float:
    """Sup-norm residual of the cone geodesic equations along sampled positions.

    The samples are expressed in the cone chart and differentiated with
    five-point stencils on the uniform time grid; the residual compares the
    finite-difference accelerations with the geodesic right-hand side.
    """
    times = np.asarray(times, dtype=float)
    if times.shape[0] < 5:
        raise ValueError("need at least five samples for the residual stencil")
    h = float(times[1] - times[0])
    if np.max(np.abs(np.diff(times) - h)) > 1e-9 * abs(h):
        raise ValueError("geodesic residual requires a uniform time grid")
    v, r, _ = cone_chart_coordinates(cone, samples)
    psi = cone.aperture
    v_mid = stencils.interior(v)
    r_mid = stencils.interior(r)
    v_dot, r_dot = stencils.fd1(v, h), stencils.fd1(r, h)
    v_dd, r_dd = stencils.fd2(v, h), stencils.fd2(r, h)
    model_vdd, model_rdd = cone_geodesic_rhs(v_mid, r_mid, v_dot, r_dot, psi)
    res_v = np.max(np.abs(v_dd - model_vdd))
    res_r = np.max(np.abs(r_dd - model_rdd))
    return float(max(res_v, res_r))
