"""Fixed-dimension Euclidean geometry.

Orthonormal frames, quaternion arithmetic, rotations assembled from Givens
sweeps in a fixed index order, affine planes, and their unit-sphere sections.
Vectors are plain float ndarrays compared componentwise by tolerance, never
bitwise.  Every function is pure and every value immutable after
construction, so concurrent use needs no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DependentInput, ZeroVector
from .tolerances import DEFAULT as TOL


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Convert to a 1-d float array, checking finiteness and dimension."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite components: {v}")
    return v


def unit(v: np.ndarray, tol: float = TOL.zero_vector) -> np.ndarray:
    """Normalize ``v``, raising :class:`ZeroVector` below the zero threshold."""
    n = float(np.linalg.norm(v))
    if n < tol:
        raise ZeroVector(f"cannot normalize vector of norm {n:.3e}")
    return v / n


def orthonormalize(vectors, dependent_tol: float = TOL.dependent_input) -> np.ndarray:
    """Orthonormalize a sequence of vectors by modified Gram-Schmidt.

    Parameters
    ----------
    vectors : sequence of array_like
        Linearly independent vectors of equal dimension.
    dependent_tol : float
        A vector whose residual after projection is smaller than
        ``dependent_tol`` times its own norm is treated as dependent.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(k, n)`` whose rows span the same subspace, with
        pairwise dot products at round-off level and unit norms.

    Raises
    ------
    DependentInput
        If any input vector is (numerically) in the span of the previous ones.
    """
    rows = [as_vector(v, name=f"vectors[{i}]") for i, v in enumerate(vectors)]
    out: list[np.ndarray] = []
    for i, v in enumerate(rows):
        w = v.copy()
        # Two projection passes keep the result orthogonal to round-off level.
        for _ in range(2):
            for b in out:
                w = w - (w @ b) * b
        norm_w = float(np.linalg.norm(w))
        norm_v = float(np.linalg.norm(v))
        if norm_w < dependent_tol * max(norm_v, TOL.zero_vector):
            raise DependentInput(
                f"vector {i} is dependent on the previous ones "
                f"(residual {norm_w:.3e} vs input norm {norm_v:.3e})")
        out.append(w / norm_w)
    return np.array(out)


# ----------------------------------------------------------------------
# quaternions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    """Element of the quaternion algebra with the Hamilton convention i*j = k.

    Complex numbers travel through the same type with ``y = z = 0``, so one
    arithmetic path serves both Hopf bundles.
    """

    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_vector(cls, v) -> "Quaternion":
        """Build from a 4-vector in the basis (1, i, j, k)."""
        v = as_vector(v, 4, "quaternion components")
        return cls(*v)

    @classmethod
    def from_complex(cls, z: complex) -> "Quaternion":
        return cls(z.real, z.imag, 0.0, 0.0)

    def as_vector(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def imag(self) -> np.ndarray:
        """The (i, j, k) components."""
        return np.array([self.x, self.y, self.z])

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n < TOL.zero_vector:
            raise ZeroVector("cannot normalize a zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def inverse(self) -> "Quaternion":
        n2 = self.w**2 + self.x**2 + self.y**2 + self.z**2
        if n2 < TOL.zero_vector**2:
            raise ZeroVector("cannot invert a zero quaternion")
        c = self.conjugate()
        return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)

    def is_complex(self, tol: float = TOL.zero_vector) -> bool:
        return abs(self.y) <= tol and abs(self.z) <= tol

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            p, q = self, other
            return Quaternion(
                p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
                p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
                p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
                p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w)
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __rmul__(self, other):
        # scalar * quaternion; Quaternion * Quaternion never lands here
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)


def quaternion_multiply(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``; identical to ``p * q``."""
    return p * q


# ----------------------------------------------------------------------
# rotations from Givens sweeps
# ----------------------------------------------------------------------

def _apply_givens(matrix: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """Left-multiply ``matrix`` in place by the Givens rotation in plane (i, j)."""
    row_i = c * matrix[i] + s * matrix[j]
    row_j = -s * matrix[i] + c * matrix[j]
    matrix[i] = row_i
    matrix[j] = row_j


def rotation_to_axis(v, axis: int) -> np.ndarray:
    """Rotation ``R`` with ``R @ v = |v| e_axis`` (axis is a 0-based index).

    Built from Givens rotations in planes ``(axis, i)`` taken in increasing
    index order, which makes the result deterministic and reflection-free.

    Raises
    ------
    ZeroVector
        If ``|v|`` is below the zero threshold.
    """
    v = as_vector(v)
    n = v.shape[0]
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for dimension {n}")
    if np.linalg.norm(v) < TOL.zero_vector:
        raise ZeroVector("cannot orient a zero vector onto an axis")
    rot = np.eye(n)
    work = v.copy()
    for i in range(n):
        if i == axis:
            continue
        a, b = work[axis], work[i]
        h = math.hypot(a, b)
        if h == 0.0:
            continue
        c, s = a / h, b / h
        _apply_givens(rot, axis, i, c, s)
        work[axis], work[i] = h, 0.0
    if work[axis] < 0.0:
        # only reachable in dimension 1, where SO(1) cannot flip a sign
        raise ValueError("cannot orient a 1-dimensional vector of negative sign")
    return rot


def rotation_from_frame(frame: np.ndarray) -> np.ndarray:
    """Rotation mapping the orthonormal rows ``frame[i]`` onto ``e_i``.

    Implemented as a Givens QR sweep over the transposed frame in fixed
    (column, row) order, so identical input always yields the identical
    rotation and an already-aligned frame yields the identity.
    """
    frame = np.atleast_2d(np.asarray(frame, dtype=float))
    k, n = frame.shape
    if k > n:
        raise ValueError(f"frame of {k} vectors cannot fit in dimension {n}")
    m = frame.T.copy()            # columns are the frame vectors
    rot = np.eye(n)
    for col in range(k):
        for row in range(col + 1, n):
            a, b = m[col, col], m[row, col]
            h = math.hypot(a, b)
            if h == 0.0:
                continue
            c, s = a / h, b / h
            _apply_givens(m, col, row, c, s)
            _apply_givens(rot, col, row, c, s)
        if m[col, col] < 0.0:
            # a square frame of negative orientation, or rows that were not
            # orthonormal to begin with
            raise ValueError(
                "rotation_from_frame requires orthonormal rows spanning a "
                "rotatable (positively oriented, if square) frame")
    return rot


# ----------------------------------------------------------------------
# affine planes and spheres
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AffinePlane:
    """Affine plane ``offset + span(basis)`` with ``offset`` normal to the span.

    ``basis`` holds k orthonormal row vectors; ``offset`` is orthogonal to all
    of them.  Construction validates both properties.
    """

    offset: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        offset = as_vector(self.offset, name="offset")
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if basis.shape[1] != offset.shape[0]:
            raise ValueError("offset and basis dimensions disagree")
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis has non-finite entries")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(basis.shape[0]))) > TOL.plane_invariant:
            raise ValueError("basis rows are not orthonormal within tolerance")
        if np.max(np.abs(basis @ offset), initial=0.0) > TOL.plane_invariant:
            raise ValueError("offset is not orthogonal to the basis")
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_spanning(cls, point, spanning) -> "AffinePlane":
        """Plane through ``point`` spanned by ``spanning`` (any basis).

        The spanning set is orthonormalized and the point is reduced to the
        canonical offset normal to the span.
        """
        basis = orthonormalize(spanning)
        point = as_vector(point, basis.shape[1], "point")
        offset = point - basis.T @ (basis @ point)
        # snap round-off so construction checks pass exactly
        offset = offset - basis.T @ (basis @ offset)
        return cls(offset=offset, basis=basis)

    @property
    def ambient_dim(self) -> int:
        return self.offset.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of points (shape ``(..., n)``) onto the plane."""
        x = np.asarray(x, dtype=float)
        in_span = (x @ self.basis.T) @ self.basis
        return self.offset + in_span

    def residual(self, x: np.ndarray) -> np.ndarray:
        """Euclidean distance from points to the plane."""
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.project(x), axis=-1)

    def contains(self, x, tol: float = TOL.plane_invariant) -> bool:
        return bool(np.all(self.residual(x) <= tol))

    def span_projector(self) -> np.ndarray:
        """The ``n x n`` orthogonal projector onto the direction span."""
        return self.basis.T @ self.basis

    def same_plane(self, other: "AffinePlane", tol: float = 1e-8) -> bool:
        """Equality as point sets: same span and same offset within ``tol``."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if np.max(np.abs(self.span_projector() - other.span_projector())) > tol:
            return False
        return bool(np.linalg.norm(self.offset - other.offset) <= tol)


@dataclass(frozen=True)
class Sphere:
    """A (k-1)-sphere of given center and radius inside an affine plane."""

    center: np.ndarray
    radius: float
    plane: AffinePlane

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"sphere radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", as_vector(self.center, name="center"))

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``count`` points on the sphere (shape ``(count, n)``)."""
        k = self.plane.dim
        y = rng.normal(size=(count, k))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        return self.center + self.radius * (y @ self.plane.basis)
