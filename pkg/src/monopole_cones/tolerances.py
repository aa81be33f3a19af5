"""Central tolerance configuration.

Every numeric threshold used by the library, the test suite and the CLI lives
here, so the three always agree.  :class:`Tolerances` collects construction
and guard thresholds; :class:`AcceptanceTolerances` collects the thresholds
the verification battery enforces.  The environment variable
``MONOPOLE_TOL_SCALE`` (a positive real, default 1) multiplies every
acceptance tolerance, which gives slow or fast-math platforms a single knob.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

TOL_SCALE_ENV = "MONOPOLE_TOL_SCALE"


@dataclass(frozen=True)
class Tolerances:
    """Construction, guard and finite-difference thresholds."""

    # vectors and frames
    zero_vector: float = 1e-12          # |v| below this counts as zero
    dependent_input: float = 1e-9       # Gram-Schmidt residual, relative
    orthonormal_dot: float = 1e-12      # pairwise dots of orthonormalized output
    plane_invariant: float = 1e-10      # AffinePlane construction checks
    rotation_orthogonality: float = 1e-10

    # charts
    chart_guard: float = 1e-10          # relative guard band around excluded rays

    # cones
    cone_membership: float = 1e-8       # residual for NotOnCone
    plane_fit_rank: float = 1e-6        # singular values below rank_tol*s1 are zero
    plane_fit_residual: float = 1e-6    # RMS plane distance for PoorFit

    # dynamics
    colliding_udot: float = 1e-10       # |u_dot| threshold, scaled by max(1, |u|)
    colliding_cross: float = 1e-12      # |r x v| threshold, scaled by |r||v|
    apex_guard: float = 1e-6            # halt when radius < apex_guard * r(0)
    radius_floor: float = 1e-12         # hard floor for any RHS evaluation

    # finite differences
    fd_step: float = 1e-5               # central differences, first derivatives
    fd_step_third: float = 1e-3         # five-point stencils up to third order

    # adaptive stepping
    step_min: float = 1e-8
    step_max: float = 1e-1
    step_grow_divisor: float = 32.0     # double the step when estimate < tol/32


@dataclass(frozen=True)
class AcceptanceTolerances:
    """Thresholds enforced by the verification battery (criteria 1-10)."""

    dirac_l_drift: float = 1e-6
    dirac_speed_drift: float = 1e-7            # relative
    dirac_cos_angle: float = 1e-6
    dirac_aperture: float = 1e-6
    dirac_analytic_position: float = 1e-5

    yang_l_drift: float = 1e-6
    yang_charge_drift: float = 1e-8
    yang_speed_drift: float = 1e-7             # relative
    yang_charge_orthogonality: float = 1e-12
    yang_membership: float = 1e-6
    yang_cos_angle: float = 1e-6
    yang_plane_fit: float = 1e-6
    yang_aperture: float = 1e-6
    yang_geodesic_residual: float = 1e-6
    yang_orthogonality: float = 1e-10
    alpha_relation: float = 1e-4

    christoffel: float = 1e-6
    sphere_sampling: float = 1e-12
    canonicalization: float = 1e-10
    embedding_containment: float = 1e-10
    reduction_aperture: float = 1e-8
    embedded_geodesic_residual: float = 1e-8

    kaluza_klein: float = 1e-10
    curvature_structure: float = 1e-6
    theta_reproducing: float = 1e-12
    identity_exact: float = 1e-10
    identity_fd: float = 1e-6

    rk4_order_window: float = 0.2
    exp_benchmark: float = 1e-11

    def scaled(self, factor: float) -> "AcceptanceTolerances":
        """Return a copy with every threshold multiplied by ``factor``."""
        if not factor > 0.0:
            raise ValueError(f"tolerance scale must be positive, got {factor}")
        fields = {f.name: getattr(self, f.name) * factor
                  for f in dataclasses.fields(self)}
        return AcceptanceTolerances(**fields)


DEFAULT = Tolerances()


def acceptance_from_env() -> AcceptanceTolerances:
    """Acceptance tolerances scaled by ``MONOPOLE_TOL_SCALE`` if it is set."""
    raw = os.environ.get(TOL_SCALE_ENV)
    tols = AcceptanceTolerances()
    if raw is None:
        return tols
    try:
        scale = float(raw)
    except ValueError as exc:
        raise ValueError(f"{TOL_SCALE_ENV} must be a positive real, got {raw!r}") from exc
    return tols.scaled(scale)
