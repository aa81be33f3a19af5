"""Charged-particle motion in Dirac and Yang monopoles as geodesics on cones.

The library simulates the abelian problem on punctured R^3 and the su(2)
problem on punctured R^5, builds the cone each trajectory lives on from its
conserved vector, and certifies the geodesic property numerically.  See the
``monopole-cones`` CLI for the file-based workflow.
"""

from .cones import (AnalyticConeGeodesic, Cone, TwoConeFit, canonicalize,
                    cone_christoffel, cone_from_direction, cone_geodesic_rhs,
                    cone_metric, cone_param, cone_param_inverse, fit_two_cone,
                    geodesic_residual, plane_sphere_intersection,
                    unique_embedding)
from .dynamics import (ConeReport, DiracState, YangState, dirac_cone,
                       dirac_conserved_vector, dirac_kaluza_klein_residual,
                       dirac_rhs, simulate, verify_cone_dirac,
                       verify_cone_yang, yang_aperture, yang_cone,
                       yang_conserved_vector, yang_rhs)
from .geom import AffinePlane, Quaternion, Sphere, orthonormalize, rotation_to_axis
from .integrate import (MonitorHook, OdeProblem, Trajectory, rk4_integrate,
                        rk4_step, step_doubling_integrate)
from .tolerances import AcceptanceTolerances, Tolerances, acceptance_from_env

__version__ = "0.1.0"

__all__ = [
    "AffinePlane", "AnalyticConeGeodesic", "AcceptanceTolerances", "Cone",
    "ConeReport", "DiracState", "MonitorHook", "OdeProblem", "Quaternion",
    "Sphere", "Tolerances", "Trajectory", "TwoConeFit", "YangState",
    "acceptance_from_env", "canonicalize", "cone_christoffel",
    "cone_from_direction", "cone_geodesic_rhs", "cone_metric", "cone_param",
    "cone_param_inverse", "dirac_cone", "dirac_conserved_vector",
    "dirac_kaluza_klein_residual", "dirac_rhs", "fit_two_cone",
    "geodesic_residual", "orthonormalize", "plane_sphere_intersection",
    "rk4_integrate", "rk4_step", "rotation_to_axis", "simulate",
    "step_doubling_integrate", "unique_embedding", "verify_cone_dirac",
    "verify_cone_yang", "yang_aperture", "yang_cone",
    "yang_conserved_vector", "yang_rhs",
]
