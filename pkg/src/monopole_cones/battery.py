"""Seeded verification battery over random initial conditions.

Each criterion draws its cases deterministically from one seed, runs the
simulations at the fixed acceptance step, and compares sup-norm drifts and
residuals against the thresholds in
:class:`~monopole_cones.tolerances.AcceptanceTolerances`.  The batch of
trajectories for one monopole is integrated as a single stacked state, which
is what makes the full battery fit in desk time.

Case ensembles are conditioned for the fixed-step integrator: directions are
drawn uniformly, but states whose perigee would come close to the apex (or,
for the su(2) problem, whose cone winds past a full turn) are rejected, since
finite-difference certification at the stated tolerances presumes moderate
angular rates.  Every case records the sub-seed it was drawn from so a
failure names a reproducible state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import charts, cones, dynamics, gauge, stencils
from .errors import MonopoleError
from .geom import AffinePlane, unit
from .integrate import OdeProblem, rk4_integrate
from .tolerances import DEFAULT as TOL
from .tolerances import AcceptanceTolerances


@dataclass(frozen=True)
class Check:
    """One named sup-norm value compared against one threshold."""

    name: str
    value: float
    threshold: float
    case_seed: int | None = None

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def describe(self) -> str:
        status = "pass" if self.passed else "FAIL"
        text = f"{self.name}: {self.value:.3e} <= {self.threshold:.1e} [{status}]"
        if not self.passed and self.case_seed is not None:
            text += f" (case seed {self.case_seed})"
        return text


@dataclass
class Criterion:
    """A numbered acceptance criterion with its individual checks."""

    index: int
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = max(self.checks, key=lambda c: c.value / max(c.threshold, 1e-300))
        line = (f"[{self.index:2d}] {status}  {self.title}: worst "
                f"{worst.name} = {worst.value:.3e} (tol {worst.threshold:.1e})")
        if not self.passed:
            failing = [c for c in self.checks if not c.passed]
            names = ", ".join(c.name for c in failing)
            seeds = {c.case_seed for c in failing if c.case_seed is not None}
            line += f" -- failing: {names}"
            if seeds:
                line += f" (case seeds {sorted(seeds)})"
        return line


@dataclass
class BatteryResult:
    seed: int
    count: int
    criteria: list[Criterion]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)


# ----------------------------------------------------------------------
# case sampling
# ----------------------------------------------------------------------

def _case_seeds(seed: int, count: int) -> list[int]:
    seq = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in seq.spawn(count)]


def _unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unit(rng.normal(size=dim))


def draw_dirac_state(case_seed: int, perpendicular: bool = False) -> dynamics.DiracState:
    """One conditioned random abelian state.

    Radius and speed are uniform in [0.5, 2]; the charge is uniform in
    [-3, 3] bounded away from zero; the angle between position and velocity
    keeps the perigee clear of the apex guard.
    """
    rng = np.random.default_rng(case_seed)
    radius = rng.uniform(0.5, 2.0)
    speed = rng.uniform(0.5, 2.0)
    lam = 0.0
    while abs(lam) < 0.25:
        lam = rng.uniform(-3.0, 3.0)
    direction = _unit_vector(rng, 3)
    while True:
        vel_dir = _unit_vector(rng, 3)
        vel_dir = vel_dir - (vel_dir @ direction) * direction if perpendicular else vel_dir
        sin_angle = np.linalg.norm(np.cross(direction, vel_dir)) / max(
            np.linalg.norm(vel_dir), 1e-300)
        if sin_angle > 0.35:
            break
    return dynamics.DiracState(r=radius * direction,
                               r_dot=speed * unit(vel_dir), lam=lam)


def draw_yang_state(case_seed: int) -> dynamics.YangState:
    """One conditioned random su(2) state with |e| uniform in [0.5, 3].

    The chart speed is scaled so the aperture stays moderate (the trajectory
    winds less than a full turn around its cone) and the perigee stays well
    off the apex; both keep five-point differencing at the acceptance step
    inside its accuracy budget.
    """
    rng = np.random.default_rng(case_seed)
    u = rng.uniform(-0.6, 0.6, size=4)
    radius = rng.uniform(1.0, 1.6)
    s = 1.0 + float(u @ u)
    # angular momentum scale k = 2 r^2 |u_dot| / (|u|^2+1); tan(psi) = 2k/|e|
    k = rng.uniform(0.8, 1.4)
    u_dot = _unit_vector(rng, 4) * (k * s / (2.0 * radius**2))
    r_dot = rng.uniform(-0.4, 0.4) * (k / radius)
    e = rng.uniform(0.5, 3.0) * _unit_vector(rng, 3)
    return dynamics.YangState(u=u, r=radius, u_dot=u_dot, r_dot=r_dot, e=e)


# ----------------------------------------------------------------------
# batched integration
# ----------------------------------------------------------------------

def _integrate_batch(states: list, t_end: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a batch of states of one kind; returns (times, history).

    ``history`` has shape (n_samples, n_cases, width).
    """
    first = states[0]
    if isinstance(first, dynamics.DiracState):
        y0 = np.stack([dynamics.pack_dirac(s) for s in states])
        lam = np.array([s.lam for s in states])

        def rhs(t, y):
            r, r_dot = dynamics.unpack_dirac(y)
            acc = dynamics.dirac_rhs(r, r_dot, lam)
            return np.concatenate([r_dot, acc], axis=-1)
    else:
        y0 = np.stack([dynamics.pack_yang(s) for s in states])

        def rhs(t, y):
            u, r, u_dot, r_dot, e = dynamics.unpack_yang(y)
            u_ddot, r_ddot, e_dot = dynamics.yang_rhs(u, r, u_dot, r_dot, e)
            return np.concatenate([u_dot, r_dot[..., None], u_ddot,
                                   r_ddot[..., None], e_dot], axis=-1)

    problem = OdeProblem(rhs=rhs, y0=y0, t0=0.0, t1=t_end, step=step)
    traj = rk4_integrate(problem)
    return traj.times, traj.states


def _argworst(per_case: np.ndarray, seeds: list[int]) -> tuple[float, int]:
    worst = int(np.argmax(per_case))
    return float(per_case[worst]), seeds[worst]


def _chunked_rows(fn, n_rows: int, chunk: int = 1024) -> np.ndarray:
    """Concatenate ``fn(lo, hi)`` over row chunks; bounds peak temporaries."""
    parts = [fn(lo, min(lo + chunk, n_rows)) for lo in range(0, n_rows, chunk)]
    return np.concatenate(parts, axis=0)


# ----------------------------------------------------------------------
# criteria 1-3: abelian monopole
# ----------------------------------------------------------------------

def _dirac_batch_drifts(history: np.ndarray, lam: np.ndarray):
    r, r_dot = dynamics.unpack_dirac(history)
    big_l = dynamics.dirac_conserved_vector(r, r_dot, lam)
    l_drift = np.max(np.abs(big_l - big_l[0]), axis=(0, 2))
    speed = np.linalg.norm(r_dot, axis=-1)
    speed_drift = np.max(np.abs(speed - speed[0]), axis=0) / speed[0]
    norm_l0 = np.linalg.norm(big_l[0], axis=-1)
    cos_angle = np.einsum("tcj,cj->tc", r, big_l[0]) \
        / (np.linalg.norm(r, axis=-1) * norm_l0)
    cos_dev = np.max(np.abs(cos_angle - lam / norm_l0), axis=0)
    return l_drift, speed_drift, cos_dev


def criterion_dirac_conservation(seed: int, count: int, acc: AcceptanceTolerances,
                                 t_end: float, step: float) -> tuple[Criterion, Criterion]:
    seeds = _case_seeds(seed, count)
    states = [draw_dirac_state(s) for s in seeds]
    _, history = _integrate_batch(states, t_end, step)
    lam = np.array([s.lam for s in states])
    l_drift, speed_drift, cos_dev = _dirac_batch_drifts(history, lam)

    c1 = Criterion(1, "abelian conservation (L, speed)")
    value, bad = _argworst(l_drift, seeds)
    c1.checks.append(Check("max |L(t)-L(0)|", value, acc.dirac_l_drift, bad))
    value, bad = _argworst(speed_drift, seeds)
    c1.checks.append(Check("relative speed drift", value, acc.dirac_speed_drift, bad))

    c2 = Criterion(2, "abelian cone law (angle, aperture)")
    value, bad = _argworst(cos_dev, seeds)
    c2.checks.append(Check("cos-angle deviation", value, acc.dirac_cos_angle, bad))

    # aperture of the fitted cone against the closed form, perpendicular data
    perp_seeds = _case_seeds(seed + 1, max(8, count // 6))
    perp_states = [draw_dirac_state(s, perpendicular=True) for s in perp_seeds]
    _, perp_history = _integrate_batch(perp_states, t_end, step)
    aperture_err = []
    for i, state in enumerate(perp_states):
        fit = cones.fit_two_cone(perp_history[:, i, 0:3])
        r0 = float(np.linalg.norm(state.r))
        v0 = float(np.linalg.norm(state.r_dot))
        expected = math.atan(r0 * v0 / abs(state.lam))
        aperture_err.append(abs(fit.cone.aperture - expected))
    value, bad = _argworst(np.array(aperture_err), perp_seeds)
    c2.checks.append(Check("fitted aperture vs arctan(r0 v0/|lam|)", value,
                           acc.dirac_aperture, bad))
    return c1, c2


def _closest_approach_frame(state: dynamics.DiracState) -> tuple[np.ndarray, float, float]:
    """Rotation aligning a perpendicular initial state with the closed form.

    Maps the initial position to ``r0 (sin psi, 0, cos psi)`` with the cone
    axis on +z.  A positive charge circulates with the closed form's
    orientation; a negative one traverses it backwards, so the returned time
    sign says which way to run the reference curve.
    """
    cone = dynamics.dirac_cone(state)
    psi = cone.aperture
    axis = cone.direction
    r_hat = unit(state.r)
    m_hat = unit(r_hat - math.cos(psi) * axis)
    v_hat = unit(state.r_dot)
    time_sign = 1.0 if state.lam >= 0.0 else -1.0
    v_row = time_sign * v_hat
    return np.stack([m_hat, v_row, np.cross(m_hat, v_row)]), psi, time_sign


def criterion_dirac_analytic(seed: int, count: int, acc: AcceptanceTolerances,
                             step: float) -> Criterion:
    crit = Criterion(3, "abelian trajectory matches the closed form")
    seeds = _case_seeds(seed + 2, max(6, count // 8))
    errors = []
    for case_seed in seeds:
        state = draw_dirac_state(case_seed, perpendicular=True)
        frame, psi, time_sign = _closest_approach_frame(state)
        r0 = float(np.linalg.norm(state.r))
        v0 = float(np.linalg.norm(state.r_dot))
        curve = cones.AnalyticConeGeodesic(r0=r0, v0=v0, psi=psi)
        worst = 0.0
        for t_end in (5.0, -5.0):
            traj = dynamics.simulate(state, t_end=t_end, step=step)
            r, _ = dynamics.unpack_dirac(traj.states)
            expected = curve(time_sign * traj.times)
            worst = max(worst, float(np.max(np.abs(r @ frame.T - expected))))
        errors.append(worst)
    value, bad = _argworst(np.array(errors), seeds)
    crit.checks.append(Check("max position error", value,
                             acc.dirac_analytic_position, bad))
    return crit


# ----------------------------------------------------------------------
# criteria 4-6: su(2) monopole
# ----------------------------------------------------------------------

def criteria_yang(seed: int, count: int, acc: AcceptanceTolerances,
                  t_end: float, step: float) -> tuple[Criterion, Criterion, Criterion]:
    seeds = _case_seeds(seed + 3, count)
    states = [draw_yang_state(s) for s in seeds]
    times, history = _integrate_batch(states, t_end, step)
    u, r, u_dot, r_dot, e = dynamics.unpack_yang(history)
    n_samples = history.shape[0]

    big_l = _chunked_rows(
        lambda lo, hi: dynamics.yang_conserved_vector(
            u[lo:hi], r[lo:hi], u_dot[lo:hi], r_dot[lo:hi], e[lo:hi]),
        n_samples)
    l_drift = np.max(np.abs(big_l - big_l[0]), axis=(0, 2))
    norm_e = np.linalg.norm(e, axis=-1)
    charge_drift = np.max(np.abs(norm_e - norm_e[0]), axis=0)
    speed = dynamics.yang_speed(u, r, u_dot, r_dot)
    speed_drift = np.max(np.abs(speed - speed[0]), axis=0) / speed[0]
    e_dot = _chunked_rows(
        lambda lo, hi: dynamics.yang_rhs(
            u[lo:hi], r[lo:hi], u_dot[lo:hi], r_dot[lo:hi], e[lo:hi])[2],
        n_samples)
    charge_orth = np.max(np.abs(np.sum(e * e_dot, axis=-1)), axis=0)

    c4 = Criterion(4, "su(2) conservation (L, |e|, speed, e.e_dot)")
    for name, values, tol in (
            ("max |L(t)-L(0)|", l_drift, acc.yang_l_drift),
            ("max ||e(t)|-|e(0)||", charge_drift, acc.yang_charge_drift),
            ("relative speed drift", speed_drift, acc.yang_speed_drift),
            ("max |e . e_dot|", charge_orth, acc.yang_charge_orthogonality)):
        value, bad = _argworst(values, seeds)
        c4.checks.append(Check(name, value, tol, bad))

    both = _chunked_rows(
        lambda lo, hi: np.stack(dynamics.yang_orthogonality_residuals(
            u[lo:hi], r[lo:hi], u_dot[lo:hi], r_dot[lo:hi], e[lo:hi]), axis=-1),
        n_samples)
    orth = np.max(np.abs(both), axis=(0, 2))

    x = charts.stereo_to_cartesian(u, r)
    c5 = Criterion(5, "su(2) cone theorem (membership, aperture, fit, geodesic)")
    membership = np.empty(len(states))
    cos_dev = np.empty(len(states))
    fit_residual = np.empty(len(states))
    aperture_err = np.empty(len(states))
    geo_residual = np.empty(len(states))
    for i, state in enumerate(states):
        cone = dynamics.yang_cone(state)
        membership[i] = float(np.max(cone.membership_residual(x[:, i])))
        cos_angle = x[:, i] @ cone.direction / np.linalg.norm(x[:, i], axis=-1)
        cos_dev[i] = float(np.max(np.abs(cos_angle - math.cos(cone.aperture))))
        fit = cones.fit_two_cone(x[:, i])
        fit_residual[i] = fit.residual
        aperture_err[i] = abs(fit.cone.aperture - cone.aperture)
        geo_residual[i] = cones.geodesic_residual(times, x[:, i], cone)
    for name, values, tol in (
            ("cone membership residual", membership, acc.yang_membership),
            ("cos-angle vs aperture formula", cos_dev, acc.yang_cos_angle),
            ("radial 2-plane fit residual", fit_residual, acc.yang_plane_fit),
            ("fitted aperture vs formula", aperture_err, acc.yang_aperture),
            ("geodesic residual in cone chart", geo_residual, acc.yang_geodesic_residual)):
        value, bad = _argworst(values, seeds)
        c5.checks.append(Check(name, value, tol, bad))
    value, bad = _argworst(orth, seeds)
    c5.checks.append(Check("acceleration orthogonality residuals", value,
                           acc.yang_orthogonality, bad))

    c6 = Criterion(6, "radial-projection derivative relation")
    h = float(times[1] - times[0])
    alpha = x / np.linalg.norm(x, axis=-1)[..., None]
    s = 1.0 + np.sum(u * u, axis=-1)
    uu = np.sum(u_dot * u_dot, axis=-1)
    e2 = np.sum(e * e, axis=-1)
    # charge coefficient on 1/r^4, commensurate with the kinematic terms
    coeff1 = e2 / (4.0 * r**4) + 6.0 * r_dot**2 / (r * r) + 12.0 * uu / (s * s)
    relation = stencils.interior(coeff1)[..., None] * stencils.fd1(alpha, h) \
        + stencils.interior(6.0 * r_dot / r)[..., None] * stencils.fd2(alpha, h) \
        + stencils.fd3(alpha, h)
    per_case = np.max(np.abs(relation), axis=(0, 2))
    value, bad = _argworst(per_case, seeds)
    c6.checks.append(Check("five-point relation residual", value,
                           acc.alpha_relation, bad))
    return c4, c5, c6


# ----------------------------------------------------------------------
# criterion 7-8: cone geometry
# ----------------------------------------------------------------------

def _christoffel_fd(v: np.ndarray, r: float, psi: float, h: float) -> np.ndarray:
    """Christoffel symbols from central differences of the metric."""
    m = v.shape[0]
    n = m + 1

    def metric_at(q):
        return cones.cone_metric(q[:m], q[m], psi)

    q0 = np.concatenate([v, [r]])
    grads = np.empty((n, n, n))
    for k in range(n):
        dq = np.zeros(n)
        dq[k] = h
        grads[k] = (metric_at(q0 + dq) - metric_at(q0 - dq)) / (2.0 * h)
    g_inv = np.linalg.inv(metric_at(q0))
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                total = 0.0
                for l in range(n):
                    total += g_inv[k, l] * (grads[i][l, j] + grads[j][l, i]
                                            - grads[l][i, j])
                gamma[k, i, j] = 0.5 * total
    return gamma


def criterion_cone_geometry(seed: int, acc: AcceptanceTolerances) -> Criterion:
    crit = Criterion(7, "cone geometry oracles (Christoffel, sphere, canonical form, embedding)")
    rng = np.random.default_rng(_case_seeds(seed + 4, 1)[0])

    worst_gamma = 0.0
    for trial in range(100):
        m = 1 + trial % 3
        v = rng.uniform(-1.5, 1.5, size=m)
        r = rng.uniform(0.5, 2.0)
        psi = rng.uniform(0.3, math.pi / 2)
        closed = cones.cone_christoffel(v, r, psi)
        fd = _christoffel_fd(v, float(r), psi, TOL.fd_step)
        worst_gamma = max(worst_gamma, float(np.max(np.abs(closed - fd))))
    crit.checks.append(Check("Christoffel closed form vs metric differences",
                             worst_gamma, acc.christoffel))

    worst_sphere = 0.0
    worst_canon = 0.0
    worst_embed = 0.0
    for trial in range(100):
        n = 3 + trial % 3
        k = int(rng.integers(1, n))
        spanning = rng.normal(size=(k, n))
        point = rng.normal(size=n) * 0.4
        plane = AffinePlane.from_spanning(point, spanning)
        if not 0.05 <= np.linalg.norm(plane.offset) <= 0.95:
            continue
        sphere = cones.plane_sphere_intersection(plane)
        pts = sphere.sample(40, rng)
        worst_sphere = max(worst_sphere, float(np.max(np.abs(
            np.linalg.norm(pts, axis=1) - 1.0))))

        cone = cones.Cone.from_plane(plane)
        rot, psi = cones.canonicalize(cone)
        radii = rng.uniform(0.5, 2.0, size=pts.shape[0])
        cone_pts = pts * radii[:, None]
        mapped = cone_pts @ rot.T
        norms = np.linalg.norm(mapped, axis=1)
        axis_err = np.abs(mapped[:, k] - math.cos(psi) * norms)
        trailing = np.abs(mapped[:, k + 1:]).max() if k + 1 < n else 0.0
        worst_canon = max(worst_canon, float(axis_err.max()), float(trailing))

        if not cone.is_flat and k < n - 1:
            embedded = cones.unique_embedding(cone)
            worst_embed = max(worst_embed, float(np.max(
                embedded.membership_residual(cone_pts))))
            worst_embed = max(worst_embed,
                              abs(embedded.aperture - cone.aperture))
    crit.checks.append(Check("plane-sphere sample norms", worst_sphere,
                             acc.sphere_sampling))
    crit.checks.append(Check("canonical form of sampled cone points",
                             worst_canon, acc.canonicalization))
    crit.checks.append(Check("hyperplane embedding containment", worst_embed,
                             acc.embedding_containment))
    return crit


def _integrate_cone_geodesic(v0, r0, v_dot0, r_dot0, psi, t_end, step):
    m = v0.shape[0]

    def rhs(t, y):
        v, r = y[:m], y[m]
        v_dot, r_dot = y[m + 1:2 * m + 1], y[2 * m + 1]
        v_ddot, r_ddot = cones.cone_geodesic_rhs(v, r, v_dot, r_dot, psi)
        return np.concatenate([v_dot, [r_dot], v_ddot, [r_ddot]])

    y0 = np.concatenate([v0, [r0], v_dot0, [r_dot0]])
    problem = OdeProblem(rhs=rhs, y0=y0, t0=0.0, t1=t_end, step=step)
    traj = rk4_integrate(problem)
    return traj.times, traj.states[:, :m], traj.states[:, m]


def criterion_theorem_reduction(seed: int, acc: AcceptanceTolerances,
                                step: float) -> Criterion:
    crit = Criterion(8, "cone theorem, both directions (reduce and embed)")
    rng = np.random.default_rng(_case_seeds(seed + 5, 1)[0])

    worst_aperture = 0.0
    for _ in range(8):
        psi = rng.uniform(0.55, math.pi / 2)
        v0 = rng.uniform(-0.5, 0.5, size=3)
        r0 = rng.uniform(1.0, 1.5)
        s = 1.0 + float(v0 @ v0)
        v_dot0 = _unit_vector(rng, 3) * rng.uniform(0.25, 0.5) * s / r0
        r_dot0 = rng.uniform(-0.3, 0.3)
        _, v, r = _integrate_cone_geodesic(v0, r0, v_dot0, r_dot0, psi, 5.0, step)
        points = cones.cone_param(v, r, psi)
        fit = cones.fit_two_cone(points[::5])
        worst_aperture = max(worst_aperture, abs(fit.cone.aperture - psi))
    crit.checks.append(Check("reduced 2-cone aperture", worst_aperture,
                             acc.reduction_aperture))

    worst_residual = 0.0
    times = np.arange(-2.0, 2.0 + 0.5 * step, step)
    for _ in range(8):
        psi = rng.uniform(0.45, math.pi / 2)
        curve = cones.AnalyticConeGeodesic(r0=rng.uniform(0.8, 1.5),
                                           v0=rng.uniform(0.5, 1.2), psi=psi)
        embedded = cones.embed_two_cone_points(curve(times), 5)
        big_cone = cones.cone_from_direction(np.array([0, 0, 0, 0, 1.0]), psi, 5)
        worst_residual = max(worst_residual,
                             cones.geodesic_residual(times, embedded, big_cone))
    crit.checks.append(Check("embedded analytic geodesic residual",
                             worst_residual, acc.embedded_geodesic_residual))
    return crit


# ----------------------------------------------------------------------
# criterion 9: gauge-theory consistency
# ----------------------------------------------------------------------

def criterion_gauge(seed: int, acc: AcceptanceTolerances) -> Criterion:
    crit = Criterion(9, "gauge-theory consistency (force, curvature, connection, identities)")
    rng = np.random.default_rng(_case_seeds(seed + 6, 1)[0])

    worst_kk = 0.0
    for _ in range(1000):
        r = _unit_vector(rng, 3) * rng.uniform(0.5, 2.0)
        if r[2] + np.linalg.norm(r) < 0.2:
            continue
        r_dot = rng.normal(size=3)
        lam = rng.uniform(-3.0, 3.0)
        worst_kk = max(worst_kk, dynamics.dirac_kaluza_klein_residual(r, r_dot, lam))
    crit.checks.append(Check("abelian gauge force vs direct force", worst_kk,
                             acc.kaluza_klein))

    h = TOL.fd_step
    worst_curv = 0.0
    for _ in range(100):
        u = rng.uniform(-1.2, 1.2, size=4)
        basis = np.eye(4)
        for a in range(4):
            for b in range(a + 1, 4):
                da = (gauge.gauge_matrix(u + h * basis[a])[:, b]
                      - gauge.gauge_matrix(u - h * basis[a])[:, b]) / (2 * h)
                db = (gauge.gauge_matrix(u + h * basis[b])[:, a]
                      - gauge.gauge_matrix(u - h * basis[b])[:, a]) / (2 * h)
                cols = gauge.gauge_matrix(u)
                strength = da - db + gauge.bracket(cols[:, a], cols[:, b])
                value = gauge.yang_curvature(u, basis[a], basis[b])
                worst_curv = max(worst_curv, float(np.max(np.abs(
                    value - 0.5 * strength))))
    crit.checks.append(Check("curvature vs structure equation", worst_curv,
                             acc.curvature_structure))

    worst_theta = 0.0
    for _ in range(1000):
        p = rng.normal(size=8)
        if np.linalg.norm(p) < 0.3:
            continue
        fields = gauge.vertical_fields(p)
        for i in range(3):
            theta = gauge.su2_connection(p, fields[i])
            worst_theta = max(worst_theta, float(np.max(np.abs(
                theta - np.eye(3)[i]))))
    crit.checks.append(Check("connection reproduces the basis", worst_theta,
                             acc.theta_reproducing))

    worst_exact = 0.0
    worst_fd = 0.0
    for _ in range(60):
        u = rng.uniform(-1.2, 1.2, size=4)
        u_dot = rng.normal(size=4)
        e = rng.normal(size=3)
        res1, res2, res3 = gauge.yang_identity_residuals(u, u_dot, e)
        worst_exact = max(worst_exact, res1, res2)
        worst_fd = max(worst_fd, res3)
    crit.checks.append(Check("algebraic identities (exact pair)", worst_exact,
                             acc.identity_exact))
    crit.checks.append(Check("charge-flow identity (finite difference)",
                             worst_fd, acc.identity_fd))
    return crit


# ----------------------------------------------------------------------
# criterion 10: integrator calibration
# ----------------------------------------------------------------------

def criterion_integrator(acc: AcceptanceTolerances) -> Criterion:
    crit = Criterion(10, "integrator calibration (order, growth benchmark)")

    def oscillator(t, y):
        return np.array([y[1], -y[0]])

    t_end = 2.0 * math.pi * 10.0
    errors = []
    for step in (1e-2, 5e-3, 2.5e-3):
        problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                             t0=0.0, t1=t_end, step=step)
        traj = rk4_integrate(problem)
        errors.append(float(np.max(np.abs(traj.states[-1] - [1.0, 0.0]))))
    slopes = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
    order_dev = max(abs(s - 4.0) for s in slopes)
    crit.checks.append(Check("observed order minus 4", order_dev,
                             acc.rk4_order_window))

    problem = OdeProblem(rhs=lambda t, y: y, y0=np.array([1.0]),
                         t0=0.0, t1=1.0, step=1e-3)
    traj = rk4_integrate(problem)
    exp_err = abs(float(traj.states[-1][0]) - math.e)
    crit.checks.append(Check("exponential benchmark error", exp_err,
                             acc.exp_benchmark))
    return crit


# ----------------------------------------------------------------------
# driver
# ----------------------------------------------------------------------

_TITLES = {
    1: "abelian conservation (L, speed)",
    2: "abelian cone law (angle, aperture)",
    3: "abelian trajectory matches the closed form",
    4: "su(2) conservation (L, |e|, speed, e.e_dot)",
    5: "su(2) cone theorem (membership, aperture, fit, geodesic)",
    6: "radial-projection derivative relation",
    7: "cone geometry oracles (Christoffel, sphere, canonical form, embedding)",
    8: "cone theorem, both directions (reduce and embed)",
    9: "gauge-theory consistency (force, curvature, connection, identities)",
    10: "integrator calibration (order, growth benchmark)",
}


def run_battery(seed: int = 42, count: int = 50,
                acc: AcceptanceTolerances | None = None,
                t_end: float = 10.0, step: float = 1e-3,
                log=None) -> BatteryResult:
    """Run the full acceptance battery and collect per-criterion results.

    ``count`` scales the conservation ensembles; the stated acceptance run
    uses ``seed=42, count=50``.  ``log`` receives one line per criterion as
    it completes.  A criterion whose computation aborts (a guard fires, a fit
    degenerates) is reported as failed rather than crashing the battery.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    acc = acc or AcceptanceTolerances()
    criteria: list[Criterion] = []

    def emit(indices, builder):
        try:
            built = builder()
        except (MonopoleError, ValueError, FloatingPointError) as exc:
            built = []
            for index in indices:
                crit = Criterion(index, _TITLES[index])
                crit.checks.append(Check(
                    f"aborted: {type(exc).__name__}: {exc}", math.inf, 0.0))
                built.append(crit)
        if isinstance(built, Criterion):
            built = [built]
        for criterion in built:
            criteria.append(criterion)
            if log is not None:
                log(criterion.summary())

    emit((1, 2), lambda: criterion_dirac_conservation(seed, count, acc, t_end, step))
    emit((3,), lambda: criterion_dirac_analytic(seed, count, acc, step))
    emit((4, 5, 6), lambda: criteria_yang(seed, count, acc, t_end, step))
    emit((7,), lambda: criterion_cone_geometry(seed, acc))
    emit((8,), lambda: criterion_theorem_reduction(seed, acc, step))
    emit((9,), lambda: criterion_gauge(seed, acc))
    emit((10,), lambda: criterion_integrator(acc))
    criteria.sort(key=lambda c: c.index)
    return BatteryResult(seed=seed, count=count, criteria=criteria)
