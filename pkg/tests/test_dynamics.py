import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from monopole_cones import charts, cones, dynamics, gauge
from monopole_cones.dynamics import (DiracState, YangState, dirac_cone,
                                     dirac_conserved_vector,
                                     dirac_kaluza_klein_residual, dirac_rhs,
                                     recover_dirac_charge, simulate,
                                     verify_cone_dirac, verify_cone_yang,
                                     yang_aperture, yang_cone,
                                     yang_conserved_vector, yang_rhs)
from monopole_cones.errors import (ApexReached, ChartSingularity,
                                   CollidingState, CollidingTrajectory,
                                   DegenerateCharge)
from monopole_cones.integrate import Trajectory, rk4_step

from conftest import random_unit


def random_yang_state(rng, charge_scale=1.5):
    u = rng.uniform(-0.5, 0.5, size=4)
    r = float(rng.uniform(0.9, 1.6))
    s = 1.0 + u @ u
    u_dot = random_unit(rng, 4) * rng.uniform(0.8, 1.2) * s / (2.0 * r**2)
    r_dot = float(rng.uniform(-0.3, 0.3))
    e = charge_scale * random_unit(rng, 3)
    return YangState(u=u, r=r, u_dot=u_dot, r_dot=r_dot, e=e)


class TestDiracRhs:
    def test_hand_value(self):
        acc = dirac_rhs([1.0, 0, 0], [0, 1.0, 0], 2.0)
        assert_allclose(acc, [0, 0, 2.0], atol=0)

    def test_zero_charge_free_motion(self, rng):
        acc = dirac_rhs(rng.normal(size=3), rng.normal(size=3), 0.0)
        assert_allclose(acc, np.zeros(3), atol=0)

    def test_force_orthogonal_to_velocity(self, rng):
        for _ in range(200):
            r = random_unit(rng, 3) * rng.uniform(0.3, 2.0)
            v = rng.normal(size=3)
            acc = dirac_rhs(r, v, rng.uniform(-3, 3))
            assert abs(acc @ v) < 1e-12 * max(1.0, np.linalg.norm(acc)
                                              * np.linalg.norm(v))

    def test_colliding_ray_feels_no_force(self, rng):
        # parallel cross products cancel to the last rounding of each product
        direction = random_unit(rng, 3)
        acc = dirac_rhs(direction * 1.3, direction * 0.7, 2.5)
        assert np.max(np.abs(acc)) < 1e-15


class TestDiracConservedVector:
    def test_hand_value(self):
        assert_allclose(dirac_conserved_vector([1.0, 0, 0], [0, 1.0, 0], 2.0),
                        [2.0, 0, 1.0], atol=0)

    def test_colliding_zero_charge_vanishes(self, rng):
        direction = random_unit(rng, 3)
        out = dirac_conserved_vector(direction, 0.4 * direction, 0.0)
        assert np.max(np.abs(out)) < 1e-15

    def test_constant_along_trajectory(self, rng):
        state = DiracState(r=[1.1, -0.4, 0.3], r_dot=[0.2, 0.9, -0.5], lam=1.7)
        traj = simulate(state, t_end=10.0, step=1e-3)
        big_l = traj.monitors["L"]
        assert np.max(np.abs(big_l - big_l[0])) < 1e-7


class TestDiracCone:
    def test_hand_example(self):
        cone = dirac_cone(DiracState(r=[1, 0, 0], r_dot=[0, 1, 0], lam=2.0))
        assert_allclose(cone.direction, np.array([2.0, 0, 1.0]) / math.sqrt(5),
                        atol=1e-15)
        assert math.cos(cone.aperture) == pytest.approx(2 / math.sqrt(5),
                                                        abs=1e-15)

    def test_perpendicular_angle_identity(self):
        # arctan(r0 v0 / lam) against arccos(lam/|L|) at perpendicular data
        cone = dirac_cone(DiracState(r=[1, 0, 0], r_dot=[0, 1, 0], lam=2.0))
        assert cone.aperture == pytest.approx(math.atan(0.5), abs=1e-12)

    def test_zero_charge_flat_cone(self):
        cone = dirac_cone(DiracState(r=[1, 0, 0], r_dot=[0, 1, 0], lam=0.0))
        assert cone.aperture == pytest.approx(math.pi / 2)
        assert cone.is_flat

    def test_negative_charge_flips_axis(self):
        plus = dirac_cone(DiracState(r=[1, 0, 0], r_dot=[0, 1, 0], lam=2.0))
        minus = dirac_cone(DiracState(r=[1, 0, 0], r_dot=[0, -1, 0], lam=-2.0))
        assert minus.aperture == pytest.approx(plus.aperture, abs=1e-14)
        assert_allclose(minus.direction, plus.direction * [1, 1, 1], atol=1e-12)
        assert minus.contains([1.0, 0, 0])

    def test_colliding_state_rejected(self, rng):
        direction = random_unit(rng, 3)
        with pytest.raises(CollidingState):
            dirac_cone(DiracState(r=direction, r_dot=0.5 * direction, lam=1.0))

    def test_trajectory_stays_on_cone(self, rng):
        state = DiracState(r=[0.9, 0.2, -0.4], r_dot=[0.1, 0.8, 0.4], lam=-1.3)
        cone = dirac_cone(state)
        traj = simulate(state, t_end=10.0, step=1e-3)
        r, _ = dynamics.unpack_dirac(traj.states)
        assert np.max(cone.membership_residual(r)) < 1e-6


class TestYangRhs:
    def test_rest_chart_velocity_is_colliding_ray(self, rng):
        u_ddot, r_ddot, e_dot = yang_rhs(rng.normal(size=4), 1.3,
                                         np.zeros(4), 0.8, rng.normal(size=3))
        assert np.array_equal(u_ddot, np.zeros(4))
        assert r_ddot == 0.0
        assert np.array_equal(e_dot, np.zeros(3))

    def test_zero_charge_reduces_to_flat_cone_geodesics(self, rng):
        u = rng.normal(size=4)
        r = 1.4
        u_dot = rng.normal(size=4)
        r_dot = -0.2
        u_ddot, r_ddot, e_dot = yang_rhs(u, r, u_dot, r_dot, np.zeros(3))
        v_ddot, rad_ddot = cones.cone_geodesic_rhs(u, r, u_dot, r_dot,
                                                   math.pi / 2)
        assert_allclose(u_ddot, v_ddot, atol=1e-14)
        assert r_ddot == pytest.approx(rad_ddot, abs=1e-14)
        assert np.array_equal(e_dot, np.zeros(3))

    def test_charge_stays_orthogonal_to_its_rate(self, rng):
        for _ in range(200):
            state = random_yang_state(rng)
            _, _, e_dot = yang_rhs(state.u, state.r, state.u_dot,
                                   state.r_dot, state.e)
            assert abs(state.e @ e_dot) < 1e-12

    def test_apex_guard(self):
        with pytest.raises(ApexReached):
            yang_rhs(np.zeros(4), 0.0, np.ones(4), 0.0, np.ones(3))


class TestYangConservedVector:
    def test_chart_origin_closed_form(self, rng):
        # every gauge-matrix term drops at u = 0
        r = 1.4
        u_dot = rng.normal(size=4)
        e = rng.normal(size=3)
        big_l = yang_conserved_vector(np.zeros(4), r, u_dot, 0.3, e)
        expected_head = r * r * (gauge.charge_matrix(e) @ u_dot)
        assert_allclose(big_l[:4], expected_head, atol=1e-14)
        assert big_l[4] == pytest.approx(-0.25 * (e @ e), abs=1e-14)
        # and the position sits at the stated angle to it
        x = charts.stereo_to_cartesian(np.zeros(4), r)
        cos_angle = x @ big_l / (np.linalg.norm(x) * np.linalg.norm(big_l))
        assert cos_angle == pytest.approx(
            (e @ e) / (4 * np.linalg.norm(big_l)), abs=1e-14)

    def test_zero_charge_vanishes(self, rng):
        big_l = yang_conserved_vector(rng.normal(size=4), 1.1,
                                      rng.normal(size=4), 0.2, np.zeros(3))
        assert np.max(np.abs(big_l)) < 1e-15

    def test_constant_along_trajectory(self, rng):
        state = random_yang_state(rng)
        traj = simulate(state, t_end=10.0, step=1e-3)
        big_l = traj.monitors["L"]
        assert np.max(np.abs(big_l - big_l[0])) < 1e-6


class TestYangCone:
    def test_aperture_example(self):
        state = YangState(u=np.zeros(4), r=1.0, u_dot=[1.0, 0, 0, 0],
                          r_dot=0.0, e=[2.0, 0, 0])
        assert math.cos(yang_aperture(state)) == pytest.approx(
            1.0 / math.sqrt(5.0), abs=1e-15)

    def test_aperture_tightens_with_charge(self):
        apertures = []
        for scale in (1.0, 10.0, 100.0):
            state = YangState(u=np.zeros(4), r=1.0, u_dot=[1.0, 0, 0, 0],
                              r_dot=0.0, e=[scale, 0, 0])
            apertures.append(yang_aperture(state))
        assert apertures[0] > apertures[1] > apertures[2]

    def test_aperture_consistent_with_conserved_vector(self, rng):
        for _ in range(1000):
            state = random_yang_state(rng, charge_scale=rng.uniform(0.5, 3.0))
            big_l = yang_conserved_vector(state.u, state.r, state.u_dot,
                                          state.r_dot, state.e)
            via_l = (state.e @ state.e) / (4.0 * np.linalg.norm(big_l))
            assert abs(math.cos(yang_aperture(state)) - via_l) < 1e-12

    def test_colliding_rejected(self, rng):
        state = YangState(u=rng.normal(size=4), r=1.0, u_dot=np.zeros(4),
                          r_dot=0.5, e=[1.0, 0, 0])
        with pytest.raises(CollidingState):
            yang_cone(state)

    def test_zero_charge_rejected(self, rng):
        state = YangState(u=rng.normal(size=4), r=1.0,
                          u_dot=rng.normal(size=4), r_dot=0.0, e=np.zeros(3))
        with pytest.raises(DegenerateCharge):
            yang_cone(state)

    def test_trajectory_stays_on_cone(self, rng):
        state = random_yang_state(rng)
        cone = yang_cone(state)
        traj = simulate(state, t_end=10.0, step=1e-3)
        u, r, _, _, _ = dynamics.unpack_yang(traj.states)
        x = charts.stereo_to_cartesian(u, r)
        assert np.max(cone.membership_residual(x)) < 1e-6


class TestSimulate:
    def test_free_particle_straight_line(self):
        state = DiracState(r=[1.0, 0.2, 0.0], r_dot=[0.1, 0.7, 0.3], lam=0.0)
        traj = simulate(state, t_end=10.0, step=1e-3)
        r, _ = dynamics.unpack_dirac(traj.states)
        expected = state.r + traj.times[:, None] * state.r_dot
        assert np.max(np.abs(r - expected)) < 1e-9

    def test_dirac_matches_analytic_rotated(self):
        state = DiracState(r=[1.0, 0, 0], r_dot=[0, 1.0, 0], lam=2.0)
        cone = dirac_cone(state)
        psi = cone.aperture
        m_hat = (state.r / np.linalg.norm(state.r)
                 - math.cos(psi) * cone.direction) / math.sin(psi)
        v_hat = state.r_dot / np.linalg.norm(state.r_dot)
        frame = np.stack([m_hat, v_hat, np.cross(m_hat, v_hat)])
        curve = cones.AnalyticConeGeodesic(r0=1.0, v0=1.0, psi=psi)
        worst = 0.0
        for t_end in (5.0, -5.0):
            traj = simulate(state, t_end=t_end, step=1e-3)
            r, _ = dynamics.unpack_dirac(traj.states)
            worst = max(worst, float(np.max(np.abs(
                r @ frame.T - curve(traj.times)))))
        assert worst < 1e-5

    def test_yang_monitor_channels(self, rng):
        state = random_yang_state(rng)
        traj = simulate(state, t_end=2.0, step=1e-3)
        norm_e = traj.monitors["norm_e"]
        assert np.max(np.abs(norm_e - norm_e[0])) < 1e-8
        speed = traj.monitors["speed"]
        assert np.max(np.abs(speed - speed[0]) / speed[0]) < 1e-7
        cos_psi = traj.monitors["cos_psi"]
        assert np.max(np.abs(cos_psi - cos_psi[0])) < 1e-6
        assert np.max(np.abs(traj.monitors["res_rr"])) < 1e-10
        assert np.max(np.abs(traj.monitors["res_rv"])) < 1e-10

    def test_colliding_yang_ray_runs_flagged(self, rng):
        direction = rng.normal(size=4)
        state = YangState(u=direction, r=1.0, u_dot=np.zeros(4), r_dot=0.4,
                          e=[1.0, 0, 0])
        traj = simulate(state, t_end=1.0, step=1e-2)
        assert traj.meta["colliding"] is True
        u, r, _, _, _ = dynamics.unpack_yang(traj.states)
        assert np.max(np.abs(u - state.u)) < 1e-14      # direction frozen
        assert_allclose(r, 1.0 + 0.4 * traj.times, atol=1e-12)

    def test_apex_halt_carries_partial(self):
        # near-radial infall; the adaptive controller shrinks steps into the
        # guard band, so the halt comes from the apex guard
        state = DiracState(r=[1.0, 0, 0], r_dot=[-1.0, 1e-12, 0], lam=1.0)
        with pytest.raises(ApexReached) as info:
            simulate(state, t_end=5.0, step=1e-2, method="step-doubling",
                     tol=1e-9)
        partial = info.value.partial
        assert partial is not None and len(partial) > 10
        assert "speed" in partial.monitors
        radius = np.linalg.norm(dynamics.unpack_dirac(partial.states)[0], axis=1)
        assert radius.min() < 0.5     # made real progress toward the apex

    def test_chart_guard_halt(self):
        # aim the direction straight at the chart's excluded ray
        state = YangState(u=[5.0, 0, 0, 0], r=1.0, u_dot=[50.0, 0, 0, 0],
                          r_dot=0.0, e=[0.0, 0, 0.01])
        with pytest.raises(ChartSingularity):
            simulate(state, t_end=50.0, step=1e-3)

    def test_adaptive_matches_fixed(self, rng):
        state = random_yang_state(rng)
        fixed = simulate(state, t_end=1.0, step=1e-3)
        adaptive = simulate(state, t_end=1.0, step=1e-2,
                            method="step-doubling", tol=1e-12)
        assert np.max(np.abs(adaptive.states[-1] - fixed.states[-1])) < 1e-8


class TestKaluzaKleinCheck:
    def test_hand_value(self):
        assert dirac_kaluza_klein_residual([1.0, 0, 0], [0, 1.0, 0], 2.0) < 1e-12

    def test_zero_charge(self):
        assert dirac_kaluza_klein_residual([0.3, 0.4, 0.5], [1, 2, 3], 0.0) == 0.0

    def test_random_sweep(self, rng):
        worst = 0.0
        for _ in range(1000):
            r = random_unit(rng, 3) * rng.uniform(0.5, 2.0)
            if r[2] + np.linalg.norm(r) < 0.2:
                continue
            worst = max(worst, dirac_kaluza_klein_residual(
                r, rng.normal(size=3), rng.uniform(-3, 3)))
        assert worst < 1e-10

    def test_excluded_ray(self):
        with pytest.raises(ChartSingularity):
            dirac_kaluza_klein_residual([0, 0, -1.0], [1.0, 0, 0], 1.0)


def lifted_exact_yang_trajectory(state, t_end=4.0, step=1e-3):
    """Assemble a trajectory whose positions follow the exact cone geodesic.

    The state must start at its closest approach (zero radial rate).  The
    charge curve rides along by integrating its precession over the exact
    chart track.
    """
    cone = dynamics.yang_cone(state)
    psi = cone.aperture
    x0 = state.position()
    xdot0 = state.velocity()
    r0, v0 = float(np.linalg.norm(x0)), float(np.linalg.norm(xdot0))
    axis = cone.direction
    m_hat = (x0 / r0 - math.cos(psi) * axis) / math.sin(psi)
    v_hat = xdot0 / v0
    curve = cones.AnalyticConeGeodesic(r0=r0, v0=v0, psi=psi)
    times = np.arange(0.0, t_end + 0.5 * step, step)
    base = curve(times)
    base_dot = curve.velocity(times)
    x = base[:, :1] * m_hat + base[:, 1:2] * v_hat + base[:, 2:] * axis
    x_dot = base_dot[:, :1] * m_hat + base_dot[:, 1:2] * v_hat + base_dot[:, 2:] * axis
    u, r = charts.cartesian_to_stereo(x)
    u_dot, r_dot = charts.pull_velocity(u, r, x_dot)

    e = np.empty((len(times), 3))
    e[0] = state.e
    for i in range(len(times) - 1):
        def flow(t, ev):
            frac = (t - times[i]) / step
            u_here = u[i] * (1 - frac) + u[i + 1] * frac
            du_here = u_dot[i] * (1 - frac) + u_dot[i + 1] * frac
            return -2.0 * gauge.spin_matrix(u_here, du_here) @ ev
        e[i + 1] = rk4_step(flow, times[i], e[i], step)

    states = np.concatenate([u, r[:, None], u_dot, r_dot[:, None], e], axis=1)
    return Trajectory(times=times, states=states, meta={"kind": "yang"})


class TestVerifyConeYang:
    def test_lifted_exact_geodesic(self, rng):
        base = random_yang_state(rng)
        state = YangState(u=base.u, r=base.r, u_dot=base.u_dot, r_dot=0.0,
                          e=base.e)
        traj = lifted_exact_yang_trajectory(state)
        report = verify_cone_yang(traj)
        assert report.plane_fit_residual < 1e-8
        assert report.aperture_error < 1e-8

    def test_random_trajectory_certifies(self, rng):
        state = random_yang_state(rng)
        traj = simulate(state, t_end=10.0, step=1e-3)
        report = verify_cone_yang(traj)
        assert report.l_drift < 1e-6
        assert report.cos_angle_deviation < 1e-6
        assert report.plane_fit_residual < 1e-6
        assert report.aperture_error < 1e-6
        assert report.geodesic_residual < 1e-6
        assert report.derivative_relation_residual < 1e-4

    def test_colliding_rejected(self, rng):
        state = YangState(u=rng.normal(size=4), r=1.0, u_dot=np.zeros(4),
                          r_dot=0.3, e=[1.0, 0, 0])
        traj = simulate(state, t_end=1.0, step=1e-2)
        with pytest.raises(CollidingTrajectory):
            verify_cone_yang(traj)


class TestVerifyConeDirac:
    def test_random_trajectory_certifies(self, rng):
        state = DiracState(r=[1.0, -0.3, 0.5], r_dot=[0.4, 0.8, -0.1], lam=1.4)
        traj = simulate(state, t_end=10.0, step=1e-3)
        report = verify_cone_dirac(traj)
        assert report.aperture == pytest.approx(
            dirac_cone(state).aperture, abs=1e-12)
        assert report.l_drift < 1e-6
        assert report.cos_angle_deviation < 1e-6
        assert report.plane_fit_residual < 1e-6
        assert report.aperture_error < 1e-6
        assert report.geodesic_residual < 1e-6
        assert report.derivative_relation_residual < 1e-4

    def test_charge_recovery(self, rng):
        state = DiracState(r=[1.0, 0.1, -0.2], r_dot=[-0.2, 0.9, 0.3], lam=-1.1)
        traj = simulate(state, t_end=5.0, step=1e-3)
        r, r_dot = dynamics.unpack_dirac(traj.states)
        assert recover_dirac_charge(r, r_dot) == pytest.approx(-1.1, abs=1e-9)


class TestOrthogonalityResiduals:
    def test_yang_residuals_at_round_off(self, rng):
        for _ in range(100):
            state = random_yang_state(rng, charge_scale=rng.uniform(0.5, 3.0))
            res_rr, res_rv = dynamics.yang_orthogonality_residuals(
                state.u, state.r, state.u_dot, state.r_dot, state.e)
            assert abs(res_rr) < 1e-10
            assert abs(res_rv) < 1e-10

    def test_dirac_residuals_exact(self, rng):
        res_rr, res_rv = dynamics.dirac_orthogonality_residuals(
            rng.normal(size=3), rng.normal(size=3), 1.3)
        assert abs(res_rr) < 1e-14
        assert abs(res_rv) < 1e-14
