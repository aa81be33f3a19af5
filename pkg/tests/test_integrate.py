import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from monopole_cones.errors import (ApexReached, NonFiniteState, StepUnderflow)
from monopole_cones.integrate import (MonitorHook, OdeProblem, Trajectory,
                                      rk4_integrate, rk4_step,
                                      step_doubling_integrate)


def oscillator(t, y):
    return np.array([y[1], -y[0]])


class TestRk4:
    def test_constant_rhs(self):
        problem = OdeProblem(rhs=lambda t, y: np.zeros(3),
                             y0=np.array([1.0, -2.0, 3.0]),
                             t0=0.0, t1=2.0, step=0.1)
        traj = rk4_integrate(problem)
        assert len(traj) == 21
        assert np.array_equal(traj.states[-1], traj.states[0])

    def test_exponential_growth(self):
        problem = OdeProblem(rhs=lambda t, y: y, y0=np.array([1.0]),
                             t0=0.0, t1=1.0, step=1e-3)
        traj = rk4_integrate(problem)
        assert abs(traj.states[-1][0] - math.e) < 1e-11

    def test_harmonic_energy_drift(self):
        t_end = 2.0 * math.pi * 10.0
        problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                             t0=0.0, t1=t_end, step=1e-3)
        traj = rk4_integrate(problem)
        energy = 0.5 * np.sum(traj.states**2, axis=1)
        assert np.max(np.abs(energy - energy[0])) < 1e-9

    def test_observed_order_is_four(self):
        t_end = 2.0 * math.pi * 10.0
        errors = []
        for step in (1e-2, 5e-3, 2.5e-3):
            problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                                 t0=0.0, t1=t_end, step=step)
            traj = rk4_integrate(problem)
            errors.append(np.max(np.abs(traj.states[-1] - [1.0, 0.0])))
        for i in range(2):
            slope = math.log2(errors[i] / errors[i + 1])
            assert abs(slope - 4.0) <= 0.2

    def test_bit_identical_reruns(self):
        problem = OdeProblem(rhs=oscillator, y0=np.array([0.3, 0.7]),
                             t0=0.0, t1=3.0, step=1e-3)
        a = rk4_integrate(problem)
        b = rk4_integrate(problem)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.times, b.times)

    def test_negative_time_span(self):
        problem = OdeProblem(rhs=lambda t, y: y, y0=np.array([1.0]),
                             t0=0.0, t1=-1.0, step=1e-3)
        traj = rk4_integrate(problem)
        assert traj.times[-1] == pytest.approx(-1.0)
        assert abs(traj.states[-1][0] - math.exp(-1.0)) < 1e-11

    def test_batched_state_shape(self):
        y0 = np.arange(12.0).reshape(4, 3)
        problem = OdeProblem(rhs=lambda t, y: -y, y0=y0, t0=0.0, t1=1.0, step=1e-2)
        traj = rk4_integrate(problem)
        assert traj.states.shape == (101, 4, 3)
        assert_allclose(traj.states[-1], y0 * math.exp(-1.0), atol=1e-9)

    def test_non_finite_state_detected(self):
        problem = OdeProblem(rhs=lambda t, y: y * y, y0=np.array([5.0]),
                             t0=0.0, t1=10.0, step=0.5)
        with np.errstate(over="ignore"), pytest.raises(NonFiniteState):
            rk4_integrate(problem)

    def test_monitor_hooks_recorded(self):
        hooks = (MonitorHook("energy", lambda t, y: 0.5 * float(y @ y)),)
        problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                             t0=0.0, t1=1.0, step=0.1)
        traj = rk4_integrate(problem, hooks)
        assert traj.monitor("energy").shape == (11,)
        assert_allclose(traj.monitor("energy"), 0.5, atol=1e-6)

    def test_guard_halt_carries_partial(self):
        def rhs(t, y):
            if y[0] < 0.2:
                raise ApexReached("too close")
            return np.array([-1.0])

        problem = OdeProblem(rhs=rhs, y0=np.array([1.0]), t0=0.0, t1=5.0, step=0.1)
        with pytest.raises(ApexReached) as info:
            rk4_integrate(problem)
        partial = info.value.partial
        assert isinstance(partial, Trajectory)
        assert len(partial) > 2
        assert partial.states[-1][0] > 0.2

    def test_rejects_bad_problem(self):
        with pytest.raises(ValueError):
            OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                       t0=0.0, t1=1.0, step=0.0)
        with pytest.raises(ValueError):
            OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                       t0=1.0, t1=1.0, step=0.1)

    def test_span_not_divisible_by_step(self):
        problem = OdeProblem(rhs=lambda t, y: y, y0=np.array([1.0]),
                             t0=0.0, t1=1.0, step=0.3)
        traj = rk4_integrate(problem)
        assert traj.times[-1] == pytest.approx(1.0)


class TestRk4Step:
    def test_single_step_accuracy(self):
        # one local step carries an O(h^5) defect, about h^5/120 here
        y = rk4_step(lambda t, y: y, 0.0, np.array([1.0]), 0.1)
        assert abs(y[0] - math.exp(0.1)) < 2e-7


class TestStepDoubling:
    def test_matches_fixed_step_on_smooth_problem(self):
        problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                             t0=0.0, t1=5.0, step=1e-2)
        fixed = rk4_integrate(OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                                         t0=0.0, t1=5.0, step=1e-3))
        adaptive = step_doubling_integrate(problem, tol=1e-12)
        assert np.max(np.abs(adaptive.states[-1] - fixed.states[-1])) < 1e-8

    def test_zero_tolerance_rejected(self):
        problem = OdeProblem(rhs=oscillator, y0=np.array([1.0, 0.0]),
                             t0=0.0, t1=1.0, step=1e-2)
        with pytest.raises(ValueError):
            step_doubling_integrate(problem, tol=0.0)

    def test_near_apex_halts_with_guard_not_underflow(self):
        # radial infall: the radius guard fires before the controller starves
        def rhs(t, y):
            r = np.linalg.norm(y[:3])
            if r < 1e-6:
                raise ApexReached("apex")
            acc = 1.0 * np.cross(y[:3], y[3:]) / r**3
            return np.concatenate([y[3:], acc])

        y0 = np.array([1.0, 0, 0, -1.0, 1e-12, 0])
        problem = OdeProblem(rhs=rhs, y0=y0, t0=0.0, t1=5.0, step=1e-2)
        with pytest.raises(ApexReached):
            step_doubling_integrate(problem, tol=1e-9)

    def test_underflow_on_discontinuous_forcing(self):
        def rhs(t, y):
            return np.array([0.0 if t < 0.5 else 1e9])

        problem = OdeProblem(rhs=rhs, y0=np.array([0.0]), t0=0.0, t1=1.0, step=1e-2)
        with pytest.raises(StepUnderflow):
            step_doubling_integrate(problem, tol=1e-10)

    def test_deterministic(self):
        problem = OdeProblem(rhs=oscillator, y0=np.array([0.2, 0.4]),
                             t0=0.0, t1=2.0, step=1e-2)
        a = step_doubling_integrate(problem, tol=1e-9)
        b = step_doubling_integrate(problem, tol=1e-9)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.times, b.times)
