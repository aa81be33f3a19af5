"""Explicit Runge-Kutta integration with monitor hooks.

Fixed-step classical RK4 is the workhorse: given identical inputs it produces
bit-identical trajectories on one platform, because the number of steps, the
summation order inside each stage, and the step size are all derived
deterministically.  Step-doubling error control is available as an opt-in.

States are arbitrary-shape float ndarrays; a batch of independent systems can
therefore be integrated as one stacked state.  Negative time spans integrate
with sign-flipped steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GuardHalt, NonFiniteState, StepUnderflow
from .tolerances import DEFAULT as TOL


@dataclass(frozen=True)
class OdeProblem:
    """First-order system ``y' = rhs(t, y)`` on a fixed time span."""

    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    t1: float
    step: float

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.t1 == self.t0:
            raise ValueError("time span is empty")
        y0 = np.asarray(self.y0, dtype=float)
        if not np.all(np.isfinite(y0)):
            raise ValueError("initial state has non-finite entries")
        object.__setattr__(self, "y0", y0)


@dataclass(frozen=True)
class MonitorHook:
    """Named pure function of ``(t, state)`` evaluated at every accepted step."""

    name: str
    fn: Callable[[float, np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Time-ordered samples of a state with attached monitor channels."""

    times: np.ndarray
    states: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.shape[0]

    def monitor(self, name: str) -> np.ndarray:
        return self.monitors[name]


def rk4_step(rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical fourth-order step with a fixed stage summation order."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _plan_steps(t0: float, t1: float, step: float) -> tuple[int, float]:
    """Number of uniform steps and signed step size covering [t0, t1]."""
    span = t1 - t0
    ratio = abs(span) / step
    n = int(round(ratio))
    if n < 1 or abs(n - ratio) > 1e-9 * max(1.0, ratio):
        n = int(math.ceil(ratio))
    return n, span / n


def _finish(times: list, states: list, hook_values: dict, meta: dict) -> Trajectory:
    monitors = {name: np.array(vals) for name, vals in hook_values.items()}
    return Trajectory(times=np.array(times), states=np.array(states),
                      monitors=monitors, meta=meta)


def _record(t, y, hooks, times, states, hook_values) -> None:
    times.append(t)
    states.append(y)
    for hook in hooks:
        hook_values[hook.name].append(hook.fn(t, y))


def rk4_integrate(problem: OdeProblem, hooks: tuple[MonitorHook, ...] = ()) -> Trajectory:
    """Integrate with fixed-step classical RK4, recording every step.

    Guard errors raised by the right-hand side propagate with the partial
    trajectory attached; NaN or infinity in the state raises
    :class:`NonFiniteState`.
    """
    n_steps, h = _plan_steps(problem.t0, problem.t1, problem.step)
    times: list[float] = []
    states: list[np.ndarray] = []
    hook_values: dict[str, list] = {hook.name: [] for hook in hooks}
    meta = {"method": "rk4", "step": abs(h)}
    t, y = problem.t0, problem.y0
    _record(t, y, hooks, times, states, hook_values)
    try:
        for i in range(n_steps):
            y = rk4_step(problem.rhs, t, y, h)
            t = problem.t0 + (i + 1) * h
            if not np.all(np.isfinite(y)):
                raise NonFiniteState(f"state became non-finite at t = {t}")
            _record(t, y, hooks, times, states, hook_values)
    except GuardHalt as halt:
        halt.partial = _finish(times, states, hook_values,
                               dict(meta, halted=str(halt)))
        raise
    return _finish(times, states, hook_values, meta)


def step_doubling_integrate(problem: OdeProblem, tol: float,
                            hooks: tuple[MonitorHook, ...] = ()) -> Trajectory:
    """Integrate with RK4 and step-halving error control.

    Each step is taken once at full size and twice at half size; the
    difference is the local error estimate.  Steps halve while the estimate
    exceeds ``tol``, double when it drops below ``tol / 32``, and stay inside
    the configured clamp.  The acceptance rule is deterministic, so repeat
    runs are identical.
    """
    if not tol > 0.0:
        raise ValueError(f"error tolerance must be positive, got {tol}")
    direction = 1.0 if problem.t1 > problem.t0 else -1.0
    h = min(max(problem.step, TOL.step_min), TOL.step_max)
    times: list[float] = []
    states: list[np.ndarray] = []
    hook_values: dict[str, list] = {hook.name: [] for hook in hooks}
    meta = {"method": "step-doubling", "tol": tol}
    t, y = problem.t0, problem.y0
    _record(t, y, hooks, times, states, hook_values)
    try:
        while (problem.t1 - t) * direction > 1e-15 * max(1.0, abs(problem.t1)):
            h_try = min(h, abs(problem.t1 - t))
            h_signed = direction * h_try
            y_full = rk4_step(problem.rhs, t, y, h_signed)
            y_half = rk4_step(problem.rhs, t, y, 0.5 * h_signed)
            y_half = rk4_step(problem.rhs, t + 0.5 * h_signed, y_half, 0.5 * h_signed)
            if not (np.all(np.isfinite(y_full)) and np.all(np.isfinite(y_half))):
                raise NonFiniteState(f"state became non-finite near t = {t}")
            estimate = float(np.max(np.abs(y_full - y_half)))
            if estimate > tol:
                if 0.5 * h_try < TOL.step_min:
                    raise StepUnderflow(
                        f"required step below {TOL.step_min} at t = {t}")
                h = 0.5 * h_try
                continue
            t = t + h_signed
            y = y_half
            _record(t, y, hooks, times, states, hook_values)
            if estimate < tol / TOL.step_grow_divisor:
                h = min(2.0 * h_try, TOL.step_max)
    except GuardHalt as halt:
        halt.partial = _finish(times, states, hook_values,
                               dict(meta, halted=str(halt)))
        raise
    return _finish(times, states, hook_values, meta)
