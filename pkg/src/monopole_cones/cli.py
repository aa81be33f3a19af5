"""Command-line surface: simulate, analyze, verify.

Exit codes: 0 success, 1 verification failure, 2 bad input or parse error,
3 guard halt with partial output flushed, 4 colliding-trajectory analysis
(the report is still emitted, flagged as colliding).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import battery, cones, dynamics, trajio
from .errors import (CollidingState, CollidingTrajectory, GuardHalt,
                     MonopoleError, ParseError)
from .integrate import OdeProblem, rk4_integrate, step_doubling_integrate
from .tolerances import acceptance_from_env

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_GUARD_HALT = 3
EXIT_COLLIDING = 4


@dataclass(frozen=True)
class RunConfig:
    """Validated simulation request assembled from command-line flags."""

    kind: str                    # dirac | yang | cone-geodesic
    state_numbers: dict
    t_end: float
    step: float
    out: Path | None
    fmt: str
    adaptive_tol: float | None
    seed: int | None = None

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end != 0.0):
            raise ValueError("t-end must be finite and nonzero")
        if not (np.isfinite(self.step) and self.step > 0.0):
            raise ValueError("step must be a positive real")
        for key, value in self.state_numbers.items():
            if not np.all(np.isfinite(np.asarray(value, dtype=float))):
                raise ValueError(f"--{key} must be finite")


def _vector(text: str) -> np.ndarray:
    """Comma-separated decimals without spaces, e.g. ``1,0,0``.

    Vectors with a leading minus sign need the ``--flag=value`` spelling so
    the shell-level parser does not mistake them for options.
    """
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}") from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monopole-cones",
        description="Simulate monopole dynamics and certify the cone-geodesic law.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one trajectory to a file")
    sim_sub = sim.add_subparsers(dest="kind", required=True)

    def add_common(p):
        p.add_argument("--t-end", type=float, required=True,
                       help="final time (negative integrates backwards)")
        p.add_argument("--step", type=float, required=True, help="step size")
        p.add_argument("--out", type=Path, default=None,
                       help="output file (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json-lines"),
                       default="csv")
        p.add_argument("--adaptive-tol", type=float, default=None,
                       help="enable step-doubling control at this local tolerance")

    dirac = sim_sub.add_parser("dirac", help="abelian monopole in punctured R^3")
    dirac.add_argument("--r0", type=_vector, required=True, help="initial position x,y,z")
    dirac.add_argument("--v0", type=_vector, required=True, help="initial velocity")
    dirac.add_argument("--lambda", dest="lam", type=float, required=True,
                       help="charge parameter")
    add_common(dirac)

    yang = sim_sub.add_parser("yang", help="su(2) monopole in punctured R^5")
    yang.add_argument("--u", type=_vector, required=True, help="chart point u1,u2,u3,u4")
    yang.add_argument("--r", type=float, required=True, help="radius")
    yang.add_argument("--du", type=_vector, required=True, help="chart velocity")
    yang.add_argument("--dr", type=float, required=True, help="radius rate")
    yang.add_argument("--e", type=_vector, required=True, help="charge vector e1,e2,e3")
    add_common(yang)

    cone = sim_sub.add_parser("cone-geodesic",
                              help="geodesic flow on a standard cone")
    cone.add_argument("--psi", type=float, required=True, help="aperture in (0, pi/2]")
    cone.add_argument("--v", type=_vector, required=True, help="chart point")
    cone.add_argument("--r", type=float, required=True, help="radius")
    cone.add_argument("--dv", type=_vector, required=True, help="chart velocity")
    cone.add_argument("--dr", type=float, required=True, help="radius rate")
    add_common(cone)

    analyze = sub.add_parser("analyze", help="certify the cone law on a trajectory file")
    analyze.add_argument("file", type=Path, help="trajectory file (csv or json-lines)")
    analyze.add_argument("--out", type=Path, default=None,
                         help="report path (default: stdout); figures land beside it")
    figs = analyze.add_mutually_exclusive_group()
    figs.add_argument("--figures", dest="figures", action="store_true", default=None,
                      help="force figure rendering even without --out")
    figs.add_argument("--no-figures", dest="figures", action="store_false",
                      help="suppress figure rendering")

    verify = sub.add_parser("verify", help="run the seeded acceptance battery")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--count", type=_positive_int, default=50,
                        help="number of random cases per monopole (>= 1)")
    verify.add_argument("--t-end", type=float, default=10.0)
    verify.add_argument("--step", type=float, default=1e-3)
    return parser


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def _simulate_cone(config: RunConfig):
    numbers = config.state_numbers
    psi = numbers["psi"]
    if not 0.0 < psi <= math.pi / 2 + 1e-15:
        raise ValueError("psi must lie in (0, pi/2]")
    v0 = numbers["v"]
    dv0 = numbers["dv"]
    if v0.shape != dv0.shape:
        raise ValueError("--v and --dv must have the same dimension")
    m = v0.shape[0]
    y0 = np.concatenate([v0, [numbers["r"]], dv0, [numbers["dr"]]])

    def rhs(t, y):
        v, r = y[:m], y[m]
        v_dot, r_dot = y[m + 1:2 * m + 1], y[2 * m + 1]
        if r < 1e-9:
            raise GuardHalt("cone geodesic reached the apex")
        v_ddot, r_ddot = cones.cone_geodesic_rhs(v, r, v_dot, r_dot, psi)
        return np.concatenate([v_dot, [r_dot], v_ddot, [r_ddot]])

    problem = OdeProblem(rhs=rhs, y0=y0, t0=0.0, t1=config.t_end, step=config.step)
    if config.adaptive_tol is not None:
        traj = step_doubling_integrate(problem, config.adaptive_tol)
    else:
        traj = rk4_integrate(problem)
    traj.meta.update({"kind": "cone", "psi": psi, "v_dim": m,
                      "colliding": bool(np.linalg.norm(dv0) < 1e-10)})
    v = traj.states[:, :m]
    r = traj.states[:, m]
    v_dot = traj.states[:, m + 1:2 * m + 1]
    r_dot = traj.states[:, 2 * m + 1]
    s = 1.0 + np.sum(v * v, axis=-1)
    speed = np.sqrt(4.0 * r**2 * math.sin(psi) ** 2
                    * np.sum(v_dot**2, axis=-1) / s**2 + r_dot**2)
    x = cones.cone_param(v, r, psi)
    membership = np.abs(x[:, -1] / np.linalg.norm(x, axis=-1) - math.cos(psi))
    traj.monitors.update({"speed": speed, "membership": membership})
    return traj


def cmd_simulate(config: RunConfig) -> int:
    numbers = config.state_numbers
    try:
        if config.kind == "dirac":
            state = dynamics.DiracState(r=numbers["r0"], r_dot=numbers["v0"],
                                        lam=numbers["lam"])
        elif config.kind == "yang":
            state = dynamics.YangState(u=numbers["u"], r=numbers["r"],
                                       u_dot=numbers["du"], r_dot=numbers["dr"],
                                       e=numbers["e"])
        else:
            traj = _simulate_cone(config)
            _emit_trajectory(traj, config)
            return EXIT_OK
        method = "rk4" if config.adaptive_tol is None else "step-doubling"
        traj = dynamics.simulate(state, t_end=config.t_end, step=config.step,
                                 method=method,
                                 tol=config.adaptive_tol or 1e-9)
    except GuardHalt as halt:
        print(f"halt: {halt}", file=sys.stderr)
        if halt.partial is not None and len(halt.partial) > 0:
            _emit_trajectory(halt.partial, config)
        return EXIT_GUARD_HALT
    except (MonopoleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    _emit_trajectory(traj, config)
    return EXIT_OK


def _emit_trajectory(traj, config: RunConfig) -> None:
    if config.out is None:
        sys.stdout.write(trajio.render_trajectory(traj, config.fmt))
    else:
        trajio.write_trajectory(traj, config.out, config.fmt)


# ----------------------------------------------------------------------
# analyze
# ----------------------------------------------------------------------

def _report_payload(report, colliding: bool) -> dict:
    payload = dataclasses.asdict(report)
    payload["direction"] = [float(c) for c in report.direction]
    payload["conserved_vector"] = [float(c) for c in report.conserved_vector]
    payload["colliding"] = colliding
    payload["aperture_degrees"] = math.degrees(report.aperture)
    return payload


def cmd_analyze(path: Path, out: Path | None, figures: bool | None) -> int:
    try:
        traj = trajio.read_trajectory(path)
        if len(traj) < 10:
            raise ParseError("need at least 10 samples to analyze")
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    colliding = False
    try:
        if traj.meta["kind"] == "yang":
            report = dynamics.verify_cone_yang(traj)
        else:
            report = dynamics.verify_cone_dirac(traj)
        payload = _report_payload(report, colliding=False)
    except (CollidingTrajectory, CollidingState) as exc:
        colliding = True
        payload = {"kind": traj.meta["kind"], "colliding": True, "reason": str(exc)}
    except (MonopoleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    want_figures = figures if figures is not None else out is not None
    if want_figures and not colliding:
        from . import figures as figmod   # deferred: matplotlib is heavy
        stem = (out if out is not None else path).with_suffix("")
        for fig_path in figmod.render_report_figures(traj, report, stem):
            print(f"figure: {fig_path}", file=sys.stderr)
    return EXIT_COLLIDING if colliding else EXIT_OK


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def cmd_verify(seed: int, count: int, t_end: float, step: float) -> int:
    acc = acceptance_from_env()
    result = battery.run_battery(seed=seed, count=count, acc=acc,
                                 t_end=t_end, step=step, log=print)
    print()
    for criterion in result.criteria:
        for check in criterion.checks:
            print(f"    {criterion.index:2d}. {check.describe()}")
    if result.passed:
        print(f"\nall {len(result.criteria)} criteria passed "
              f"(seed {seed}, count {count})")
        return EXIT_OK
    failing = [c for c in result.criteria if not c.passed]
    print(f"\nFAILED criteria: {[c.index for c in failing]} "
          f"(seed {seed}, count {count})")
    return EXIT_VERIFY_FAILED


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate":
        keys = {"dirac": ("r0", "v0", "lam"),
                "yang": ("u", "r", "du", "dr", "e"),
                "cone-geodesic": ("psi", "v", "r", "dv", "dr")}[args.kind]
        try:
            config = RunConfig(kind=args.kind,
                               state_numbers={k: getattr(args, k) for k in keys},
                               t_end=args.t_end, step=args.step, out=args.out,
                               fmt=args.fmt, adaptive_tol=args.adaptive_tol)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
        return cmd_simulate(config)
    if args.command == "analyze":
        return cmd_analyze(args.file, args.out, args.figures)
    if args.command == "verify":
        return cmd_verify(args.seed, args.count, args.t_end, args.step)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
