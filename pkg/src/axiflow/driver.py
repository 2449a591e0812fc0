"""Time stepping, diagnostics and singularity detection."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (DEGENERACY_RTOL, AxisCrossing, BoundarySpec, Curve, DegenerateMesh,
                       discrete_volume, element_lengths, mesh_ratio, total_energy)
from .newton import NewtonConfig, NewtonFailure, solve_timestep
from .schemes import FlowSpec, StepState, initial_state
from .shapes import ShapeSpec, generate

log = logging.getLogger(__name__)

PINCH_EPS = 1e-3


class Termination(enum.Enum):
    COMPLETED = "completed"
    PINCH_OFF = "pinch_off"
    NEWTON_FAILURE = "newton_failure"
    DEGENERATE_MESH = "degenerate_mesh"


@dataclass
class RunConfig:
    flow: FlowSpec
    shape: ShapeSpec
    dt: float
    t_final: float
    rho: tuple | None = None
    classes: tuple | None = None
    snapshots: tuple = ()
    out_dir: str = "out"
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    pinch_eps: float = PINCH_EPS

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        bad = [t for t in self.snapshots if t < 0 or t > self.t_final]
        if bad:
            raise ValueError(f"snapshot times outside [0, t_final]: {bad}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def initial_curve(self) -> tuple[Curve, BoundarySpec]:
        if self.classes is None:
            curve, bspec = generate(self.shape, rho=self.rho)
        else:
            curve, _ = generate(self.shape)
            rho = (0.0, 0.0) if self.rho is None else tuple(self.rho)
            bspec = BoundarySpec(tuple(self.classes), rho)
        bspec.validate(curve)
        return curve, bspec


@dataclass
class DiagnosticsRecord:
    t: float
    energy_ratio: float
    volume_loss: float
    mesh_ratio: float
    newton_iters: int
    min_r: float
    min_elem: float


@dataclass
class RunResult:
    config: RunConfig
    bspec: BoundarySpec
    diagnostics: list
    snapshots: dict
    termination: Termination
    t_end: float                # last accepted level
    t_event: float              # time attached to the termination reason
    final: StepState
    message: str = ""

    @property
    def exit_code(self) -> int:
        return {Termination.COMPLETED: 0, Termination.PINCH_OFF: 2}.get(self.termination, 1)


def min_offaxis_r(curve: Curve, bspec: BoundarySpec) -> float:
    mask = np.ones(curve.n_nodes, dtype=bool)
    if not bspec.is_closed:
        mask[bspec.axis_nodes(curve)] = False
    return float(curve.r[mask].min())


def detect_pinchoff(curve: Curve, bspec: BoundarySpec, r_scale: float,
                    eps: float = PINCH_EPS) -> bool:
    """True when an off-axis node nearly touches the axis or an element collapses."""
    if min_offaxis_r(curve, bspec) < eps * r_scale:
        return True
    return bool(element_lengths(curve).min() < DEGENERACY_RTOL * curve.diameter())


class Diagnostics:
    """Reference values at t = 0 and per-level records."""

    def __init__(self, curve: Curve, bspec: BoundarySpec):
        self.bspec = bspec
        self.E0 = total_energy(curve, bspec)
        self.M0 = discrete_volume(curve, bspec)

    def record(self, t: float, curve: Curve, iters: int) -> DiagnosticsRecord:
        M = discrete_volume(curve, self.bspec)
        return DiagnosticsRecord(
            t=t,
            energy_ratio=total_energy(curve, self.bspec) / self.E0,
            volume_loss=(M - self.M0) / self.M0,
            mesh_ratio=mesh_ratio(curve),
            newton_iters=iters,
            min_r=min_offaxis_r(curve, self.bspec),
            min_elem=float(element_lengths(curve).min()),
        )


def run(config: RunConfig, callback=None) -> RunResult:
    """Advance the initial curve with uniform steps until t_final or a singularity."""
    curve, bspec = config.initial_curve()
    flow, dt = config.flow, config.dt
    state = initial_state(flow, curve, bspec)
    diag = Diagnostics(curve, bspec)
    r_scale = float(curve.r.max())
    records = [diag.record(0.0, curve, 0)]
    snap_steps = {int(round(t / dt)): t for t in config.snapshots}
    snapshots = {0.0: curve.copy()}
    termination, message = Termination.COMPLETED, ""
    t = t_event = 0.0
    for m in range(1, config.n_steps + 1):
        t_new = m * dt
        try:
            step = solve_timestep(flow, state, dt, bspec, config.newton)
        except NewtonFailure as exc:
            t_event = t_new
            if isinstance(exc.__cause__, AxisCrossing):
                # the iterate crossed the axis: the neck closes within this step
                termination = Termination.PINCH_OFF
                message = f"pinch-off at t = {t_new:.6g} ({exc})"
            else:
                termination, message = Termination.NEWTON_FAILURE, f"t = {t_new:.6g}: {exc}"
            break
        except DegenerateMesh as exc:
            t_event = t_new
            termination, message = Termination.DEGENERATE_MESH, f"t = {t_new:.6g}: {exc}"
            break
        state, t = step.state, t_new
        t_event = t
        try:
            records.append(diag.record(t, state.curve, step.iterations))
        except DegenerateMesh as exc:
            termination, message = Termination.DEGENERATE_MESH, f"t = {t:.6g}: {exc}"
            break
        if m in snap_steps:
            snapshots[snap_steps[m]] = state.curve.copy()
        if callback is not None:
            callback(m, t, state, records[-1])
        if detect_pinchoff(state.curve, bspec, r_scale, config.pinch_eps):
            termination = Termination.PINCH_OFF
            message = f"pinch-off at t = {t:.6g}"
            break
    if termination is not Termination.COMPLETED:
        log.info("run stopped: %s", message)
    if t not in snapshots:
        snapshots[t] = state.curve.copy()
    return RunResult(config, bspec, records, dict(sorted(snapshots.items())), termination,
                     t, t_event, state, message)


def radius_deviation(curve: Curve) -> float:
    """Max relative spread of node distances from the centroid on the axis."""
    zc = _axis_centroid(curve)
    dist = np.hypot(curve.r, curve.z - zc)
    return float(np.max(np.abs(dist - dist.mean())) / dist.mean())


def _axis_centroid(curve: Curve) -> float:
    # volume-weighted z centroid of the solid of revolution (axis-to-axis curves)
    a, b = curve.element_nodes()
    ra, rb, za, zb = curve.r[a], curve.r[b], curve.z[a], curve.z[b]
    dz = zb - za
    vol = -math.pi * np.sum(dz * (ra * ra + ra * rb + rb * rb) / 3.0)
    t = np.linspace(0.0, 1.0, 5)
    w = np.array([7, 32, 12, 32, 7]) / 90.0           # Boole's rule, exact to degree 5
    r_t = ra[:, None] * (1 - t) + rb[:, None] * t
    z_t = za[:, None] * (1 - t) + zb[:, None] * t
    moment = -math.pi * np.sum(dz * np.sum(w * r_t ** 2 * z_t, axis=1))
    return float(moment / vol)
