"""Newton iteration for one time step."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import BoundarySpec, Curve, DegenerateMesh
from .linsolve import SingularSystem, factor_solve
from .schemes import FlowSpec, Scheme, StepState

log = logging.getLogger(__name__)


class NewtonFailure(RuntimeError):
    def __init__(self, message: str, iteration: int = -1, residual: float = float("nan")):
        super().__init__(f"{message} (iteration {iteration}, residual {residual:.3e})")
        self.iteration = iteration
        self.residual = residual


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iters: int = 20

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class StepResult:
    state: StepState
    iterations: int
    increments: list
    residual_norm: float


def newton_step(scheme: Scheme, state: StepState):
    """One Newton update; returns the new state and max-norm increments (X, scalars)."""
    system = scheme.assemble(state)
    dofs = scheme.dofs
    delta = factor_solve(system.jacobian, -system.residual)
    if not np.all(np.isfinite(delta)):
        raise SingularSystem("non-finite Newton direction")
    u = dofs.pack(state) + delta
    new = dofs.unpack(u, state.curve.closed)
    d = delta.reshape(dofs.n_nodes, dofs.nf)
    dx = float(np.max(np.hypot(d[:, 0], d[:, 1])))
    ds = float(np.max(np.abs(d[:, 2:])))
    res_norm = float(np.max(np.abs(system.residual)))
    return new, (dx, ds), res_norm


def solve_timestep(flow: FlowSpec, old: StepState, dt: float, bspec: BoundarySpec,
                   cfg: NewtonConfig = NewtonConfig()) -> StepResult:
    """Iterate Newton from ``X^{m+1,0} = X^m`` until both increments are below tol."""
    scheme = Scheme(flow, old.curve, bspec, dt)
    state = old.copy()
    history = []
    res_norm = float("nan")
    for it in range(1, cfg.max_iters + 1):
        try:
            state, inc, res_norm = newton_step(scheme, state)
        except (SingularSystem, DegenerateMesh, FloatingPointError, ValueError) as exc:
            raise NewtonFailure(f"Newton step failed: {exc}", it, res_norm) from exc
        history.append(inc)
        log.debug("newton it=%d dX=%.3e ds=%.3e res=%.3e", it, inc[0], inc[1], res_norm)
        if not np.all(np.isfinite(inc)):
            raise NewtonFailure("non-finite increment", it, res_norm)
        if inc[0] <= cfg.tol and inc[1] <= cfg.tol:
            return StepResult(state, it, history, res_norm)
    raise NewtonFailure("no convergence", cfg.max_iters, res_norm)
