"""Shared numerical checks for the test modules."""
import numpy as np

from axiflow.geometry import BoundarySpec, Curve
from axiflow.schemes import FlowSpec, Scheme, initial_state
from axiflow.shapes import ShapeSpec, generate

CASES = {
    "axis": (ShapeSpec("rounded_cylinder", 24, {"width": 1.0, "height": 3.0}), None),
    "closed": (ShapeSpec("torus", 24, {"major_radius": 1.0, "minor_radius": 0.3}), None),
    "plane+": (ShapeSpec("droplet", 24, {"diameter": 2.0, "height": 1.0}), (0.0, 0.9)),
    "plane-": (ShapeSpec("droplet", 24, {"diameter": 2.0, "height": 1.0}), (0.0, -0.5)),
    "wall": (ShapeSpec("cylinder_plug", 24, {"radius": 1.0, "height": 0.5}), (0.0, -0.5)),
    "hole": (ShapeSpec("disc_with_hole", 32, {"diameter": 8.0, "hole_diameter": 1.0,
                                              "height": 1.0}), (-0.5, 0.0)),
}

FLOW_KINDS = [FlowSpec("sd", "stabilized"), FlowSpec("sd", "equidistributing"),
              FlowSpec("intermediate", "stabilized", 2.0, 3.0),
              FlowSpec("intermediate", "equidistributing", 2.0, 3.0),
              FlowSpec("cmcf", "stabilized"), FlowSpec("cmcf", "equidistributing")]


def case(name):
    shape, rho = CASES[name]
    return generate(shape, rho=rho)


def fd_jacobian_errors(flow, curve, bspec, dt=1e-3, eps=(1e-4, 5e-5, 2.5e-5), seed=0):
    """Taylor remainders |r(u + e d) - r(u) - e J d| for several step sizes e."""
    rng = np.random.default_rng(seed)
    scheme = Scheme(flow, curve, bspec, dt)
    dofs = scheme.dofs
    state = initial_state(flow, curve, bspec)
    free = dofs.free
    u0 = dofs.pack(state)
    scale = np.ones(dofs.nf)
    scale[2:] = 1.0 / max(1e-12, curve.diameter())
    bump = rng.uniform(-1, 1, u0.shape) * np.tile(scale, dofs.n_nodes) * free
    u0 = u0 + 1e-3 * curve.diameter() * bump
    direction = rng.uniform(-1, 1, u0.shape) * free
    system = scheme.assemble(dofs.unpack(u0, curve.closed))
    jd = system.jacobian.matvec(direction)
    out = []
    for e in eps:
        r1 = scheme.assemble(dofs.unpack(u0 + e * direction, curve.closed),
                             jacobian=False).residual
        out.append(float(np.max(np.abs(r1 - system.residual - e * jd))))
    return out


def taylor_ok(errors, eps=(1e-4, 5e-5, 2.5e-5)):
    """Remainders are O(e^2), or already at rounding level."""
    rates = [errors[k] / max(errors[k + 1], 1e-300) for k in range(len(errors) - 1)]
    tiny = max(errors) < 1e-9
    return tiny or all(r > 3.0 for r in rates), rates


def random_pair_open(rng, J, jitter=0.1):
    theta = np.linspace(0.5 * np.pi, -0.5 * np.pi, J + 1)
    radius = 1.0 + jitter * rng.uniform(-1, 1, J + 1)
    old = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    old[[0, -1], 0] = 0.0
    new = old + (0.5 / J) * rng.uniform(-1, 1, old.shape)
    new[[0, -1], 0] = 0.0
    return Curve(old), Curve(new)


def random_pair_closed(rng, J, jitter=0.1):
    theta = 0.5 * np.pi - 2 * np.pi * np.arange(J) / J
    radius = 0.3 * (1.0 + jitter * rng.uniform(-1, 1, J))
    old = np.column_stack([1.0 + radius * np.cos(theta), radius * np.sin(theta)])
    new = old + (0.2 / J) * rng.uniform(-1, 1, old.shape)
    return Curve(old, closed=True), Curve(new, closed=True)


__all__ = ["BoundarySpec", "CASES", "FLOW_KINDS", "case", "fd_jacobian_errors", "taylor_ok",
           "random_pair_open", "random_pair_closed"]
