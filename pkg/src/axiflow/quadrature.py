"""Inner products on the parameter interval and the time-averaged normal.

Element-wise functions are given by their one-sided values at the two ends
of every element, arrays of shape ``(J, 2, ...)`` with index 0 at
``q_{j-1}^+`` and index 1 at ``q_j^-``.  Nodal (continuous P1) fields are
plain arrays of length ``n_nodes``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (BoundarySpec, Curve, DegenerateMesh, element_geometry, perp)

# two-point Gauss rule on [0, 1]; exact for cubics
GAUSS_T = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GAUSS_W = np.array([0.5, 0.5])


@dataclass
class ElementField:
    """Piecewise field with jumps at nodes: values ``(J, 2, ...)`` per element end."""

    values: np.ndarray


def to_element_values(field, curve: Curve) -> np.ndarray:
    """Per-element endpoint values of a nodal array or an :class:`ElementField`."""
    if isinstance(field, ElementField):
        return np.asarray(field.values, dtype=float)
    field = np.asarray(field, dtype=float)
    if field.shape[0] != curve.n_nodes:
        raise ValueError("nodal field length does not match the curve")
    a, b = curve.element_nodes()
    return np.stack([field[a], field[b]], axis=1)


def lumped_inner(v, w, curve: Curve) -> float:
    """Mass-lumped product (h/2) sum_j [(v.w)(q_j^-) + (v.w)(q_{j-1}^+)].

    ``v`` and ``w`` are nodal arrays or :class:`ElementField` instances;
    trailing vector dimensions are contracted.
    """
    prod = to_element_values(v, curve) * to_element_values(w, curve)
    h = 1.0 / curve.n_elements
    return float(0.5 * h * prod.sum())


@dataclass
class WeightedNormal:
    """Per-element linear field f^{m+1/2}, stored as its two endpoint values."""

    ends: np.ndarray   # (J, 2, 2): element, endpoint, component

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        f0, f1 = self.ends[:, 0, :], self.ends[:, 1, :]
        return f0[:, None, :] * (1.0 - t)[None, :, None] + f1[:, None, :] * t[None, :, None]


def _check_pair(old: Curve, new: Curve) -> None:
    if old.closed != new.closed or old.n_nodes != new.n_nodes:
        raise ValueError("old and new curves differ in topology or node count")


def weighted_normal(old: Curve, new: Curve) -> WeightedNormal:
    """Simpson-exact time average of (X . e1) X_rho^perp between two levels."""
    _check_pair(old, new)
    J = old.n_elements
    a, b = old.element_nodes()
    dm = J * (old.nodes[b] - old.nodes[a])
    dn = J * (new.nodes[b] - new.nodes[a])
    ends = np.empty((J, 2, 2))
    for k, idx in enumerate((a, b)):
        rm = old.r[idx][:, None]
        rn = new.r[idx][:, None]
        g = 2 * rm * dm + 2 * rn * dn + rm * dn + rn * dm
        ends[:, k, :] = -perp(g) / 6.0
    return WeightedNormal(ends)


def normal_pairing(old: Curve, new: Curve, f: WeightedNormal | None = None) -> float:
    """<X^{m+1} - X^m, f^{m+1/2}> integrated exactly (cubic integrand)."""
    if f is None:
        f = weighted_normal(old, new)
    J = old.n_elements
    a, b = old.element_nodes()
    d = new.nodes - old.nodes
    t = GAUSS_T
    dq = d[a][:, None, :] * (1 - t)[None, :, None] + d[b][:, None, :] * t[None, :, None]
    fq = f.at(t)
    return float(np.sum(GAUSS_W[None, :] * np.sum(dq * fq, axis=2)) / J)


def vertex_normal(curve: Curve) -> np.ndarray:
    """Mass-lumped L2 projection of the element normals onto nodal P1 vectors.

    Equals the length-weighted average of the normals of adjacent elements.
    """
    geo = element_geometry(curve)
    a, b = curve.element_nodes()
    weight = np.zeros(curve.n_nodes)
    acc = np.zeros((curve.n_nodes, 2))
    np.add.at(weight, a, geo.length)
    np.add.at(weight, b, geo.length)
    np.add.at(acc, a, geo.normal * geo.length[:, None])
    np.add.at(acc, b, geo.normal * geo.length[:, None])
    if np.any(weight <= 0.0):
        raise DegenerateMesh("zero lumped weight in vertex normal")
    return acc / weight[:, None]


def lambda_offsets(curve: Curve, bspec: BoundarySpec) -> tuple[np.ndarray, np.ndarray]:
    """Affine form of lambda^{m+1/2}: ``lambda = -slope * kappa + offset``.

    Off the axis ``slope = 0`` and ``offset = omega.e1 / r``; on axis
    nodes ``slope = 1`` and ``offset = 0`` so that ``lambda = -kappa``.
    """
    omega = vertex_normal(curve)
    slope = np.zeros(curve.n_nodes)
    offset = np.zeros(curve.n_nodes)
    axis = bspec.axis_nodes(curve) if not bspec.is_closed else []
    off = np.ones(curve.n_nodes, dtype=bool)
    off[axis] = False
    r = curve.r[off]
    if np.any(r <= 0.0):
        raise DegenerateMesh("node off the axis with r = 0")
    offset[off] = omega[off, 0] / r
    slope[axis] = 1.0
    return slope, offset


def lambda_half(curve: Curve, kappa_new: np.ndarray, bspec: BoundarySpec) -> np.ndarray:
    slope, offset = lambda_offsets(curve, bspec)
    return -slope * np.asarray(kappa_new, dtype=float) + offset
