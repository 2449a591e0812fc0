"""Polygonal generating curves and the functionals of their surfaces of revolution.

A generating curve lives in the (r, z) half-plane, r >= 0, and is rotated
about the z-axis.  Nodes are stored as an ``(n, 2)`` array.  Open curves have
``J + 1`` nodes on the uniform parameter grid ``q_j = j / J``; closed curves
have ``J`` nodes and an implicit wrap-around element.

Orientation: the element normal is ``nu = -tau^perp`` with ``perp`` the
clockwise quarter turn, i.e. ``nu`` is ``tau`` rotated counterclockwise.
For ``nu`` to be the outer normal, closed regions must be traversed
clockwise in the (r, z) plane (genus-0 curves run from the north pole down
to the south pole).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEGENERACY_RTOL = 1e-14


class DegenerateMesh(ValueError):
    """An element collapsed or a node left the admissible region."""


class AxisCrossing(DegenerateMesh):
    """A node moved to negative r, i.e. the curve reached the rotation axis."""


class BoundaryClass(enum.Enum):
    AXIS = "axis"      # on the rotation axis, r = 0
    WALL = "wall"      # slides along a coaxial cylinder, r fixed
    PLANE = "plane"    # slides in a horizontal plane, z fixed
    FIXED = "fixed"    # clamped

    @classmethod
    def parse(cls, text: str) -> "BoundaryClass":
        aliases = {"d0": cls.AXIS, "d1": cls.WALL, "d2": cls.PLANE, "dd": cls.FIXED,
                   "cylinder": cls.WALL, "substrate": cls.PLANE, "dirichlet": cls.FIXED}
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


def perp(v: np.ndarray) -> np.ndarray:
    """Clockwise rotation by pi/2 of the trailing 2-vectors: (a, b) -> (b, -a)."""
    out = np.empty_like(v)
    out[..., 0] = v[..., 1]
    out[..., 1] = -v[..., 0]
    return out


@dataclass
class Curve:
    nodes: np.ndarray
    closed: bool = False

    def __post_init__(self):
        self.nodes = np.array(self.nodes, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise ValueError("nodes must have shape (n, 2)")
        min_nodes = 3 if self.closed else 4
        if len(self.nodes) < min_nodes:
            raise ValueError(f"need at least {min_nodes} nodes, got {len(self.nodes)}")
        if np.any(self.nodes[:, 0] < 0):
            raise AxisCrossing("negative radial coordinate")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return self.n_nodes if self.closed else self.n_nodes - 1

    @property
    def r(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self.nodes[:, 1]

    def element_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (a, b) of the start and end node of every element."""
        a = np.arange(self.n_elements)
        b = (a + 1) % self.n_nodes
        return a, b

    def edges(self) -> np.ndarray:
        a, b = self.element_nodes()
        return self.nodes[b] - self.nodes[a]

    def diameter(self) -> float:
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0)
        return float(np.hypot(*span))

    def with_nodes(self, nodes: np.ndarray) -> "Curve":
        return Curve(nodes, closed=self.closed)

    def copy(self) -> "Curve":
        return Curve(self.nodes.copy(), closed=self.closed)


@dataclass
class BoundarySpec:
    """Classification of the two endpoints of an open curve.

    ``rho`` holds the contact energy change per endpoint; it is only
    meaningful for WALL and PLANE endpoints.
    """

    classes: tuple = ()
    rho: tuple = ()

    def __post_init__(self):
        self.classes = tuple(BoundaryClass.parse(c) if isinstance(c, str) else c
                             for c in self.classes)
        if not self.rho:
            self.rho = (0.0,) * len(self.classes)
        self.rho = tuple(float(x) for x in self.rho)
        if len(self.classes) not in (0, 2) or len(self.rho) != len(self.classes):
            raise ValueError("an open curve needs exactly two endpoint classes")
        for p, (cls, rho) in enumerate(zip(self.classes, self.rho)):
            if rho != 0.0 and cls in (BoundaryClass.AXIS, BoundaryClass.FIXED):
                raise ValueError(
                    f"contact energy given for endpoint {p} of class {cls.value}")

    @classmethod
    def closed(cls) -> "BoundarySpec":
        return cls((), ())

    @classmethod
    def axis_both(cls) -> "BoundarySpec":
        return cls((BoundaryClass.AXIS, BoundaryClass.AXIS))

    @property
    def is_closed(self) -> bool:
        return not self.classes

    def endpoint_index(self, p: int, curve: Curve) -> int:
        return 0 if p == 0 else curve.n_nodes - 1

    def endpoints(self, kind: BoundaryClass):
        """Yield ``(p, rho)`` for endpoints of the given class."""
        for p, (cls, rho) in enumerate(zip(self.classes, self.rho)):
            if cls is kind:
                yield p, rho

    def axis_nodes(self, curve: Curve) -> list[int]:
        return [self.endpoint_index(p, curve) for p, _ in self.endpoints(BoundaryClass.AXIS)]

    def validate(self, curve: Curve) -> None:
        if curve.closed != self.is_closed:
            raise ValueError("boundary classes do not match the curve topology")
        axis = set(self.axis_nodes(curve))
        for j in axis:
            if curve.r[j] != 0.0:
                raise DegenerateMesh(f"axis node {j} has r = {curve.r[j]!r}")
        off_axis = np.ones(curve.n_nodes, dtype=bool)
        off_axis[list(axis)] = False
        if np.any(curve.r[off_axis] <= 0.0):
            raise DegenerateMesh("node off the axis class touches the axis")


@dataclass
class ElementGeometry:
    length: np.ndarray     # Euclidean element length
    x_rho: np.ndarray      # |X_rho| = J * length
    tangent: np.ndarray
    normal: np.ndarray
    n_elements: int = field(default=0)


def element_geometry(curve: Curve) -> ElementGeometry:
    edges = curve.edges()
    length = np.hypot(edges[:, 0], edges[:, 1])
    threshold = DEGENERACY_RTOL * curve.diameter()
    if np.any(length <= threshold):
        j = int(np.argmin(length))
        raise DegenerateMesh(f"element {j} has length {length[j]:.3e}")
    tau = edges / length[:, None]
    nu = -perp(tau)
    J = curve.n_elements
    return ElementGeometry(length=length, x_rho=J * length, tangent=tau, normal=nu,
                           n_elements=J)


def element_lengths(curve: Curve) -> np.ndarray:
    edges = curve.edges()
    return np.hypot(edges[:, 0], edges[:, 1])


def surface_area(curve: Curve) -> float:
    """Area of the revolved polygon, 2 pi sum of mean radius times length."""
    a, b = curve.element_nodes()
    rbar = 0.5 * (curve.r[a] + curve.r[b])
    return float(2.0 * np.pi * np.sum(rbar * element_lengths(curve)))


def discrete_volume(curve: Curve, bspec: BoundarySpec | None = None) -> float:
    """Enclosed volume pi <r^2 nu, e1 |X_rho|> plus wall corrections.

    Per element ``nu . e1 |X_rho| = -z_rho`` and the mean of ``r^2`` over the
    element is ``(ra^2 + ra rb + rb^2) / 3``, both exact.
    """
    a, b = curve.element_nodes()
    ra, rb = curve.r[a], curve.r[b]
    dz = curve.z[b] - curve.z[a]
    volume = -np.pi * np.sum(dz * (ra * ra + ra * rb + rb * rb) / 3.0)
    if bspec is not None:
        for p, _ in bspec.endpoints(BoundaryClass.WALL):
            j = bspec.endpoint_index(p, curve)
            volume += np.pi * (-1) ** (p + 1) * curve.r[j] ** 2 * curve.z[j]
    return float(volume)


def contact_energy(curve: Curve, bspec: BoundarySpec | None) -> float:
    if bspec is None:
        return 0.0
    energy = 0.0
    for p, rho in bspec.endpoints(BoundaryClass.WALL):
        r, z = curve.nodes[bspec.endpoint_index(p, curve)]
        energy += 2.0 * np.pi * rho * r * z
    for p, rho in bspec.endpoints(BoundaryClass.PLANE):
        r = curve.r[bspec.endpoint_index(p, curve)]
        energy += np.pi * rho * r * r
    return energy


def total_energy(curve: Curve, bspec: BoundarySpec | None = None) -> float:
    """Surface area plus contact energies of the wall and plane endpoints."""
    area = surface_area(curve)
    if bspec is None or not any(bspec.rho):
        return area
    return float(area + contact_energy(curve, bspec))


def mesh_ratio(curve: Curve) -> float:
    length = element_lengths(curve)
    if length.min() <= 0.0:
        raise DegenerateMesh("zero-length element")
    return float(length.max() / length.min())


def is_convex(curve: Curve, tol: float = 0.0) -> bool:
    """True if all cross products of consecutive edges share one sign."""
    edges = curve.edges()
    cross = edges[:-1, 0] * edges[1:, 1] - edges[:-1, 1] * edges[1:, 0]
    if curve.closed:
        last = edges[-1, 0] * edges[0, 1] - edges[-1, 1] * edges[0, 0]
        cross = np.append(cross, last)
    scale = np.max(np.abs(cross)) if cross.size else 1.0
    return bool(np.all(cross <= tol * scale) or np.all(cross >= -tol * scale))


def _node_to_polyline(points: np.ndarray, curve: Curve) -> np.ndarray:
    # distance from each point to the nearest element of the curve
    a, b = curve.element_nodes()
    pa, d = curve.nodes[a], curve.nodes[b] - curve.nodes[a]
    rel = points[:, None, :] - pa[None, :, :]
    s = np.clip(np.einsum("pek,ek->pe", rel, d) / np.einsum("ek,ek->e", d, d), 0.0, 1.0)
    gap = rel - s[..., None] * d[None, :, :]
    return np.sqrt(np.einsum("pek,pek->pe", gap, gap).min(axis=1))


def hausdorff_distance(c1: Curve, c2: Curve) -> float:
    """Symmetric Hausdorff distance between two polygonal curves (node sampled).

    Independent of how nodes are distributed along the curves, so it compares
    shapes rather than parameterizations.
    """
    return float(max(_node_to_polyline(c1.nodes, c2).max(),
                     _node_to_polyline(c2.nodes, c1).max()))
