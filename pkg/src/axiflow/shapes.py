"""Initial generating curves for the standard experiments.

Every profile is traversed so that the enclosed region lies to the right of
the direction of travel (clockwise), which makes ``nu`` the outer normal.
Nodes are placed uniformly in arc length along the exact profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundaryClass, BoundarySpec, Curve, discrete_volume
from .outputs import read_curve

# sine frequencies of the perturbed cylinder profile, as multiples of z
PERTURBATION_MODES = (2.0, 13.0 / 6.0, 7.0 / 3.0, 5.0 / 2.0, 8.0 / 3.0, 17.0 / 6.0)

_REQUIRED = {
    "sphere": ("radius",),
    "rounded_cylinder": ("width", "height"),
    "disc": ("diameter", "height"),
    "torus": ("major_radius", "minor_radius"),
    "disc_with_hole": ("diameter", "hole_diameter", "height"),
    "droplet": ("diameter", "height"),
    "perturbed_cylinder": ("radius", "length", "amplitude"),
    "cylinder_plug": ("radius", "height"),
    "polyline": ("path",),
}
SHAPES = tuple(_REQUIRED)


@dataclass
class ShapeSpec:
    kind: str
    J: int = 0                  # ignored for polylines read from file
    dims: dict = field(default_factory=dict)
    modes: tuple = PERTURBATION_MODES

    def __post_init__(self):
        if self.kind not in _REQUIRED:
            raise ValueError(f"unknown shape {self.kind!r}")
        missing = [k for k in _REQUIRED[self.kind] if k not in self.dims]
        if missing:
            raise ValueError(f"shape {self.kind} needs {', '.join(missing)}")
        if self.kind == "polyline":
            return
        for key in _REQUIRED[self.kind]:
            if not self.dims[key] > 0:
                raise ValueError(f"shape dimension {key} must be positive")
        if self.J < 3:
            raise ValueError("J must be at least 3")


class _Profile:
    """Chain of straight and circular pieces with exact arc-length sampling."""

    def __init__(self):
        self.pieces = []

    def line(self, p0, p1):
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        length = float(np.hypot(*(p1 - p0)))
        if length > 0:
            self.pieces.append((length, lambda s: p0 + (p1 - p0) * s[:, None] / length))
        return self

    def arc(self, center, radius, theta0, theta1):
        c = np.asarray(center, float)
        length = abs(theta1 - theta0) * radius
        if length > 0:
            def point(s, c=c, r=radius, t0=theta0, t1=theta1, L=length):
                th = t0 + (t1 - t0) * s / L
                return c + r * np.column_stack([np.cos(th), np.sin(th)])
            self.pieces.append((length, point))
        return self

    @property
    def length(self) -> float:
        return sum(p[0] for p in self.pieces)

    def sample(self, n_points: int, closed: bool = False) -> np.ndarray:
        total = self.length
        count = n_points if closed else n_points - 1
        s = np.arange(n_points) * total / count
        out = np.empty((n_points, 2))
        start = 0.0
        for k, (length, point) in enumerate(self.pieces):
            last = k == len(self.pieces) - 1
            mask = (s >= start) & ((s < start + length) | last)
            if np.any(mask):
                out[mask] = point(np.minimum(s[mask] - start, length))
            start += length
        return out


def _resample(points: np.ndarray, n_points: int) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], n_points)
    return np.column_stack([np.interp(s, cum, points[:, 0]), np.interp(s, cum, points[:, 1])])


def generate(spec: ShapeSpec, rho: tuple | None = None) -> tuple[Curve, BoundarySpec]:
    """Curve and boundary classification for ``spec``.

    ``rho`` overrides the contact energy changes of the two endpoints.  A
    ``polyline`` is read from file as is; open ones default to two axis
    endpoints and callers override the classes as needed.
    """
    d, J = spec.dims, spec.J
    half_pi = 0.5 * math.pi
    closed = False
    if spec.kind == "sphere":
        R = d["radius"]
        prof = _Profile().arc((0, 0), R, half_pi, -half_pi)
        classes = ("axis", "axis")
    elif spec.kind == "rounded_cylinder":
        a = 0.5 * d["width"]
        hc = 0.5 * d["height"] - a
        if hc < 0:
            raise ValueError("rounded cylinder must be at least as tall as wide")
        prof = (_Profile().arc((0, hc), a, half_pi, 0.0)
                .line((a, hc), (a, -hc))
                .arc((0, -hc), a, 0.0, -half_pi))
        classes = ("axis", "axis")
    elif spec.kind == "disc":
        b = 0.5 * d["height"]
        rf = 0.5 * (d["diameter"] - d["height"])
        if rf < 0:
            raise ValueError("disc diameter must not be smaller than its height")
        prof = (_Profile().line((0, b), (rf, b))
                .arc((rf, 0), b, half_pi, -half_pi)
                .line((rf, -b), (0, -b)))
        classes = ("axis", "axis")
    elif spec.kind == "torus":
        R, r = d["major_radius"], d["minor_radius"]
        if r >= R:
            raise ValueError("torus minor radius must be below the major radius")
        prof = _Profile().arc((R, 0), r, half_pi, half_pi - 2 * math.pi)
        classes = ()
        closed = True
    elif spec.kind == "droplet":
        h, rad = d["height"], 0.5 * d["diameter"]
        c = min(0.5 * h, rad)
        prof = (_Profile().line((0, h), (rad - c, h))
                .arc((rad - c, h - c), c, half_pi, 0.0)
                .line((rad, h - c), (rad, 0)))
        classes = ("axis", "plane")
    elif spec.kind == "disc_with_hole":
        h = d["height"]
        ro, rh = 0.5 * d["diameter"], 0.5 * d["hole_diameter"]
        c = 0.5 * h
        if rh + 2 * c >= ro or d["hole_diameter"] >= d["diameter"]:
            raise ValueError("hole must be smaller than the disc")
        prof = (_Profile().line((rh, 0), (rh, h - c))
                .arc((rh + c, h - c), c, math.pi, half_pi)
                .line((rh + c, h), (ro - c, h))
                .arc((ro - c, h - c), c, half_pi, 0.0)
                .line((ro, h - c), (ro, 0)))
        classes = ("plane", "fixed")
    elif spec.kind == "perturbed_cylinder":
        R0, length, amp = d["radius"], d["length"], d["amplitude"]
        z = np.linspace(length, 0.0, 200 * J + 1)
        r = R0 + amp * np.abs(sum(np.sin(k * z) for k in spec.modes))
        nodes = _resample(np.column_stack([r, z]), J + 1)
        nodes[0, 1], nodes[-1, 1] = length, 0.0
        curve = Curve(nodes)
        return curve, _bspec(("plane", "plane"), rho)
    elif spec.kind == "polyline":
        curve = read_curve(spec.dims["path"])
        return curve, _bspec(() if curve.closed else ("axis", "axis"), rho)
    elif spec.kind == "cylinder_plug":
        R, h = d["radius"], d["height"]
        prof = _Profile().line((0, h), (R, h))
        classes = ("axis", "wall")
    else:  # pragma: no cover - guarded by ShapeSpec
        raise ValueError(spec.kind)

    n_points = J if closed else J + 1
    nodes = prof.sample(n_points, closed=closed)
    if not closed:
        for p, cls in enumerate(classes):
            if cls == "axis":
                nodes[0 if p == 0 else -1, 0] = 0.0
    curve = Curve(nodes, closed=closed)
    bspec = _bspec(classes, rho)
    if spec.kind in ("sphere", "rounded_cylinder", "disc", "torus"):
        if discrete_volume(curve, bspec) <= 0:
            raise AssertionError("generated curve has inward normals")
    return curve, bspec


def _bspec(classes, rho) -> BoundarySpec:
    if not classes:
        return BoundarySpec.closed()
    rho = tuple(rho) if rho is not None else (0.0, 0.0)
    return BoundarySpec(tuple(BoundaryClass(c) for c in classes), rho)
