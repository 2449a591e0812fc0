"""Flat ``key = value`` run configuration files.

Example::

    flow = sd
    scheme = stabilized
    shape = rounded_cylinder
    width = 1
    height = 7
    J = 128
    dt = 1e-4
    t_final = 1
    snapshots = 0, 0.1, 1

Blank lines and ``#`` comments are ignored.  Every problem in a file is
reported at once through :class:`ConfigError`.
"""
from __future__ import annotations

from pathlib import Path

from .driver import PINCH_EPS, RunConfig
from .geometry import BoundaryClass
from .newton import NewtonConfig
from .schemes import FLOWS, VARIANTS, FlowSpec
from .shapes import _REQUIRED as SHAPE_DIMS
from .shapes import ShapeSpec

_DIM_KEYS = sorted({k for dims in SHAPE_DIMS.values() for k in dims} - {"path"})
_KNOWN = {"flow", "scheme", "alpha", "xi", "shape", "curve_file", "bc0", "bc1", "rho0", "rho1",
          "J", "dt", "t_final", "snapshots", "out_dir", "tol", "max_iters", "pinch_eps",
          *_DIM_KEYS}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


def _split(text: str, errors: list) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            errors.append(f"line {lineno}: expected 'key = value'")
        elif key not in _KNOWN:
            errors.append(f"line {lineno}: unknown key {key!r}")
        elif key in out:
            errors.append(f"line {lineno}: duplicate key {key!r}")
        else:
            out[key] = value
    return out


class _Reader:
    def __init__(self, raw: dict, errors: list):
        self.raw, self.errors = raw, errors

    def text(self, key, default=None, choices=None):
        if key not in self.raw:
            if default is None:
                self.errors.append(f"missing key {key!r}")
            return default
        value = self.raw[key]
        if choices is not None and value not in choices:
            self.errors.append(f"{key}: {value!r} is not one of {', '.join(choices)}")
            return default
        return value

    def number(self, key, kind=float, default=None, positive=True, required=True):
        if key not in self.raw:
            if default is None and required:
                self.errors.append(f"missing key {key!r}")
            return default
        try:
            value = kind(self.raw[key])
        except ValueError:
            self.errors.append(f"{key}: cannot read {self.raw[key]!r} as {kind.__name__}")
            return default
        if positive and not value > 0:
            self.errors.append(f"{key}: must be positive, got {self.raw[key]}")
            return default
        return value


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Validated :class:`RunConfig`; raises :class:`ConfigError` listing all problems."""
    errors: list[str] = []
    raw = _split(text, errors)
    rd = _Reader(raw, errors)

    flow_kind = rd.text("flow", choices=FLOWS)
    scheme = rd.text("scheme", default="stabilized", choices=VARIANTS)
    need_kinetic = flow_kind == "intermediate"
    alpha = rd.number("alpha", required=need_kinetic, default=None if need_kinetic else 1.0)
    xi = rd.number("xi", required=need_kinetic, default=None if need_kinetic else 1.0)
    if not need_kinetic:
        for key in ("alpha", "xi"):
            if key in raw:
                errors.append(f"{key}: only used by the intermediate flow")

    shape_kind = rd.text("shape", choices=tuple(SHAPE_DIMS))
    dims: dict = {}
    J = 0
    if shape_kind == "polyline":
        path = rd.text("curve_file")
        if path is not None:
            dims["path"] = str(Path(base_dir) / path)
        if "J" in raw:
            errors.append("J: taken from the curve file for polyline shapes")
    elif shape_kind is not None:
        J = rd.number("J", kind=int)
        if J is not None and J < 3:
            errors.append("J: must be at least 3")
        for key in SHAPE_DIMS[shape_kind]:
            dims[key] = rd.number(key)
        extra = [k for k in _DIM_KEYS if k in raw and k not in SHAPE_DIMS[shape_kind]]
        for key in extra + (["curve_file"] if "curve_file" in raw else []):
            errors.append(f"{key}: not a parameter of shape {shape_kind}")

    classes = None
    if "bc0" in raw or "bc1" in raw:
        classes = []
        for key in ("bc0", "bc1"):
            try:
                classes.append(BoundaryClass.parse(rd.text(key, default="")))
            except ValueError:
                if key in raw:
                    errors.append(f"{key}: unknown boundary class {raw[key]!r}")
        classes = tuple(classes)
    rho = None
    if "rho0" in raw or "rho1" in raw:
        rho = tuple(rd.number(k, default=0.0, positive=False, required=False)
                    for k in ("rho0", "rho1"))

    dt = rd.number("dt")
    t_final = rd.number("t_final")
    snapshots: tuple = ()
    if raw.get("snapshots"):
        try:
            snapshots = tuple(float(s) for s in raw["snapshots"].split(","))
        except ValueError:
            errors.append(f"snapshots: expected a comma separated list of times")
    tol = rd.number("tol", default=NewtonConfig.tol)
    max_iters = rd.number("max_iters", kind=int, default=NewtonConfig.max_iters)
    pinch_eps = rd.number("pinch_eps", default=PINCH_EPS)
    out_dir = raw.get("out_dir", "out")

    if errors:
        raise ConfigError(errors)
    try:
        return RunConfig(
            flow=FlowSpec(flow_kind, scheme, alpha, xi),
            shape=ShapeSpec(shape_kind, J, dims),
            dt=dt, t_final=t_final, rho=rho, classes=classes, snapshots=snapshots,
            out_dir=out_dir, newton=NewtonConfig(tol, max_iters), pinch_eps=pinch_eps)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    try:
        return parse_config(text, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError([f"{path}: {e}" for e in exc.errors]) from None
