"""Delimited output files: diagnostics series and curve snapshots.

Floats are written with 17 significant digits so that reading a file back
reproduces every double exactly.
"""
from __future__ import annotations

import csv
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np

from .geometry import Curve

DIAGNOSTICS_HEADER = ("t", "energy_ratio", "volume_loss", "mesh_ratio", "newton_iters",
                      "min_r", "min_elem")
CURVE_HEADER = ("rho", "r", "z")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def curve_filename(t: float) -> str:
    return f"curve_t{format(float(t), '.10g')}.csv"


def write_curve(path, curve: Curve) -> Path:
    """Write ``rho,r,z`` rows; a closed curve repeats its first node at rho = 1."""
    path = Path(path)
    nodes = curve.nodes
    if curve.closed:
        nodes = np.vstack([nodes, nodes[:1]])
    rho = np.arange(len(nodes)) / (len(nodes) - 1)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CURVE_HEADER)
            for q, (r, z) in zip(rho, nodes):
                w.writerow((fmt(q), fmt(r), fmt(z)))
    except OSError as exc:
        raise OSError(f"cannot write curve file {path}: {exc}") from exc
    return path


def read_curve(path) -> Curve:
    """Inverse of :func:`write_curve`; also accepts plain ``r,z`` files."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read curve file {path}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty curve file")
    header = [h.strip() for h in rows[0]]
    try:
        ir, iz = header.index("r"), header.index("z")
    except ValueError:
        raise ValueError(f"{path}: header must name columns r and z") from None
    try:
        nodes = np.array([[float(row[ir]), float(row[iz])] for row in rows[1:] if row],
                         dtype=float)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: bad number: {exc}") from exc
    closed = len(nodes) > 3 and np.array_equal(nodes[0], nodes[-1])
    if closed:
        nodes = nodes[:-1]
    return Curve(nodes, closed=closed)


def write_diagnostics(path, records) -> Path:
    path = Path(path)
    names = tuple(f.name for f in fields(records[0])) if records else DIAGNOSTICS_HEADER
    assert names == DIAGNOSTICS_HEADER, names
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DIAGNOSTICS_HEADER)
            for rec in records:
                w.writerow([fmt(v) for v in astuple(rec)])
    except OSError as exc:
        raise OSError(f"cannot write diagnostics file {path}: {exc}") from exc
    return path


def read_diagnostics(path) -> dict:
    """Columns of a diagnostics file as float arrays keyed by header name."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return {name: data[:, k] for k, name in enumerate(rows[0])}
