import numpy as np
import pytest

from axiflow.driver import (RunConfig, Termination, detect_pinchoff, radius_deviation, run)
from axiflow.geometry import BoundarySpec, Curve, hausdorff_distance, mesh_ratio
from axiflow.newton import NewtonConfig
from axiflow.schemes import FlowSpec
from axiflow.shapes import ShapeSpec, generate

CYL = ShapeSpec("rounded_cylinder", 64, {"width": 1.0, "height": 7.0})


def test_runconfig_validation():
    with pytest.raises(ValueError):
        RunConfig(FlowSpec(), CYL, dt=0.0, t_final=1.0)
    with pytest.raises(ValueError):
        RunConfig(FlowSpec(), CYL, dt=1e-3, t_final=-1.0)
    with pytest.raises(ValueError):
        RunConfig(FlowSpec(), CYL, dt=1e-3, t_final=1.0, snapshots=(0.5, 2.0))
    assert RunConfig(FlowSpec(), CYL, dt=1e-3, t_final=0.25).n_steps == 250


def test_sphere_is_steady_and_never_pinches():
    cfg = RunConfig(FlowSpec("sd"), ShapeSpec("sphere", 32, {"radius": 1.0}), 1e-2, 0.5)
    result = run(cfg)
    assert result.termination is Termination.COMPLETED and result.exit_code == 0
    assert max(abs(d.volume_loss) for d in result.diagnostics) <= 1e-10
    assert radius_deviation(result.final.curve) < 1e-2


def test_records_and_snapshots():
    cfg = RunConfig(FlowSpec("sd"), CYL, 1e-2, 0.2, snapshots=(0.05, 0.1))
    result = run(cfg)
    t = [d.t for d in result.diagnostics]
    assert t[0] == 0.0 and np.all(np.diff(t) > 0) and len(t) == 21
    assert list(result.snapshots) == [0.0, 0.05, 0.1, pytest.approx(0.2)]
    energy = [d.energy_ratio for d in result.diagnostics]
    assert np.all(np.diff(energy) <= 1e-12)
    assert result.diagnostics[0].newton_iters == 0
    assert all(d.newton_iters >= 1 for d in result.diagnostics[1:])


def test_equidistribution_improves_mesh_ratio(tmp_path):
    from axiflow.outputs import write_curve
    # sphere sampled with nodes crowded towards the north pole
    theta = np.pi * np.linspace(0.0, 1.0, 33) ** 1.6
    curve = Curve(np.column_stack([np.sin(theta), np.cos(theta)]))
    curve.nodes[[0, -1], 0] = 0.0
    path = write_curve(tmp_path / "skewed.csv", curve)
    shape = ShapeSpec("polyline", dims={"path": str(path)})
    psi = {}
    for scheme in ("equidistributing", "stabilized"):
        result = run(RunConfig(FlowSpec("sd", scheme), shape, 1e-2, 2.0))
        psi[scheme] = np.array([d.mesh_ratio for d in result.diagnostics])
    equi = psi["equidistributing"]
    assert equi[0] > 10.0
    # tangential relaxation is gradual at a fixed step size, but steady
    assert np.all(np.diff(equi[20:]) < 0.0)
    assert equi[-1] < 0.8 * equi[0]
    assert equi[-1] < psi["stabilized"][-1]

def test_torus_pinches_off():
    shape = ShapeSpec("torus", 64, {"major_radius": 1.0, "minor_radius": 0.25})
    result = run(RunConfig(FlowSpec("sd"), shape, 1e-4, 0.05))
    assert result.termination is Termination.PINCH_OFF and result.exit_code == 2
    assert 0.015 < result.t_event < 0.03
    assert result.t_end in result.snapshots


def test_newton_failure_is_reported():
    cfg = RunConfig(FlowSpec("sd"), CYL, 1e-2, 0.1, newton=NewtonConfig(max_iters=1))
    result = run(cfg)
    assert result.termination is Termination.NEWTON_FAILURE and result.exit_code == 1
    assert result.t_event == pytest.approx(0.01) and "t = 0.01" in result.message


def test_detect_pinchoff_thresholds():
    bspec = BoundarySpec.axis_both()
    curve = Curve([[0.0, 1.0], [0.5, 0.5], [4e-4, 0.0], [0.5, -0.5], [0.0, -1.0]])
    assert detect_pinchoff(curve, bspec, r_scale=0.5)
    assert not detect_pinchoff(curve, bspec, r_scale=0.5, eps=1e-4)
    sphere, sb = generate(ShapeSpec("sphere", 32, {"radius": 1.0}))
    assert not detect_pinchoff(sphere, sb, r_scale=1.0)


def test_temporal_self_convergence():
    # shapes are compared, since tangential node positions need not converge
    finals = [run(RunConfig(FlowSpec("sd"), CYL, dt, 0.25)).final.curve
              for dt in (1e-3, 5e-4, 2.5e-4)]
    e1 = hausdorff_distance(finals[0], finals[1])
    e2 = hausdorff_distance(finals[1], finals[2])
    assert e1 / e2 >= 1.8


def test_hausdorff_ignores_reparameterization():
    s = np.linspace(0.0, 1.0, 41)
    a = Curve(np.column_stack([np.sin(np.pi * s), np.cos(np.pi * s)]))
    b = Curve(np.column_stack([np.sin(np.pi * s ** 2), np.cos(np.pi * s ** 2)]))
    assert hausdorff_distance(a, b) < 5e-3
    assert np.max(np.hypot(*(a.nodes - b.nodes).T)) > 0.3
    shifted = a.with_nodes(a.nodes + [0.0, 0.1])
    assert hausdorff_distance(a, shifted) == pytest.approx(0.1, rel=0.05)

def test_class_override_for_polyline(tmp_path):
    from axiflow.outputs import write_curve
    nodes = np.column_stack([np.linspace(0.0, 1.0, 9), np.full(9, 0.5)])
    path = write_curve(tmp_path / "film.csv", Curve(nodes))
    cfg = RunConfig(FlowSpec("sd"), ShapeSpec("polyline", dims={"path": str(path)}), 1e-2, 0.05,
                    rho=(0.0, -0.5), classes=("axis", "wall"))
    result = run(cfg)
    assert result.termination is Termination.COMPLETED
    assert max(abs(d.volume_loss) for d in result.diagnostics) <= 1e-10
    assert result.final.curve.r[-1] == 1.0
