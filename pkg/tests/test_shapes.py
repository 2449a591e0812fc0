import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from axiflow.geometry import BoundaryClass, discrete_volume, mesh_ratio, surface_area
from axiflow.outputs import write_curve
from axiflow.shapes import PERTURBATION_MODES, SHAPES, ShapeSpec, generate

SPECS = {
    "sphere": {"radius": 1.0},
    "rounded_cylinder": {"width": 1.0, "height": 7.0},
    "disc": {"diameter": 9.0, "height": 1.0},
    "torus": {"major_radius": 1.0, "minor_radius": 0.25},
    "disc_with_hole": {"diameter": 83.5, "hole_diameter": 2.5, "height": 1.0},
    "droplet": {"diameter": 2.0, "height": 1.0},
    "perturbed_cylinder": {"radius": 1.0, "length": 12 * math.pi, "amplitude": 0.01},
    "cylinder_plug": {"radius": 1.0, "height": 1.0},
}


@pytest.mark.parametrize("kind", list(SPECS))
def test_generated_curves_are_valid_and_near_uniform(kind):
    J = 820 if kind == "disc_with_hole" else 128
    curve, bspec = generate(ShapeSpec(kind, J, SPECS[kind]))
    bspec.validate(curve)
    assert curve.n_elements == J
    assert mesh_ratio(curve) <= 1.5


def test_sphere_measures():
    curve, bspec = generate(ShapeSpec("sphere", 128, SPECS["sphere"]))
    assert abs(surface_area(curve) - 4 * math.pi) < 1e-3 * 4 * math.pi
    assert abs(discrete_volume(curve, bspec) - 4 * math.pi / 3) < 1e-3 * 4 * math.pi / 3


def test_torus_volume_by_pappus():
    curve, bspec = generate(ShapeSpec("torus", 256, SPECS["torus"]))
    assert curve.closed and bspec.is_closed
    assert discrete_volume(curve) == pytest.approx(math.pi ** 2 / 8, rel=1e-3)


@pytest.mark.parametrize("kind,a,b", [("rounded_cylinder", 1.0, 7.0), ("disc", 9.0, 1.0)])
def test_bounding_box(kind, a, b):
    dims = {"width": a, "height": b} if kind == "rounded_cylinder" else {"diameter": a,
                                                                        "height": b}
    curve, _ = generate(ShapeSpec(kind, 256, dims))
    assert curve.r.min() == 0.0
    assert curve.r.max() == pytest.approx(a / 2, rel=1e-12)
    assert curve.z.max() - curve.z.min() == pytest.approx(b, rel=1e-12)


def test_endpoint_classes():
    _, b = generate(ShapeSpec("droplet", 32, SPECS["droplet"]), rho=(0.0, 0.9))
    assert b.classes == (BoundaryClass.AXIS, BoundaryClass.PLANE) and b.rho == (0.0, 0.9)
    _, b = generate(ShapeSpec("disc_with_hole", 64, SPECS["disc_with_hole"]), rho=(-0.5, 0.0))
    assert b.classes == (BoundaryClass.PLANE, BoundaryClass.FIXED)
    curve, b = generate(ShapeSpec("perturbed_cylinder", 256, SPECS["perturbed_cylinder"]))
    assert b.classes == (BoundaryClass.PLANE, BoundaryClass.PLANE) and b.rho == (0.0, 0.0)
    assert curve.z[0] == 12 * math.pi and curve.z[-1] == 0.0


def test_perturbed_cylinder_profile():
    assert len(PERTURBATION_MODES) == 6 and PERTURBATION_MODES[-1] == 17 / 6
    curve, _ = generate(ShapeSpec("perturbed_cylinder", 512, SPECS["perturbed_cylinder"]))
    z = curve.z
    expected = 1 + 0.01 * np.abs(sum(np.sin(k * z) for k in PERTURBATION_MODES))
    np.testing.assert_allclose(curve.r, expected, atol=2e-4)


@pytest.mark.parametrize("kind,dims", [
    ("disc_with_hole", {"diameter": 2.0, "hole_diameter": 3.0, "height": 0.5}),
    ("torus", {"major_radius": 0.2, "minor_radius": 0.5}),
    ("disc", {"diameter": 0.5, "height": 1.0}),
    ("rounded_cylinder", {"width": 2.0, "height": 1.0}),
])
def test_inconsistent_specs_rejected(kind, dims):
    with pytest.raises(ValueError):
        generate(ShapeSpec(kind, 32, dims))


def test_spec_validation():
    with pytest.raises(ValueError):
        ShapeSpec("cube", 32, {})
    with pytest.raises(ValueError, match="radius"):
        ShapeSpec("sphere", 32, {})
    with pytest.raises(ValueError):
        ShapeSpec("sphere", 2, {"radius": 1.0})
    with pytest.raises(ValueError):
        ShapeSpec("sphere", 32, {"radius": -1.0})
    assert set(SPECS) < set(SHAPES)


def test_polyline_from_file(tmp_path):
    ref, _ = generate(ShapeSpec("torus", 40, SPECS["torus"]))
    path = write_curve(tmp_path / "ring.csv", ref)
    curve, bspec = generate(ShapeSpec("polyline", dims={"path": str(path)}))
    assert curve.closed and bspec.is_closed
    np.testing.assert_array_equal(curve.nodes, ref.nodes)


@given(st.floats(0.2, 5.0), st.floats(1.0, 4.0), st.integers(16, 96))
def test_rounded_cylinder_orientation(width, aspect, J):
    curve, bspec = generate(ShapeSpec("rounded_cylinder", J, {"width": width,
                                                              "height": width * aspect}))
    assert discrete_volume(curve, bspec) > 0
    assert curve.z[0] > curve.z[-1]
