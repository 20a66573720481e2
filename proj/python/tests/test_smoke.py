import json
import math

import numpy as np
import pytest

import shapelab


def test_expressions():
    e = shapelab.Expr("sin(R1)*R2^2")
    assert e.eval({"R1": 0.5, "R2": 2.0}) == pytest.approx(4 * math.sin(0.5))
    assert e.diff("R2").eval({"R1": 0.5, "R2": 2.0}) == pytest.approx(4 * math.sin(0.5))
    assert e.depends_on("R1") and not e.depends_on("R3")


def test_parse_error_carries_offset():
    with pytest.raises(shapelab.ParseError) as info:
        shapelab.Expr("0.3 + * R2")
    assert info.value.offset == 6
    assert isinstance(info.value, shapelab.Error)


def test_catalog_curvature():
    assert "dupin" in shapelab.example_names()
    r = shapelab.curvature_residual("quadric")
    assert r.max <= 1e-6
    assert r.node_residual.shape == (64, 64)
    assert json.loads(r.to_json())["max"] == pytest.approx(r.max)
    assert shapelab.curvature_residual("hyperquadric", grid=[12, 12, 12]).max <= 1e-6
    assert shapelab.codazzi_residual("dupin").max <= 1e-8
    with pytest.raises(shapelab.ValidationError):
        shapelab.codazzi_residual("monge")


def test_goursat():
    s = shapelab.solve_goursat_ex8(n=33)
    assert s["phi"].shape == (33, 33)
    assert s["phi"][0, 0] == pytest.approx(0.3)
    assert s["first_order"].max <= 1e-6
    assert s["system4"].max <= 1e-6


def test_reconstruct_and_fit():
    m = shapelab.reconstruct("quadric", grid=[48, 48], margin=0.1)
    assert m["vertices"].shape == (48 * 48, 3)
    assert m["faces"].shape == (2 * 47 * 47, 3)
    assert np.allclose(np.linalg.norm(m["normals"], axis=1), 1.0)
    coeffs, residual = shapelab.fit_quadric(m["vertices"])
    assert len(coeffs) == 10
    assert residual <= 1e-4
    assert m["obj"].startswith("v ")


def test_fit_quadric_sphere():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(200, 3))
    p /= np.linalg.norm(p, axis=1)[:, None]
    _, residual = shapelab.fit_quadric(2.0 * p + 1.0)
    assert residual <= 1e-10
    with pytest.raises(shapelab.ValidationError):
        shapelab.fit_quadric(np.zeros((5, 2)))


def test_compatibility():
    ok = shapelab.compatibility(["1", "1"], ["R1", "R2"])
    assert ok["passed"]
    bad = shapelab.compatibility(["1", "1"], ["1", "1 + R1*R2"])
    assert not bad["passed"]


def test_run_scene(tmp_path):
    code, summary = shapelab.run_scene({"mode": "goursat", "grid": [33, 33]}, tmp_path)
    assert code == 0
    assert summary["passed"]
    assert (tmp_path / "goursat.summary.json").exists()
    assert set(shapelab.scene_defaults()) >= {"goursat", "reconstruct", "family"}
    with pytest.raises(shapelab.ValidationError):
        shapelab.run_scene({"mode": "goursat", "colour": 1}, tmp_path)
