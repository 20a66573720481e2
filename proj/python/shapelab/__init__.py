"""Curvature-one third forms, Lame systems, compatibility checks and surface reconstruction."""

import json as _json

from ._core import (
    Error,
    EvalError,
    Expr,
    NumericalError,
    ParseError,
    Report,
    ValidationError,
    codazzi_residual,
    curvature_residual,
    example_names,
    fit_quadric,
    reconstruct,
    solve_goursat_ex8,
)
from . import _core

__all__ = [
    "Error",
    "EvalError",
    "Expr",
    "NumericalError",
    "ParseError",
    "Report",
    "ValidationError",
    "codazzi_residual",
    "compatibility",
    "curvature_residual",
    "example_names",
    "fit_quadric",
    "reconstruct",
    "run_scene",
    "scene_defaults",
    "solve_goursat_ex8",
]


def compatibility(g, gt, samples=10):
    """Compatibility verdict for diag(g) and diag(gt) on [1, 2]^n, as a dict."""
    return _json.loads(_core.compatibility(list(g), list(gt), samples))


def run_scene(scene, out_dir):
    """Run a scene given as a dict or a path; returns (exit_code, summary dict)."""
    if isinstance(scene, dict):
        text = _json.dumps(scene)
    else:
        with open(scene, encoding="utf-8") as f:
            text = f.read()
    code, summary = _core.run_scene(text, str(out_dir))
    return code, _json.loads(summary)


def scene_defaults():
    return _json.loads(_core.scene_defaults())
