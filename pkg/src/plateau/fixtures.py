"""Reference curves, families, surfaces and defining functions with known fillings."""
from __future__ import annotations

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.special import binom

from .geometry import CurveSpec, curve_spec_to_json, family_from_json
from .moments import Sheet, Surface


def _spec(z1: dict, z2: dict, cover: int = 1) -> CurveSpec:
    conv = lambda d: {Fraction(k): np.atleast_1d(np.asarray(v, complex)) for k, v in d.items()}
    return CurveSpec(conv(z1), conv(z2), cover)


def disk_spec(radius: float = 1.0) -> CurveSpec:
    return _spec({1: radius}, {})


def graph_spec(power: int, radius: float = 1.0) -> CurveSpec:
    """Boundary of the graph w = z^power over |z| < radius."""
    return _spec({1: radius}, {power: radius ** power})


def sqrt_spec() -> CurveSpec:
    """Boundary of {w^2 = z} over the unit disk, one curve covering the circle twice."""
    return _spec({1: 1.0}, {Fraction(1, 2): 1.0}, cover=2)


def annulus_specs():
    """Graph w = z over 1/2 < |z| < 1: outer curve positive, inner curve reversed."""
    return [_spec({1: 1.0}, {1: 1.0}), _spec({-1: 0.5}, {-1: 0.5})]


def two_circle_specs():
    return [_spec({1: 1.0}, {}), _spec({0: 3.0, 1: 0.5}, {})]


def branch_spec(radius: float = 1.5, terms: int = 48) -> CurveSpec:
    """Boundary of {w^2 = z - t} over |z| < radius, t-polynomial coefficients.

    z2 = sqrt(radius) e^{i theta/2} sum_m binom(1/2, m) (-t/radius)^m e^{-i m theta}.
    """
    z2 = {}
    for m in range(terms):
        tp = np.zeros(m + 1, complex)
        tp[m] = math.sqrt(radius) * binom(0.5, m) * (-1.0 / radius) ** m
        z2[Fraction(1, 2) - m] = tp
    return CurveSpec({Fraction(1): np.array([radius + 0j])}, z2, cover=2)


# ---------------------------------------------------------------------------
# JSON family documents
# ---------------------------------------------------------------------------

def _entry(spec: CurveSpec, t=None, orientation=1) -> dict:
    e = curve_spec_to_json(spec)
    if t is not None:
        e["t"] = float(t)
    if orientation != 1:
        e["orientation"] = orientation
    return e


def single_slice_doc(specs, name: str, t: float = 0.0) -> dict:
    specs = specs if isinstance(specs, (list, tuple)) else [specs]
    return {"n": 1, "name": name, "tGrid": [t], "curves": [_entry(s, t) for s in specs]}


def torus_t_grid(count: int = 21) -> np.ndarray:
    return np.linspace(-0.95, 0.95, count)


def torus_doc(count: int = 21, corrupt_at: int | None = None) -> dict:
    """M = {(cos s, e^{i theta}, sin s e^{i theta})}; each slice is two circles
    z2 = +-sqrt(1 - t^2) z1, both oriented by increasing theta."""
    grid = torus_t_grid(count)
    curves = []
    for k, t in enumerate(grid):
        a = math.sqrt(max(0.0, 1.0 - t * t))
        for sgn in (1.0, -1.0):
            z2 = {1: sgn * a}
            if corrupt_at == k and sgn > 0:
                z2[-1] = 0.1
            curves.append(_entry(_spec({1: 1.0}, z2), t))
    return {"n": 1, "name": "torus", "tGrid": [float(t) for t in grid], "curves": curves}


def branch_doc(count: int = 11) -> dict:
    grid = np.linspace(-0.5, 0.5, count)
    return {"n": 1, "name": "branch", "tGrid": [float(t) for t in grid],
            "curves": [_entry(branch_spec())]}


def constant_graph_doc(count: int = 5) -> dict:
    grid = np.linspace(0.0, 1.0, count)
    return {"n": 1, "name": "constant-graph", "tGrid": [float(t) for t in grid],
            "curves": [_entry(graph_spec(2))]}


def negative_doc() -> dict:
    """Graph w = z^2 traversed clockwise: winding -1 inside."""
    return {"n": 1, "name": "negative", "tGrid": [0.0],
            "curves": [_entry(graph_spec(2), 0.0, orientation=-1)]}


def documents() -> dict:
    return {
        "disk": single_slice_doc(disk_spec(), "disk"),
        "graph2": single_slice_doc(graph_spec(2), "graph2"),
        "graph3": single_slice_doc(graph_spec(3), "graph3"),
        "sqrt": single_slice_doc(sqrt_spec(), "sqrt"),
        "annulus": single_slice_doc(annulus_specs(), "annulus"),
        "torus": torus_doc(),
        "torus_corrupted": torus_doc(corrupt_at=7),
        "branch": branch_doc(),
        "constant_graph": constant_graph_doc(),
        "negative": negative_doc(),
    }


def family(name: str, n: int = 256):
    return family_from_json(documents()[name], n)


# ---------------------------------------------------------------------------
# surfaces for the Poincare-form route
# ---------------------------------------------------------------------------

def torus_surface() -> Surface:
    def z(s, th):
        s, th = np.broadcast_arrays(np.asarray(s, float), np.asarray(th, float))
        e = np.exp(1j * th)
        return e, np.sin(s) * e

    def dz(s, th):
        s, th = np.broadcast_arrays(np.asarray(s, float), np.asarray(th, float))
        e = np.exp(1j * th)
        return np.zeros_like(e), np.cos(s) * e

    sheet = Sheet(z, lambda s: np.cos(s), (0.0, 2 * math.pi), True, 2 * math.pi, 1, dz)
    return Surface((sheet,), (-1.0, 1.0))


def sphere_surface() -> Surface:
    """(t, r e^{i theta}, r e^{-i theta}) with r = sqrt(1 - t^2); slices carry h = z2 dz1
    to 2 pi i (1 - t^2)."""
    def z(s, th):
        s, th = np.broadcast_arrays(np.asarray(s, float), np.asarray(th, float))
        r = np.sqrt(np.clip(1 - s * s, 0, None))
        return r * np.exp(1j * th), r * np.exp(-1j * th)

    def dz(s, th):
        s, th = np.broadcast_arrays(np.asarray(s, float), np.asarray(th, float))
        r = np.sqrt(np.clip(1 - s * s, 1e-300, None))
        dr = -s / r
        return dr * np.exp(1j * th), dr * np.exp(-1j * th)

    sheet = Sheet(z, lambda s: np.asarray(s, float), (-1.0, 1.0), False, 2 * math.pi, 1, dz)
    return Surface((sheet,), (-1.0, 1.0))


def sphere_doc(count: int = 9) -> dict:
    grid = np.linspace(-0.8, 0.8, count)
    curves = []
    for t in grid:
        r = math.sqrt(1 - t * t)
        curves.append(_entry(_spec({1: r}, {-1: r}), t))
    return {"n": 1, "name": "sphere", "tGrid": [float(t) for t in grid], "curves": curves}


# ---------------------------------------------------------------------------
# defining functions for the Green machinery
# ---------------------------------------------------------------------------

def plane_function() -> dict:
    return {"d1": 0, "d2": 1, "coeffs": [{"i": 0, "j": 1, "t_poly": [1.0]}]}


def parabola_function(with_t: bool = False) -> dict:
    coeffs = [{"i": 0, "j": 1, "t_poly": [1.0]}, {"i": 2, "j": 0, "t_poly": [-1.0]}]
    if with_t:
        coeffs.append({"i": 0, "j": 0, "t_poly": [0.0, -1.0]})
    return {"d1": 2, "d2": 1, "coeffs": coeffs}


def _terms(i: int) -> list:
    return [{"i": i, "j": 0, "t_poly": [1.0]}]


def boundary_data() -> dict:
    """u = Re H on the leaf; 'incompatible' takes its normal derivative from
    another function, so no harmonic extension exists."""
    return {"u_one": {"H": _terms(0)}, "u_re": {"H": _terms(1)}, "u_cube": {"H": _terms(3)},
            "u_incompatible": {"H": _terms(1), "HNormal": _terms(2)}}


def write_all(outdir) -> list:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in documents().items():
        p = out / f"{name}.json"
        p.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        written.append(p)
    for name, doc in (("plane_F", plane_function()), ("parabola_F", parabola_function()),
                      ("parabola_t_F", parabola_function(True)), *boundary_data().items()):
        p = out / f"{name}.json"
        p.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        written.append(p)
    return written


if __name__ == "__main__":
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(p)
