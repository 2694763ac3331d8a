import dataclasses
import json
import math

import numpy as np
import pytest

from plateau import family as fam_mod
from plateau import fixtures as fx
from plateau.errors import MomentViolation, OrientationInconsistency
from plateau.family import (LeviFlatSet, collate_singular, continuity_check, export,
                            lipschitz_bound, sweep)
from plateau.geometry import family_from_json
from plateau.reconstruct import ReconstructConfig


def torus_sheet_error(chain):
    a = math.sqrt(1 - chain.t ** 2)
    worst = 0.0
    for z, w, _, _ in chain.points():
        worst = max(worst, min(abs(w - a * z), abs(w + a * z)))
    return worst


# -- sweep -----------------------------------------------------------------

def test_torus_matches_levi_flat_oracle(torus_set):
    assert len(torus_set.slices) == 21
    for ch in torus_set.slices:
        assert [f.degree for f in ch.fibers] == [2]
        assert torus_sheet_error(ch) < 1e-6
    assert set(torus_set.signs.values()) == {1}
    assert not torus_set.errors


def test_torus_both_sheets_present(torus_set):
    ch = torus_set.slices[10]
    f = ch.fibers[0]
    far = np.abs(f.zeta) > 0.2
    a = math.sqrt(1 - ch.t ** 2)
    w = np.sort_complex(ch.roots[0][far] / f.zeta[far, None])
    np.testing.assert_allclose(w.real.min(axis=1), -a, atol=1e-8)
    np.testing.assert_allclose(w.real.max(axis=1), a, atol=1e-8)


def test_corrupted_slice_fails_alone():
    bad = fx.family("torus_corrupted")
    with pytest.raises(MomentViolation) as err:
        sweep(bad)
    assert err.value.context["t"] == pytest.approx(bad.t_grid[7])
    lf = sweep(bad, strict=False)
    assert list(lf.errors) == [7]
    assert isinstance(lf.errors[7], MomentViolation)
    assert lf.slices[7] is None
    assert all(s is not None for i, s in enumerate(lf.slices) if i != 7)


def test_parameter_outside_projection_gives_empty_slice():
    doc = fx.single_slice_doc(fx.graph_spec(2), "edge")
    doc["tGrid"] = [0.0, 2.0]
    lf = sweep(family_from_json(doc, 256))
    assert not lf.slices[0].empty and lf.slices[1].empty
    assert lf.slices[1].t == 2.0 and lf.signs == {0: 1}


def test_short_boundary_treated_as_empty():
    doc = fx.single_slice_doc(fx.graph_spec(2, radius=1e-5), "tiny")
    with pytest.warns(UserWarning, match="below threshold"):
        lf = sweep(family_from_json(doc, 256))
    assert lf.slices[0].empty and lf.notes


def test_sign_inconsistency_detected(monkeypatch):
    real = fam_mod.reconstruct_slice

    def flipped(curves, config):
        ch = real(curves, config=config)
        return dataclasses.replace(ch, sign=-1) if curves[0].t > 0.6 else ch

    monkeypatch.setattr(fam_mod, "reconstruct_slice", flipped)
    with pytest.raises(OrientationInconsistency):
        sweep(fx.family("constant_graph"))


def test_shared_slices_are_bitwise_identical(torus_set):
    doc = fx.torus_doc()
    keep = [3, 4]
    ts = [doc["tGrid"][k] for k in keep]
    doc["tGrid"] = ts
    doc["curves"] = [c for c in doc["curves"] if c["t"] in ts]
    lf = sweep(family_from_json(doc, 256))
    for a, k in zip(lf.slices, keep):
        b = torus_set.slices[k]
        assert a.t == b.t
        for ra, rb in zip(a.roots, b.roots):
            assert ra.tobytes() == rb.tobytes()


def test_threads_do_not_change_results():
    fam = fx.family("constant_graph")
    a = sweep(fam, threads=1)
    b = sweep(fam, threads=2)
    for x, y in zip(a.slices, b.slices):
        assert x.roots[0].tobytes() == y.roots[0].tobytes()


# -- continuity ------------------------------------------------------------

def test_torus_continuity_against_derivative_oracle(torus_set):
    ratio, notes = continuity_check(torus_set)
    t = torus_set.t_grid
    a = np.sqrt(1 - t ** 2)
    zmax = max(np.abs(s.fibers[0].zeta).max() for s in torus_set.slices)
    oracle = float((np.abs(np.diff(a)) / np.diff(t)).max()) * zmax
    assert oracle / 2 <= ratio <= 2 * oracle
    assert ratio <= lipschitz_bound(torus_set.family)
    assert not notes


def test_constant_family_has_zero_displacement():
    ratio, _ = continuity_check(sweep(fx.family("constant_graph")))
    assert ratio < 1e-8


def test_single_slice_continuity_skipped(slices):
    lf = LeviFlatSet(np.array([0.0]), (slices("graph2"),))
    ratio, notes = continuity_check(lf)
    assert ratio is None and "skipped" in notes[0]


# -- singular locus --------------------------------------------------------

def test_branch_locus_tracks_parameter(branch_set):
    locus = collate_singular(branch_set)
    h = branch_set.slices[0].cmap.grid.step
    assert {t for t, _ in locus} == set(float(t) for t in branch_set.t_grid)
    for t, z in locus:
        assert abs(z - t) <= 2 * h


def test_graph_family_locus_empty():
    assert collate_singular(sweep(fx.family("constant_graph"))) == []


def test_torus_locus_only_at_origin(torus_set):
    locus = torus_set.singular_locus
    h = torus_set.slices[0].cmap.grid.step
    assert locus
    assert max(abs(z) for _, z in locus) <= 2 * h


# -- export ----------------------------------------------------------------

def test_export_layout(branch_set, tmp_path):
    out = export(branch_set, tmp_path / "run", ReconstructConfig())
    man = json.loads((out / "manifest.json").read_text())
    assert man["tGrid"] == [float(t) for t in branch_set.t_grid]
    assert man["signs"] == [1]
    assert len(man["slices"]) == 11
    for e in man["slices"]:
        assert e["status"] == "ok" and (out / e["file"]).exists()
    rows = (out / "singular.csv").read_text().splitlines()
    assert rows[0] == "t,re_zeta,im_zeta" and len(rows) - 1 == len(branch_set.singular_locus)
    head = (out / "slice_0.csv").read_text().splitlines()[0]
    assert head.startswith("re_zeta,im_zeta,re_w,im_w")
    first = (out / "manifest.json").read_bytes()
    export(branch_set, tmp_path / "run", ReconstructConfig())
    assert (out / "manifest.json").read_bytes() == first


def test_export_records_failed_slices(tmp_path):
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lf = sweep(fx.family("torus_corrupted"), strict=False)
    man = json.loads((export(lf, tmp_path) / "manifest.json").read_text())
    bad = [e for e in man["slices"] if e["status"] == "error"]
    assert [e["index"] for e in bad] == [7] and bad[0]["error"] == "MomentViolation"
