"""Sweep a curve family slice by slice, check continuity in t and collate
the singular locus."""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import OrientationInconsistency, PlateauError
from .geometry import CurveFamily
from .reconstruct import (ChainSlice, ReconstructConfig, dumps, empty_slice, fmt,
                          point_cloud_rows, reconstruct_slice)


@dataclass(frozen=True, eq=False)
class LeviFlatSet:
    t_grid: np.ndarray
    slices: tuple                    # ChainSlice or None (failed) per t
    errors: dict = field(default_factory=dict)      # index -> PlateauError
    notes: tuple = ()
    family: CurveFamily | None = None

    @property
    def signs(self) -> dict:
        return {i: s.sign for i, s in enumerate(self.slices) if s is not None and not s.empty}

    @property
    def singular_locus(self) -> list:
        return collate_singular(self)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PLATEAU_THREADS", "1")))
    except ValueError:
        return 1


def _one(family: CurveFamily, i: int, config: ReconstructConfig):
    t = float(family.t_grid[i])
    curves = family.slices[i]
    if not curves:
        return empty_slice(t), None
    if not family.transverse_mask[i]:
        total = sum(c.length() for c in curves)
        note = (f"t={t!r}: boundary length {total:.3g} below threshold, treated as empty"
                if total < 1e-3 else f"t={t!r}: non-transverse slice skipped")
        return empty_slice(t), note
    return reconstruct_slice(curves, config=config), None


def sweep(family: CurveFamily, config: ReconstructConfig = ReconstructConfig(),
          strict: bool = True, threads: int | None = None) -> LeviFlatSet:
    """Reconstruct every slice; errors carry t. In strict mode the first error
    is raised, otherwise failed slices are recorded and left as None."""
    n = len(family.t_grid)
    threads = _threads() if threads is None else threads

    def run(i):
        try:
            return _one(family, i, config)
        except PlateauError as exc:
            exc.context.setdefault("t", float(family.t_grid[i]))
            return exc, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(n)))
    else:
        results = [run(i) for i in range(n)]

    slices, errors, notes = [], {}, []
    for i, (res, note) in enumerate(results):
        if isinstance(res, PlateauError):
            if strict:
                raise res
            errors[i] = res
            slices.append(None)
        else:
            slices.append(res)
        if note:
            warnings.warn(note)
            notes.append(note)
    out = LeviFlatSet(family.t_grid, tuple(slices), errors, tuple(notes), family)
    signs = set(out.signs.values())
    if len(signs) > 1:
        raise OrientationInconsistency("boundary sign differs between slices",
                                       signs={float(family.t_grid[i]): s for i, s in out.signs.items()})
    return out


def _cloud(chain: ChainSlice) -> np.ndarray:
    rows = [(z.real, z.imag, w.real, w.imag) for z, w, _, _ in chain.points()]
    return np.asarray(rows, dtype=float).reshape(-1, 4)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric nearest-point distance between two point clouds."""
    if not len(a) or not len(b):
        return 0.0
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def continuity_check(lf: LeviFlatSet):
    """Max over adjacent nonempty slices of cloud displacement / |dt|.

    Returns (ratio, notes); ratio is None when fewer than two slices qualify.
    """
    notes = []
    idx = [i for i, s in enumerate(lf.slices) if s is not None and not s.empty]
    pairs = [(i, j) for i, j in zip(idx, idx[1:]) if j == i + 1]
    if not pairs:
        notes.append("fewer than two adjacent nonempty slices; continuity skipped")
        return None, notes
    ratio = 0.0
    for i, j in pairs:
        dt = abs(float(lf.t_grid[j] - lf.t_grid[i]))
        ratio = max(ratio, hausdorff(_cloud(lf.slices[i]), _cloud(lf.slices[j])) / dt)
    return ratio, notes


def lipschitz_bound(family: CurveFamily, factor: float = 10.0) -> float:
    """factor times the largest finite-difference t-derivative of the boundary samples."""
    best = 0.0
    for i in range(len(family.t_grid) - 1):
        a, b = family.slices[i], family.slices[i + 1]
        if len(a) != len(b) or not a:
            continue
        dt = float(family.t_grid[i + 1] - family.t_grid[i])
        for ca, cb in zip(a, b):
            if ca.n == cb.n:
                best = max(best, float(np.abs(cb.nodes - ca.nodes).max()) / dt)
    return factor * best


def collate_singular(lf: LeviFlatSet) -> list:
    """(t, zeta cell centre) for every flagged discriminant cell."""
    out = []
    for s in lf.slices:
        if s is None:
            continue
        for z in s.singular_cells():
            out.append((s.t, complex(z)))
    return out


def export(lf: LeviFlatSet, outdir, config: ReconstructConfig | None = None) -> Path:
    """manifest.json, slice_<i>.csv point clouds and singular.csv."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    ratio, notes = continuity_check(lf)
    entries = []
    for i, s in enumerate(lf.slices):
        e = {"index": i, "t": float(lf.t_grid[i])}
        if s is None:
            err = lf.errors[i]
            e.update(status="error", error=type(err).__name__, message=str(err))
        else:
            e.update(status="empty" if s.empty else "ok", sign=s.sign,
                     stokesResidual=s.stokes_residual, massEstimate=s.mass,
                     singularCells=int(len(s.singular_cells())),
                     file=f"slice_{i}.csv")
            (out / f"slice_{i}.csv").write_text("\n".join(point_cloud_rows(s)) + "\n")
        entries.append(e)
    rows = ["t,re_zeta,im_zeta"] + [",".join([fmt(t), fmt(z.real), fmt(z.imag)])
                                    for t, z in collate_singular(lf)]
    (out / "singular.csv").write_text("\n".join(rows) + "\n")
    signs = sorted(set(lf.signs.values()))
    manifest = {
        "name": lf.family.name if lf.family is not None else "",
        "tGrid": [float(t) for t in lf.t_grid],
        "signs": signs,
        "slices": entries,
        "continuityRatio": ratio,
        "lipschitzBound": lipschitz_bound(lf.family) if lf.family is not None else None,
        "notes": list(lf.notes) + notes,
        "config": _config_doc(config),
    }
    (out / "manifest.json").write_text(dumps(manifest))
    return out


def _config_doc(config):
    if config is None:
        return {}
    return {k: v for k, v in vars(config).items()}
