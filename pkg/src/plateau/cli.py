"""Batch front end: check-moments, reconstruct, sweep, green, extend, validate.

Exit codes: 0 ok, 1 moment violation, 2 bad or missing input, 3 numerical
failure, 4 negative winding, 5 obstructed extension.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (InvalidSpec, MissingInput, ObstructedExtension, ParseError,
                     PlateauError, UseAlternative)
from .family import LeviFlatSet, continuity_check, export, sweep
from .geometry import CurveFamily, family_from_json, project_z1
from .green import (EXTEND_TOL, CurveDiscretization, DefiningFunction, cauchy_datum,
                    discrete_laplacian, exterior_points, green_field, harmonic_extend,
                    jump_check, values_csv)
from .moments import build_moment_table, family_moment_direct, moment_residual, table_rows
from .polynomials import BiPoly, HolomorphicTestForm, bipoly_from_json, holomorphic_basis
from .reconstruct import (ReconstructConfig, chain_to_json, dumps, locus_rows, mass_bound,
                          slice_component_map)

TOLERANCES = {"moment": 1e-6, "newton": 1e-6, "stokes": 1e-6, "dbar": 1e-3,
              "disc": 1e-8, "extend": EXTEND_TOL, "jump": 5e-3}


@dataclass(frozen=True)
class RunConfig:
    quadrature_n: int = 256
    grid_n: int = 64
    grid_margin: float = 0.25
    kmax: int | None = None
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    collar: float = 1.1
    green_nodes: int = 10000
    test_degree: int = 3
    output_dir: str | None = None
    stages: tuple = ("moments", "reconstruct")

    def check(self) -> "RunConfig":
        n = self.quadrature_n
        if not (16 <= n <= 1 << 16) or n & (n - 1):
            raise InvalidSpec("quadratureN must be a power of two in [16, 65536]")
        if not 8 <= self.grid_n <= 1024:
            raise InvalidSpec("zetaGrid resolution must lie in [8, 1024]")
        if not 0 <= self.grid_margin <= 4:
            raise InvalidSpec("zetaGrid margin must lie in [0, 4]")
        if self.kmax is not None and not 1 <= self.kmax <= 64:
            raise InvalidSpec("kMax must lie in [1, 64]")
        for k, v in self.tolerances.items():
            if k not in TOLERANCES:
                raise InvalidSpec(f"unknown tolerance '{k}'")
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise InvalidSpec(f"tolerance '{k}' must be positive and finite")
        if not 1.0 < self.collar <= 3.0:
            raise InvalidSpec("collarFactor must lie in (1, 3]")
        if not 100 <= self.green_nodes <= 400000:
            raise InvalidSpec("greenNodes must lie in [100, 400000]")
        if not 0 <= self.test_degree <= 12:
            raise InvalidSpec("testDegree must lie in [0, 12]")
        bad = set(self.stages) - {"moments", "reconstruct", "green"}
        if bad:
            raise InvalidSpec(f"unknown stages {sorted(bad)}")
        return self

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def reconstruct(self, force: bool = False) -> ReconstructConfig:
        return ReconstructConfig(moment_tol=math.inf if force else self.tol("moment"),
                                 newton_tol=self.tol("newton"), disc_tol=self.tol("disc"),
                                 stokes_tol=self.tol("stokes"), grid_n=self.grid_n,
                                 grid_margin=self.grid_margin, kmax=self.kmax)

    def to_json(self) -> dict:
        return {"quadratureN": self.quadrature_n,
                "zetaGrid": {"n": self.grid_n, "margin": self.grid_margin},
                "kMax": self.kmax,
                "tolerances": {f"{k}Tol": float(v) for k, v in sorted(self.tolerances.items())},
                "collarFactor": self.collar, "greenNodes": self.green_nodes,
                "testDegree": self.test_degree, "stages": list(self.stages)}


def _read_json(path, what: str):
    p = Path(path)
    if not p.is_file():
        raise MissingInput(f"{what} not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_config(path=None, args=None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        doc = _read_json(path, "config")
        if not isinstance(doc, dict):
            raise ParseError("config must be a JSON object")
        try:
            grid = doc.get("zetaGrid", {})
            tols = dict(cfg.tolerances)
            for k, v in doc.get("tolerances", {}).items():
                tols[k[:-3] if k.endswith("Tol") else k] = float(v)
            cfg = replace(cfg,
                          quadrature_n=int(doc.get("quadratureN", cfg.quadrature_n)),
                          grid_n=int(grid.get("n", cfg.grid_n)),
                          grid_margin=float(grid.get("margin", cfg.grid_margin)),
                          kmax=None if doc.get("kMax") is None else int(doc["kMax"]),
                          tolerances=tols,
                          collar=float(doc.get("collarFactor", cfg.collar)),
                          green_nodes=int(doc.get("greenNodes", cfg.green_nodes)),
                          test_degree=int(doc.get("testDegree", cfg.test_degree)),
                          output_dir=doc.get("outputDir"),
                          stages=tuple(doc.get("stages", cfg.stages)))
        except (AttributeError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: malformed config ({exc})") from None
    if args is not None:
        if getattr(args, "quadrature_n", None) is not None:
            cfg = replace(cfg, quadrature_n=args.quadrature_n)
        if getattr(args, "kmax", None) is not None:
            cfg = replace(cfg, kmax=args.kmax)
        tols = dict(cfg.tolerances)
        for name in TOLERANCES:
            v = getattr(args, f"tol_{name}", None)
            if v is not None:
                tols[name] = v
        cfg = replace(cfg, tolerances=tols)
        if getattr(args, "out", None) is not None:
            cfg = replace(cfg, output_dir=args.out)
    return cfg.check()


def _outdir(cfg: RunConfig) -> Path | None:
    if cfg.output_dir is None:
        return None
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise MissingInput(f"output directory not writable: {exc}") from None
    return out


def _load_family(path, cfg: RunConfig):
    doc = _read_json(path, "input")
    return doc, family_from_json(doc, cfg.quadrature_n)


def _test_forms(family: CurveFamily, cfg: RunConfig):
    docs = family.meta.get("testForms")
    if docs:
        return [HolomorphicTestForm.from_json(d) for d in docs]
    return holomorphic_basis(cfg.test_degree)


# ---------------------------------------------------------------------------
# commands; each returns (report dict, exit code)
# ---------------------------------------------------------------------------

def check_moments(family: CurveFamily, cfg: RunConfig):
    tol = cfg.tol("moment")
    forms = _test_forms(family, cfg)
    rows, failing, notes = [], [], []
    for i, t in enumerate(family.t_grid):
        t = float(t)
        curves = family.slices[i]
        row = {"t": t}
        if not curves:
            row.update(status="empty", momentResidual=0.0, testIntegrals=[])
        elif not family.transverse_mask[i]:
            row.update(status="skipped", momentResidual=None, testIntegrals=[])
            notes.append(f"t={t!r}: non-transverse slice skipped")
        else:
            cmap = slice_component_map(curves, cfg.grid_n, margin=cfg.grid_margin)
            res = moment_residual(build_moment_table(curves, cmap, cfg.kmax, t))
            vals = [family_moment_direct(family, h, t) for h in forms]
            worst = max([res] + [abs(v) for v in vals])
            row.update(status="ok" if worst < tol else "fail", momentResidual=res,
                       testIntegrals=[[v.real, v.imag] for v in vals],
                       maxTestIntegral=max(abs(v) for v in vals))
            if worst >= tol:
                failing.append(t)
        rows.append(row)
    resid = [r["momentResidual"] for r in rows if r["momentResidual"] is not None]
    ints = [r["maxTestIntegral"] for r in rows if "maxTestIntegral" in r]
    report = {"command": "check-moments", "name": family.name, "momentTol": tol,
              "slices": rows, "maxResidual": max(resid, default=0.0),
              "maxTestIntegral": max(ints, default=0.0), "failingT": failing,
              "testForms": len(forms), "notes": notes}
    return report, (1 if failing else 0)


def _sweep_report(lf: LeviFlatSet, cfg: RunConfig, command: str):
    entries, code = [], 0
    for i, s in enumerate(lf.slices):
        e = {"t": float(lf.t_grid[i])}
        if s is None:
            err = lf.errors[i]
            e.update(status="error", error=type(err).__name__, message=str(err),
                     exitCode=err.exit_code)
            if "components" in err.context:
                e["components"] = [int(c) for c in err.context["components"]]
            code = code or err.exit_code
        elif s.empty:
            e["status"] = "empty"
        else:
            bound = mass_bound(s.curves)
            e.update(status="ok", stokesResidual=s.stokes_residual, sign=s.sign,
                     massEstimate=s.mass, massBound=bound,
                     singularCells=int(len(s.singular_cells())))
            if not s.stokes_residual < cfg.tol("stokes"):
                e["status"] = "stokes"
                code = code or 3
        entries.append(e)
    ratio, notes = continuity_check(lf)
    report = {"command": command, "name": lf.family.name if lf.family else "",
              "slices": entries, "signs": sorted(set(lf.signs.values())),
              "continuityRatio": ratio, "notes": list(lf.notes) + notes}
    return report, code


def run_sweep(family: CurveFamily, doc: dict, cfg: RunConfig, force: bool, command: str):
    rc = cfg.reconstruct(force)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lf = sweep(family, rc, strict=False)
    report, code = _sweep_report(lf, cfg, command)
    out = _outdir(cfg)
    if out is not None:
        export(lf, out, rc)
        (out / "input.json").write_text(dumps(doc))
        (out / "run.json").write_text(dumps({"config": cfg.to_json(), "exitCode": code}))
        if command == "reconstruct":
            for i, s in enumerate(lf.slices):
                if s is not None and not s.empty:
                    (out / f"chain_{i}.json").write_text(dumps(chain_to_json(s)))
                    (out / f"locus_{i}.csv").write_text("\n".join(locus_rows(s)) + "\n")
                    table = build_moment_table(s.curves, s.cmap, cfg.kmax, s.t)
                    (out / f"moments_{i}.csv").write_text("\n".join(table_rows(table)) + "\n")
    return report, code


def _single(family: CurveFamily, t: float | None) -> CurveFamily:
    i = 0 if t is None else family.index(t)
    if i is None:
        raise InvalidSpec(f"t={t} is not on the tGrid")
    return CurveFamily(family.t_grid[i:i + 1], family.slices[i:i + 1],
                       family.transverse_mask[i:i + 1], family.specs, family.name, family.meta)


def _leaf(family: CurveFamily, i: int):
    curves = family.slices[i]
    if len(curves) != 1:
        raise UseAlternative(f"t={float(family.t_grid[i])!r}: extension needs a single boundary curve")
    return curves[0]


def green_command(family: CurveFamily, F: DefiningFunction, cfg: RunConfig, t, star):
    i = 0 if t is None else family.index(t)
    if i is None:
        raise InvalidSpec(f"t={t} is not on the tGrid")
    t = float(family.t_grid[i])
    curve = _leaf(family, i)
    disc = CurveDiscretization.build(F, curve, cfg.green_nodes, cfg.collar, t=t)
    if star is None:
        star = complex(project_z1(curve).points.mean())
    s = disc.nearest(star)
    idx, g = green_field(disc, s)
    good, lap = discrete_laplacian(disc, g)
    # inside gamma only: the collar edge truncates the lattice sum
    far = (np.abs(disc.zeta[good] - disc.zeta[s]) > 8 * disc.h) & disc.inside[good]
    harm = float(np.abs(lap[far]).max(initial=0.0))
    report = {"command": "green", "t": t, "nodes": disc.n, "h": disc.h,
              "star": [disc.zeta[s].real, disc.zeta[s].imag],
              "harmonicityResidual": harm, "maxImag": float(np.abs(g.imag).max())}
    out = _outdir(cfg)
    if out is not None:
        vals = np.where(idx == s, np.nan, g.real)
        (out / "green.csv").write_text(values_csv(disc.zeta, disc.z2, vals))
        (out / "green.json").write_text(dumps(report))
    return report, 0


def _boundary_entries(doc) -> list:
    if isinstance(doc, dict) and "slices" in doc:
        entries = doc["slices"]
    else:
        entries = [doc]
    if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
        raise ParseError("boundary data must be an object or a 'slices' list of objects")
    out = []
    for k, e in enumerate(entries):
        if "H" not in e:
            raise ParseError(f"slices[{k}]: boundary data needs 'H' (u = Re H on the leaf)")
        H = bipoly_from_json(e["H"], f"slices[{k}].H")
        N = bipoly_from_json(e["HNormal"], f"slices[{k}].HNormal") if "HNormal" in e else H
        out.append((None if e.get("t") is None else float(e["t"]), H, N))
    return out


def _leaf_derivative(H: BiPoly, F: DefiningFunction, t: float):
    """d/dz1 of H restricted to {F = 0}: H_1 - H_2 F_1 / F_2."""
    H1, H2 = H.d1(), H.d2()

    def d(z1, z2):
        F1, F2 = F.grad(z1, z2, t)
        return H1(z1, z2, t) - H2(z1, z2, t) * F1 / F2
    return d


def extend_command(sweep_dir, F: DefiningFunction, data_doc, cfg: RunConfig):
    sdir = Path(sweep_dir)
    if not (sdir / "manifest.json").is_file() or not (sdir / "input.json").is_file():
        raise MissingInput(f"not a sweep output directory: {sdir}")
    manifest = _read_json(sdir / "manifest.json", "manifest")
    run = _read_json(sdir / "run.json", "run record") if (sdir / "run.json").is_file() else {}
    if run.get("exitCode", 0) != 0:
        raise InvalidSpec("the sweep in this directory did not succeed")
    n = int(run.get("config", {}).get("quadratureN", cfg.quadrature_n))
    family = family_from_json(_read_json(sdir / "input.json", "input"), n)
    entries = _boundary_entries(data_doc)
    status = {float(e["t"]): e["status"] for e in manifest["slices"]}
    out = _outdir(cfg)
    rows, code = [], 0
    for i, t in enumerate(family.t_grid):
        t = float(t)
        if status.get(t) != "ok":
            continue
        match = [e for e in entries if e[0] is None or abs(e[0] - t) <= 1e-12]
        if not match:
            continue
        _, H, N = match[0]
        curve = _leaf(family, i)
        z1, z2 = curve.nodes[:, 0], curve.nodes[:, 1]
        u = np.real(H(z1, z2, t))
        dN = _leaf_derivative(N, F, t)
        vel = curve.velocity
        speed = np.sqrt((np.abs(vel) ** 2).sum(axis=1))
        nu1 = -1j * curve.orientation * vel[:, 0] / speed
        up = np.real(dN(z1, z2) * nu1)
        datum = cauchy_datum(curve, u, up)
        disc = CurveDiscretization.build(F, curve, cfg.green_nodes, cfg.collar, t=t)
        targets = disc.inside & ~disc.boundary
        row = {"t": t}
        try:
            U, res = harmonic_extend(disc, datum, disc.zeta[targets], cfg.tol("extend"),
                                     exterior_points(disc))
        except ObstructedExtension as exc:
            row.update(status="obstructed", momentResidual=exc.context.get("residual"))
            rows.append(row)
            code = code or exc.exit_code
            continue
        jump = jump_check(datum)
        row.update(status="ok" if jump < cfg.tol("jump") else "jump", momentResidual=res,
                   jumpResidual=jump, samples=int(targets.sum()), file=f"extend_{i}.csv")
        if jump >= cfg.tol("jump"):
            code = code or 3
        if out is not None:
            (out / f"extend_{i}.csv").write_text(values_csv(disc.zeta[targets], disc.z2[targets], U))
        rows.append(row)
    if not rows:
        raise MissingInput("no boundary data matches a successful slice")
    report = {"command": "extend", "slices": rows,
              "extendTol": cfg.tol("extend"), "jumpTol": cfg.tol("jump")}
    if out is not None:
        (out / "extension.json").write_text(dumps(report))
    return report, code


def validate_command(family: CurveFamily, doc: dict, cfg: RunConfig, force: bool):
    report, code = {"command": "validate"}, 0
    if "moments" in cfg.stages:
        r, c = check_moments(family, cfg)
        report["moments"] = r
        code = code or c
    if "reconstruct" in cfg.stages and (code == 0 or force):
        r, c = run_sweep(family, doc, replace(cfg, output_dir=None), force, "validate")
        bad = [e["t"] for e in r["slices"] if "massBound" in e and e["massEstimate"] > e["massBound"]]
        r["massBoundViolations"] = bad
        report["reconstruct"] = r
        code = code or c or (3 if bad else 0)
    out = _outdir(cfg)
    if out is not None:
        (out / "validate.json").write_text(dumps(report))
    return report, code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(parts[0], parts[1])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--force", action="store_true", help="continue past failed moment checks")
    common.add_argument("--quadrature-n", type=int, help="boundary nodes per curve")
    common.add_argument("--kmax", type=int, help="highest power sum")
    for name in TOLERANCES:
        common.add_argument(f"--tol-{name}", type=float, metavar="X", help=f"{name} tolerance")

    p = argparse.ArgumentParser(prog="plateau", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("check-moments", parents=[common], help="moment residuals per t")
    s.add_argument("input")
    s = sub.add_parser("reconstruct", parents=[common], help="fill one slice")
    s.add_argument("input")
    s.add_argument("--t", type=float, help="slice parameter (default: first on the grid)")
    s = sub.add_parser("sweep", parents=[common], help="fill every slice and export")
    s.add_argument("input")
    s = sub.add_parser("green", parents=[common], help="Green function on one slice curve")
    s.add_argument("input")
    s.add_argument("--F", dest="F", required=True, help="defining function JSON")
    s.add_argument("--t", type=float)
    s.add_argument("--star", type=_complex, help="pole as 're,im' in z1")
    s = sub.add_parser("extend", parents=[common], help="harmonic extension of boundary data")
    s.add_argument("sweep_dir")
    s.add_argument("--F", dest="F", required=True, help="defining function JSON")
    s.add_argument("--data", required=True, help="boundary data JSON")
    s = sub.add_parser("validate", parents=[common], help="moments, reconstruction and bounds")
    s.add_argument("input")
    return p


def dispatch(args) -> tuple:
    cfg = load_config(args.config, args)
    cmd = args.command
    if cmd == "extend":
        F = DefiningFunction.load(args.F)
        return extend_command(args.sweep_dir, F, _read_json(args.data, "boundary data"), cfg)
    doc, family = _load_family(args.input, cfg)
    if cmd == "check-moments":
        report, code = check_moments(family, cfg)
        out = _outdir(cfg)
        if out is not None:
            (out / "moments.json").write_text(dumps(report))
        return report, code
    if cmd == "green":
        return green_command(family, DefiningFunction.load(args.F), cfg, args.t, args.star)
    if cmd == "validate":
        return validate_command(family, doc, cfg, args.force)
    if not args.force:
        report, code = check_moments(family, cfg)
        if code:
            report["command"] = cmd
            return report, code
    fam = _single(family, args.t) if cmd == "reconstruct" else family
    return run_sweep(fam, doc, cfg, args.force, cmd)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        report, code = dispatch(args)
    except PlateauError as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "context": {k: v for k, v in sorted(exc.context.items())}}
        code = exc.exit_code
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        code = 3
    report["exitCode"] = code
    sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
