"""Closed curves in C^2, their z1-projections, winding numbers and the
component decomposition of the projection complement."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import (InvalidSpec, NearBoundary, ParseError,
                     QuadratureFailure, ResolutionTooCoarse)

TWO_PI = 2.0 * math.pi
BOUNDARY = -1
MIN_NODES = 16
WINDING_WARN = 1e-6     # rounding residual expected at default resolution
WINDING_FAIL = 1e-3     # rounding residual that aborts


# ---------------------------------------------------------------------------
# Fourier-Laurent curve descriptions
# ---------------------------------------------------------------------------

def _tpoly_eval(coeffs: np.ndarray, t: float) -> complex:
    # coeffs[m] multiplies t**m
    out = 0j
    for c in coeffs[::-1]:
        out = out * t + c
    return complex(out)


def _tpoly_deriv(coeffs: np.ndarray) -> np.ndarray:
    if len(coeffs) <= 1:
        return np.zeros(1, dtype=complex)
    return coeffs[1:] * np.arange(1, len(coeffs))


@dataclass(frozen=True)
class CurveSpec:
    """z1(theta), z2(theta) as finite sums of c_q(t) e^{i q theta}.

    Degrees q may be fractional as long as q * cover is an integer, so the
    curve closes after theta runs over [0, 2 pi cover).
    """
    z1: dict
    z2: dict
    cover: int = 1

    def __post_init__(self):
        if int(self.cover) != self.cover or self.cover < 1:
            raise InvalidSpec(f"cover must be a positive integer, got {self.cover}")
        for name, terms in (("z1", self.z1), ("z2", self.z2)):
            for q, c in terms.items():
                if (Fraction(q) * self.cover).denominator != 1:
                    raise InvalidSpec(f"{name}: degree {q} is not a multiple of 1/{self.cover}")
                if not np.all(np.isfinite(np.asarray(c, dtype=complex))):
                    raise InvalidSpec(f"{name}: non-finite coefficient at degree {q}")

    @property
    def period(self) -> float:
        return TWO_PI * self.cover

    @property
    def t_dependent(self) -> bool:
        return any(len(c) > 1 for terms in (self.z1, self.z2) for c in terms.values())

    def bandwidth(self) -> float:
        qs = [abs(Fraction(q)) * self.cover for terms in (self.z1, self.z2) for q in terms]
        return float(max(qs, default=0))

    def _table(self, which: str, t: float, order_t: int):
        cache = self.__dict__.setdefault("_cache", {})
        key = (which, float(t), order_t)
        if key not in cache:
            terms = self.z1 if which == "z1" else self.z2
            qs, cs = [], []
            for q, c in terms.items():
                cc = np.asarray(c, dtype=complex)
                for _ in range(order_t):
                    cc = _tpoly_deriv(cc)
                a = _tpoly_eval(cc, t)
                if a != 0:
                    qs.append(float(Fraction(q)))
                    cs.append(a)
            cache[key] = (np.array(qs), np.array(cs, dtype=complex))
        return cache[key]

    def _sum(self, which, theta, t, order_theta=0, order_t=0):
        theta = np.asarray(theta, dtype=float)
        q, a = self._table(which, t, order_t)
        flat = theta.reshape(-1)
        out = np.zeros(flat.shape, dtype=complex)
        if len(q):
            coef = a * (1j * q) ** order_theta
            for s in range(0, flat.size, 8192):
                out[s:s + 8192] = np.exp(1j * np.multiply.outer(flat[s:s + 8192], q)) @ coef
        return out.reshape(theta.shape)

    def on_grid(self, n: int, t: float = 0.0, order: int = 0):
        """(z1, z2) or theta-derivatives at theta_l = l * period / n, by inverse FFT
        with frequencies folded modulo n (exact at the grid points)."""
        out = []
        for which in ("z1", "z2"):
            q, a = self._table(which, t, 0)
            spec = np.zeros(n, dtype=complex)
            if len(q):
                freq = np.rint(q * self.cover).astype(np.int64)
                np.add.at(spec, freq % n, a * (1j * q) ** order)
            out.append(np.fft.ifft(spec) * n)
        return out[0], out[1]

    def evaluate(self, theta, t: float = 0.0):
        return self._sum("z1", theta, t), self._sum("z2", theta, t)

    def dtheta(self, theta, t: float = 0.0, order: int = 1):
        return (self._sum("z1", theta, t, order_theta=order),
                self._sum("z2", theta, t, order_theta=order))

    def dt(self, theta, t: float = 0.0):
        return (self._sum("z1", theta, t, order_t=1),
                self._sum("z2", theta, t, order_t=1))

    def at(self, t: float) -> "CurveSpec":
        """Freeze the t-dependence."""
        fz = lambda terms: {q: np.array([_tpoly_eval(np.asarray(c, complex), t)])
                            for q, c in terms.items()}
        return CurveSpec(fz(self.z1), fz(self.z2), self.cover)

    def shifted(self, dz2: complex = 0.0, scale2: complex = 1.0) -> "CurveSpec":
        z2 = {q: np.asarray(c, complex) * scale2 for q, c in self.z2.items()}
        if dz2:
            key = Fraction(0)
            base = np.asarray(z2.get(key, np.zeros(1)), complex).copy()
            base[0] += dz2
            z2[key] = base
        return CurveSpec(dict(self.z1), z2, self.cover)


def _parse_coeff(value, where: str) -> np.ndarray:
    if isinstance(value, dict):
        if "t_poly" in value:
            rows = value["t_poly"]
            return np.array([complex(r[0], r[1]) for r in rows], dtype=complex)
        re = list(value.get("re", [0.0]))
        im = list(value.get("im", [0.0]))
        n = max(len(re), len(im))
        re += [0.0] * (n - len(re))
        im += [0.0] * (n - len(im))
        return np.array(re, float) + 1j * np.array(im, float)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return np.array([complex(value[0], value[1])])
    if isinstance(value, (int, float)):
        return np.array([complex(value)])
    raise ParseError(f"{where}: cannot read coefficient {value!r}")


def _parse_degree(key: str, where: str) -> Fraction:
    try:
        return Fraction(key.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: bad Fourier-Laurent degree {key!r}") from None


def parse_curve_spec(entry: dict, where: str = "curve") -> CurveSpec:
    try:
        cover = int(entry.get("cover", 1))
        terms = []
        for name in ("z1", "z2"):
            block = entry[name]
            coeffs = block["coeffs"] if isinstance(block, dict) and "coeffs" in block else block
            terms.append({_parse_degree(k, f"{where}.{name}"): _parse_coeff(v, f"{where}.{name}[{k}]")
                          for k, v in coeffs.items()})
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"{where}: malformed curve entry ({exc})") from None
    return CurveSpec(terms[0], terms[1], cover)


def curve_spec_to_json(spec: CurveSpec) -> dict:
    def enc(terms):
        out = {}
        for q in sorted(terms):
            c = np.asarray(terms[q], complex)
            key = str(q)
            if len(c) == 1:
                out[key] = [c[0].real, c[0].imag]
            else:
                out[key] = {"re": list(c.real), "im": list(c.imag)}
        return {"coeffs": out}
    return {"cover": spec.cover, "z1": enc(spec.z1), "z2": enc(spec.z2)}


# ---------------------------------------------------------------------------
# sampled curves
# ---------------------------------------------------------------------------

def _spectral_derivative(values: np.ndarray, period: float) -> np.ndarray:
    n = values.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n) * (TWO_PI / period)
    if n % 2 == 0:
        k[n // 2] = 0.0
    f = np.fft.fft(values, axis=0)
    shape = (n,) + (1,) * (values.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * f, axis=0)


def _fourier_resample(values: np.ndarray, m: int) -> np.ndarray:
    n = values.shape[0]
    if m == n:
        return values.copy()
    f = np.fft.fft(values, axis=0)
    g = np.zeros((m,) + values.shape[1:], dtype=complex)
    h = min(n, m) // 2
    g[:h] = f[:h]
    g[-h:] = f[-h:]
    return np.fft.ifft(g, axis=0) * (m / n)


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """A closed oriented curve in C^2 sampled at equispaced parameters."""
    nodes: np.ndarray
    params: np.ndarray
    closed: bool = True
    orientation: int = 1
    source: CurveSpec | None = None
    t: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        params = np.asarray(self.params, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "params", params)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise InvalidSpec("nodes must have shape (N, 2)")
        if len(nodes) != len(params) or len(nodes) < MIN_NODES:
            raise InvalidSpec(f"need at least {MIN_NODES} nodes matching params")
        if np.any(np.diff(params) <= 0):
            raise InvalidSpec("params must be strictly increasing")
        if self.orientation not in (-1, 1):
            raise InvalidSpec("orientation must be +1 or -1")
        if not self.closed:
            raise InvalidSpec("only closed curves are supported")
        if self.source is not None:
            end = np.array(self.source.evaluate(np.array([self.source.period]), self.t)).ravel()
            if np.max(np.abs(end - nodes[0])) > 1e-12 * max(1.0, np.abs(nodes).max()):
                raise InvalidSpec("curve coefficients are not periodic over the cover")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def period(self) -> float:
        return self.source.period if self.source is not None else TWO_PI * self.cover

    @property
    def cover(self) -> int:
        return self.source.cover if self.source is not None else 1

    @property
    def step(self) -> float:
        return self.period / self.n

    @cached_property
    def velocity(self) -> np.ndarray:
        """d(nodes)/d(theta), exact for specs, spectral otherwise."""
        if self.source is not None:
            if np.array_equal(self.params, np.arange(self.n) * (self.period / self.n)):
                return np.stack(self.source.on_grid(self.n, self.t, 1), axis=1)
            return np.stack(self.source.dtheta(self.params, self.t), axis=1)
        return _spectral_derivative(self.nodes, self.period)

    def length(self) -> float:
        speed = np.sqrt(np.sum(np.abs(self.velocity) ** 2, axis=1))
        return float(speed.sum() * self.step)

    def reversed(self) -> "ParamCurve":
        return ParamCurve(self.nodes, self.params, True, -self.orientation, self.source, self.t)

    def resample(self, n: int) -> "ParamCurve":
        if self.source is not None:
            return sample_curve(self.source, n, t=self.t, orientation=self.orientation)
        nodes = _fourier_resample(self.nodes, n)
        params = np.arange(n) * (self.period / n)
        return ParamCurve(nodes, params, True, self.orientation, None, self.t)

    def z_at(self, theta, order: int = 0):
        """(z1, z2) or their theta-derivatives at arbitrary parameters: the
        CurveSpec if known, else trigonometric interpolation."""
        theta = np.asarray(theta, dtype=float)
        if self.source is not None:
            if order == 0:
                return self.source.evaluate(theta, self.t)
            return self.source.dtheta(theta, self.t, order)
        n = self.n
        f = np.fft.fft(self.nodes, axis=0) / n
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            f[n // 2] *= 0.5
            f = np.concatenate([f, f[n // 2:n // 2 + 1]])
            k = np.concatenate([k, [n // 2]])
        w = TWO_PI / self.period
        f = f * ((1j * k * w) ** order)[:, None]
        e = np.exp(1j * np.multiply.outer(theta, k) * w)
        out = e @ f
        return out[..., 0], out[..., 1]

    def max_radius(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.nodes) ** 2, axis=1)).max())


def sample_curve(spec: CurveSpec, n: int, t: float = 0.0, orientation: int = 1) -> ParamCurve:
    """Sample a Fourier-Laurent CurveSpec at n equispaced parameters."""
    if n < MIN_NODES or n & (n - 1):
        raise InvalidSpec(f"node count must be a power of two >= {MIN_NODES}, got {n}")
    if not math.isfinite(t):
        raise InvalidSpec("non-finite parameter t")
    frozen = spec.at(t) if spec.t_dependent else spec
    theta = np.arange(n) * (frozen.period / n)
    z1, z2 = frozen.on_grid(n)
    return ParamCurve(np.stack([z1, z2], axis=1), theta, True, orientation, frozen, t)


# ---------------------------------------------------------------------------
# projection and winding
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PlanarCurve:
    points: np.ndarray
    velocity: np.ndarray
    params: np.ndarray
    period: float
    orientation: int = 1

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def step(self) -> float:
        return self.period / self.n

    def cutoff(self) -> float:
        """Twice the largest chord between consecutive nodes."""
        p = self.points
        return 2.0 * float(np.abs(np.roll(p, -1) - p).max())

    def distance(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.reshape(-1)
        out = np.empty(flat.shape)
        for a in range(0, flat.size, 4096):
            out[a:a + 4096] = np.abs(flat[a:a + 4096, None] - self.points[None, :]).min(axis=1)
        return out.reshape(zeta.shape)


def project_z1(curve: ParamCurve) -> PlanarCurve:
    return PlanarCurve(curve.nodes[:, 0].copy(), curve.velocity[:, 0].copy(),
                       curve.params, curve.period, curve.orientation)


def cauchy_sum(planar: PlanarCurve, density: np.ndarray, zeta) -> np.ndarray:
    """(1/2 pi i) * trapezoid of density * dz / (z - zeta), oriented."""
    zeta = np.asarray(zeta, dtype=complex)
    flat = zeta.reshape(-1)
    vel = planar.velocity if density.ndim == 1 else planar.velocity[:, None]
    w = density * vel * (planar.step * planar.orientation / (2j * math.pi))
    out = np.empty(flat.shape + density.shape[1:], dtype=complex)
    for a in range(0, flat.size, 2048):
        d = planar.points[None, :] - flat[a:a + 2048, None]
        if density.ndim == 1:
            out[a:a + 2048] = (w[None, :] / d).sum(axis=1)
        else:
            out[a:a + 2048] = np.einsum("pn,nk->pk", 1.0 / d, w)
    return out.reshape(zeta.shape + density.shape[1:])


def winding_number(planar: PlanarCurve, zeta, cutoff: float | None = None,
                   return_residual: bool = False):
    """Index of the planar closed curve around zeta (scalar or array)."""
    cutoff = planar.cutoff() if cutoff is None else cutoff
    zeta_arr = np.asarray(zeta, dtype=complex)
    if np.any(planar.distance(zeta_arr) <= cutoff):
        raise NearBoundary(f"point within {cutoff:.3g} of the curve")
    raw = cauchy_sum(planar, np.ones(planar.n, dtype=complex), zeta_arr)
    wn = np.rint(raw.real)
    residual = np.abs(raw - wn)
    if np.any(residual >= WINDING_FAIL):
        raise QuadratureFailure(f"winding residual {residual.max():.3g}")
    wn = wn.astype(int)
    if zeta_arr.ndim == 0:
        wn, residual = int(wn), float(residual)
    return (wn, residual) if return_residual else wn


# ---------------------------------------------------------------------------
# zeta grids and component maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZetaGrid:
    x: np.ndarray
    y: np.ndarray

    @classmethod
    def from_bounds(cls, xmin, xmax, ymin, ymax, nx=64, ny=None) -> "ZetaGrid":
        ny = nx if ny is None else ny
        return cls(np.linspace(xmin, xmax, nx), np.linspace(ymin, ymax, ny))

    @classmethod
    def around(cls, planars: Sequence[PlanarCurve], n: int = 64, margin: float = 0.25) -> "ZetaGrid":
        pts = np.concatenate([p.points for p in planars])
        cx = 0.5 * (pts.real.max() + pts.real.min())
        cy = 0.5 * (pts.imag.max() + pts.imag.min())
        half = 0.5 * max(np.ptp(pts.real), np.ptp(pts.imag)) * (1 + margin)
        half = max(half, 1e-6)
        return cls.from_bounds(cx - half, cx + half, cy - half, cy + half, n)

    @property
    def shape(self):
        return (len(self.y), len(self.x))

    @property
    def step(self) -> float:
        return float(max(np.diff(self.x).max(), np.diff(self.y).max()))

    @cached_property
    def points(self) -> np.ndarray:
        return self.x[None, :] + 1j * self.y[:, None]

    def to_json(self) -> dict:
        return {"x": [float(self.x[0]), float(self.x[-1]), len(self.x)],
                "y": [float(self.y[0]), float(self.y[-1]), len(self.y)]}


@dataclass(frozen=True, eq=False)
class ComponentMap:
    grid: ZetaGrid
    label: np.ndarray           # (ny, nx), BOUNDARY or component id
    winding: dict               # component id -> int
    cutoffs: tuple
    residual: float             # worst winding rounding residual seen

    @property
    def n_components(self) -> int:
        return len(self.winding)

    def bounded(self):
        return [j for j in sorted(self.winding) if j != 0]

    def mask(self, j: int) -> np.ndarray:
        return self.label == j


def boundary_mask(planars: Sequence[PlanarCurve], grid: ZetaGrid, cutoffs=None) -> np.ndarray:
    cutoffs = [p.cutoff() for p in planars] if cutoffs is None else cutoffs
    mask = np.zeros(grid.shape, dtype=bool)
    for p, c in zip(planars, cutoffs):
        mask |= p.distance(grid.points) <= c
    return mask


def total_winding(planars: Sequence[PlanarCurve], zeta, cutoffs=None, return_residual=False):
    zeta = np.asarray(zeta, dtype=complex)
    raw = np.zeros(zeta.shape, dtype=complex)
    for i, p in enumerate(planars):
        c = p.cutoff() if cutoffs is None else cutoffs[i]
        if np.any(p.distance(zeta) <= c):
            raise NearBoundary("representative point too close to a curve")
        raw = raw + cauchy_sum(p, np.ones(p.n, dtype=complex), zeta)
    wn = np.rint(raw.real)
    res = np.abs(raw - wn)
    if np.any(res >= WINDING_FAIL):
        raise QuadratureFailure(f"winding residual {res.max():.3g}")
    wn = wn.astype(int)
    return (wn, res) if return_residual else wn


def classify_components(planars: Sequence[PlanarCurve], grid: ZetaGrid,
                        cutoffs=None, seed: int = 0) -> ComponentMap:
    """Flood-fill the non-boundary grid points and attach a winding to each piece."""
    planars = list(planars)
    cutoffs = tuple(p.cutoff() for p in planars) if cutoffs is None else tuple(cutoffs)
    if not planars:
        return ComponentMap(grid, np.zeros(grid.shape, int), {0: 0}, (), 0.0)
    near = boundary_mask(planars, grid, cutoffs)
    four = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    raw, count = ndimage.label(~near, structure=four)

    edge = np.unique(np.concatenate([raw[0], raw[-1], raw[:, 0], raw[:, -1]]))
    edge = edge[edge > 0]
    if len(edge) != 1:
        raise ResolutionTooCoarse("grid must enclose the curves with a connected margin")
    outer = int(edge[0])

    rng = np.random.default_rng(seed)
    label = np.full(grid.shape, BOUNDARY, dtype=int)
    winding = {}
    worst = 0.0
    next_id = 1
    for r in range(1, count + 1):
        rows, cols = np.nonzero(raw == r)
        pick = [0] + list(rng.choice(len(rows), size=min(3, len(rows)), replace=False))
        pts = grid.points[rows[pick], cols[pick]]
        wn, res = total_winding(planars, pts, cutoffs, return_residual=True)
        worst = max(worst, float(res.max()))
        if np.any(wn != wn[0]):
            raise ResolutionTooCoarse(f"winding varies inside one component: {sorted(set(wn.tolist()))}")
        cid = 0 if r == outer else next_id
        if r != outer:
            next_id += 1
        label[rows, cols] = cid
        winding[cid] = int(wn[0])
    if winding[0] != 0:
        raise ResolutionTooCoarse("outer component has nonzero winding; enlarge the grid")
    return ComponentMap(grid, label, winding, cutoffs, worst)


# ---------------------------------------------------------------------------
# families of slices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurveFamily:
    t_grid: np.ndarray
    slices: tuple                   # tuple of tuples of ParamCurve
    transverse_mask: np.ndarray
    specs: tuple = ()               # (CurveSpec, orientation, t_range) for continuous sheets
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        tg = np.asarray(self.t_grid, dtype=float)
        object.__setattr__(self, "t_grid", tg)
        object.__setattr__(self, "transverse_mask", np.asarray(self.transverse_mask, dtype=bool))
        if np.any(np.diff(tg) <= 0):
            raise InvalidSpec("tGrid must be strictly increasing")
        if len(self.slices) != len(tg) or len(self.transverse_mask) != len(tg):
            raise InvalidSpec("slices and transverseMask must align with tGrid")

    def index(self, t: float) -> int | None:
        hits = np.nonzero(np.isclose(self.t_grid, t, rtol=0, atol=1e-12))[0]
        return int(hits[0]) if len(hits) else None

    def slice_at(self, t: float) -> tuple:
        i = self.index(t)
        if i is not None:
            return self.slices[i]
        n = self.slices[0][0].n if any(self.slices) and self.slices[0] else 256
        return tuple(sample_curve(s, n, t=t, orientation=o) for s, o, rng in self.specs
                     if rng[0] <= t <= rng[1])

    def resampled(self, n: int) -> "CurveFamily":
        slices = tuple(tuple(c.resample(n) for c in sl) for sl in self.slices)
        return CurveFamily(self.t_grid, slices, self.transverse_mask, self.specs, self.name, self.meta)


def family_from_json(doc: dict, n: int = 256, degenerate_length: float = 1e-3) -> CurveFamily:
    """Build a CurveFamily from the JSON interchange document."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if int(doc.get("n", 1)) != 1:
        raise InvalidSpec("only one real parameter (n = 1) is supported")
    try:
        t_grid = np.array([float(t) for t in doc["tGrid"]])
        entries = list(doc["curves"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed tGrid/curves ({exc})") from None
    if len(t_grid) == 0:
        raise ParseError("empty tGrid")
    nontransverse = {float(t) for t in doc.get("nonTransverse", [])}

    per_t = [[] for _ in t_grid]
    sheets = []
    for i, e in enumerate(entries):
        where = f"curves[{i}]"
        spec = parse_curve_spec(e, where)
        o = int(e.get("orientation", 1))
        if o not in (-1, 1):
            raise ParseError(f"{where}: orientation must be +1 or -1")
        if "t" in e:
            t = float(e["t"])
            hits = np.nonzero(np.isclose(t_grid, t, rtol=0, atol=1e-12))[0]
            if not len(hits):
                raise ParseError(f"{where}: t={t} is not on tGrid")
            per_t[hits[0]].append(sample_curve(spec, n, t=float(t_grid[hits[0]]), orientation=o))
        else:
            lo, hi = e.get("tRange", [float(t_grid[0]), float(t_grid[-1])])
            sheets.append((spec, o, (float(lo), float(hi))))
            for k, t in enumerate(t_grid):
                if lo - 1e-12 <= t <= hi + 1e-12:
                    per_t[k].append(sample_curve(spec, n, t=float(t), orientation=o))

    slices, mask = [], []
    for t, curves in zip(t_grid, per_t):
        total = sum(c.length() for c in curves)
        degenerate = bool(curves) and total < degenerate_length
        slices.append(tuple(curves))
        mask.append(not degenerate and float(t) not in nontransverse)
    return CurveFamily(t_grid, tuple(slices), np.array(mask), tuple(sheets),
                       str(doc.get("name", "")), {k: doc[k] for k in ("testForms",) if k in doc})


def load_family(path, n: int = 256) -> CurveFamily:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return family_from_json(doc, n)
