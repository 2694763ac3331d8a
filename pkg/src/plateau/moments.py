"""Cauchy-type power-sum moments of slice curves, the moment condition on the
unbounded component, and the family integral of holomorphic test forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import (InvalidSpec, NearBoundary, OutOfRange, QuadratureFailure,
                     SingularPoint, UseAlternative)
from .geometry import (BOUNDARY, ComponentMap, CurveFamily, ParamCurve,
                       _spectral_derivative, cauchy_sum, project_z1)
from .polynomials import HolomorphicTestForm

MOMENT_TOL = 1e-6
S0_TOL = 1e-6


def _as_list(curves) -> list:
    return [curves] if isinstance(curves, ParamCurve) else list(curves)


def power_sum(curves, k: int, zeta, check: bool = True):
    """S_k(zeta) = (1/2 pi i) sum over curves of the contour integral of z2^k dz1/(z1 - zeta)."""
    if k < 0:
        raise InvalidSpec("k must be non-negative")
    zeta = np.asarray(zeta, dtype=complex)
    out = np.zeros(zeta.shape, dtype=complex)
    for c in _as_list(curves):
        p = project_z1(c)
        if check and np.any(p.distance(zeta) <= p.cutoff()):
            raise NearBoundary("evaluation point too close to the projected curve")
        out = out + cauchy_sum(p, c.nodes[:, 1] ** k, zeta)
    return out[()] if out.ndim == 0 else out


def power_sums(curves, zeta, kmax: int) -> np.ndarray:
    """All S_0..S_kmax at once; result shape (kmax+1,) + zeta.shape. No distance check."""
    zeta = np.asarray(zeta, dtype=complex)
    out = np.zeros((kmax + 1,) + zeta.shape, dtype=complex)
    for c in _as_list(curves):
        p = project_z1(c)
        dens = c.nodes[:, 1][:, None] ** np.arange(kmax + 1)[None, :]
        out += np.moveaxis(cauchy_sum(p, dens, zeta), -1, 0)
    return out


# ---------------------------------------------------------------------------
# off-grid evaluation with spectral upsampling near the contour
# ---------------------------------------------------------------------------

def _required_nodes(curve: ParamCurve, dist: np.ndarray, digits: float = 36.0) -> np.ndarray:
    # trapezoid error ~ exp(-2 pi d / h) with h the arc spacing
    speed = np.abs(project_z1(curve).velocity).mean()
    arc = speed * curve.period
    need = digits * arc / (2 * math.pi * np.maximum(dist, 1e-12))
    return need


def fiber_moments(curves, zeta, kmax: int, deriv: bool = False, max_nodes: int = 1 << 17):
    """S_0..S_kmax (and d/dzeta if asked) at arbitrary points, refining the
    contour sampling per point until the trapezoid rule is converged."""
    curves = _as_list(curves)
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    S = np.zeros((kmax + 1, zeta.size), dtype=complex)
    dS = np.zeros_like(S) if deriv else None
    for c in curves:
        # node distance overestimates the curve distance by up to half a chord
        p0 = project_z1(c.resample(4 * c.n))
        chord = 0.5 * p0.cutoff()
        lower = np.maximum(p0.distance(zeta) - 0.5 * chord, 1e-3 * chord)
        need = _required_nodes(c, lower)
        level = np.maximum(c.n, 2 ** np.ceil(np.log2(np.maximum(need, 1)))).astype(np.int64)
        level = np.minimum(level, max_nodes)
        for n in np.unique(level):
            sel = np.nonzero(level == n)[0]
            cc = c if n == c.n else c.resample(int(n))
            p = project_z1(cc)
            pw = cc.nodes[:, 1][:, None] ** np.arange(kmax + 1)[None, :]
            w = pw * (p.velocity * p.step * p.orientation / (2j * math.pi))[:, None]
            for a in range(0, sel.size, 512):
                idx = sel[a:a + 512]
                inv = 1.0 / (p.points[None, :] - zeta[idx, None])
                S[:, idx] += (inv @ w).T
                if deriv:
                    dS[:, idx] += ((inv * inv) @ w).T
    return (S, dS) if deriv else S


# ---------------------------------------------------------------------------
# moment tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MomentTable:
    cmap: ComponentMap
    kmax: int
    values: np.ndarray          # (kmax+1, ny, nx), nan on BOUNDARY points
    quadrature_n: int
    t: float = 0.0

    @property
    def empty(self) -> bool:
        return self.quadrature_n == 0

    def s0_residual(self) -> float:
        ok = self.cmap.label != BOUNDARY
        if self.empty or not ok.any():
            return 0.0
        wind = np.vectorize(self.cmap.winding.get)(self.cmap.label[ok])
        return float(np.abs(self.values[0][ok] - wind).max())


def default_kmax(cmap: ComponentMap) -> int:
    return 2 * max([abs(w) for w in cmap.winding.values()] + [0]) + 2


def build_moment_table(curves, cmap: ComponentMap, kmax: int | None = None, t: float = 0.0) -> MomentTable:
    curves = _as_list(curves)
    kmax = default_kmax(cmap) if kmax is None else int(kmax)
    dmax = max([w for j, w in cmap.winding.items() if j != 0] + [0])
    if kmax < dmax:
        raise InvalidSpec(f"kmax={kmax} is below the largest fiber degree {dmax}")
    values = np.full((kmax + 1,) + cmap.grid.shape, np.nan + 0j)
    if not curves:
        return MomentTable(cmap, kmax, values, 0, t)
    ok = cmap.label != BOUNDARY
    pts = cmap.grid.points[ok]
    for c in curves:
        p = project_z1(c)
        if pts.size and p.distance(pts).min() <= p.cutoff():
            raise NearBoundary("component map band is narrower than the quadrature cutoff")
    values[:, ok] = power_sums(curves, pts, kmax)
    table = MomentTable(cmap, kmax, values, curves[0].n, t)
    if table.s0_residual() >= S0_TOL:
        raise QuadratureFailure(f"S0 differs from the winding by {table.s0_residual():.3g}")
    return table


def moment_residual(table: MomentTable) -> float:
    """max |S_k| over the unbounded component, 1 <= k <= kmax."""
    if table.empty:
        return 0.0
    outer = table.cmap.label == 0
    if not outer.any() or table.kmax < 1:
        return 0.0
    return float(np.abs(table.values[1:, outer]).max())


# ---------------------------------------------------------------------------
# family integral of holomorphic test forms
# ---------------------------------------------------------------------------

def poincare_form(theta, t) -> np.ndarray:
    """Coefficients of P_t at theta; one real parameter only: 1/2 sign(theta - t)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if theta.size != 1 or t.size != 1:
        raise InvalidSpec("only one real parameter is supported")
    if theta[0] == t[0]:
        raise SingularPoint("Poincare form is singular at theta = t")
    return np.array([0.5 * math.copysign(1.0, theta[0] - t[0])])


def curve_integral(curve: ParamCurve, h: HolomorphicTestForm, t: float | None = None) -> complex:
    t = curve.t if t is None else t
    z1, z2 = curve.nodes[:, 0], curve.nodes[:, 1]
    v = curve.velocity
    f = h.h1(z1, z2, t) * v[:, 0] + h.h2(z1, z2, t) * v[:, 1]
    return complex(f.sum() * curve.step * curve.orientation)


def family_moment_direct(family: CurveFamily, h: HolomorphicTestForm, t: float) -> complex:
    """I(t) = sum over the slice curves at t of the integral of h."""
    i = family.index(t)
    if i is not None and not family.transverse_mask[i]:
        raise UseAlternative(f"t={t} is not a transverse parameter")
    return sum((curve_integral(c, h, t) for c in family.slice_at(t)), 0j)


@dataclass(frozen=True, eq=False)
class Sheet:
    """A piece of the surface M parametrized by (sigma, theta).

    Orientation is d theta ^ d sigma times `orientation`. Open sheets must
    have t' increasing in sigma; their end slices enter as boundary terms.
    """
    z: Callable                     # (sigma, theta) -> (z1, z2)
    tprime: Callable                # sigma -> t'
    sigma_range: tuple
    periodic: bool = False
    theta_period: float = 2 * math.pi
    orientation: int = 1
    dz_dsigma: Callable | None = None

    def _dsigma(self, s, th):
        if self.dz_dsigma is not None:
            return self.dz_dsigma(s, th)
        h = 1e-3 * (self.sigma_range[1] - self.sigma_range[0])
        f = lambda x: np.stack(self.z(x, th))
        d = (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)
        return d[0], d[1]

    def slice_integral(self, h: HolomorphicTestForm, sigma: float, n_theta: int) -> complex:
        th = np.arange(n_theta) * (self.theta_period / n_theta)
        z1, z2 = self.z(np.full(n_theta, sigma), th)
        d = _spectral_derivative(np.stack([z1, z2], axis=1), self.theta_period)
        t = float(self.tprime(sigma))
        f = h.h1(z1, z2, t) * d[:, 0] + h.h2(z1, z2, t) * d[:, 1]
        return complex(f.sum() * self.theta_period / n_theta * self.orientation)


@dataclass(frozen=True, eq=False)
class Surface:
    sheets: tuple
    t_hull: tuple


def _breakpoints(sheet: Sheet, t: float) -> list:
    a, b = sheet.sigma_range
    s = np.linspace(a, b, 2049)
    g = np.asarray(sheet.tprime(s), dtype=float) - t
    pts = [a]
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        pts.append(brentq(lambda x: float(sheet.tprime(x)) - t, s[i], s[i + 1], xtol=1e-15))
    pts.extend(float(s[i]) for i in np.nonzero(g == 0)[0] if a < s[i] < b)
    pts.append(b)
    return sorted(set(pts))


def family_moment_poincare(surface: Surface, h: HolomorphicTestForm, t: float,
                           n_sigma: int = 48, n_theta: int = 128) -> complex:
    """Surface integral of dh against 1/2 sign(t' - t), plus end-slice terms of open sheets."""
    lo, hi = surface.t_hull
    if not lo <= t <= hi:
        raise OutOfRange(f"t={t} outside [{lo}, {hi}]")
    g = h.dh()
    x, w = np.polynomial.legendre.leggauss(n_sigma)
    th = np.arange(n_theta) * (2 * math.pi / n_theta)
    total = 0j
    for sh in surface.sheets:
        th_s = th * (sh.theta_period / (2 * math.pi))
        dth = sh.theta_period / n_theta
        bps = _breakpoints(sh, t)
        for s0, s1 in zip(bps[:-1], bps[1:]):
            if s1 - s0 <= 0:
                continue
            sig = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x
            S, TH = np.meshgrid(sig, th_s, indexing="ij")
            z1, z2 = sh.z(S, TH)
            dth_z = _spectral_derivative(np.stack([z1.T, z2.T], axis=1), sh.theta_period)
            z1t, z2t = dth_z[:, 0].T, dth_z[:, 1].T
            z1s, z2s = sh._dsigma(S, TH)
            tp = np.asarray(sh.tprime(sig), dtype=float)
            pull = z1t * z2s - z1s * z2t
            gv = np.stack([g(z1[i], z2[i], float(tp[i])) for i in range(len(sig))])
            sign = np.sign(tp - t)[:, None]
            integrand = gv * pull * 0.5 * sign
            total += sh.orientation * (integrand.sum(axis=1) * dth) @ (0.5 * (s1 - s0) * w)
        if not sh.periodic:
            a, b = sh.sigma_range
            total += 0.5 * (sh.slice_integral(h, a, n_theta) + sh.slice_integral(h, b, n_theta))
    return complex(total)


def surface_from_family(family: CurveFamily) -> Surface:
    """Sheets for the t-polynomial curve entries of a family (sigma = t)."""
    if not family.specs:
        raise InvalidSpec("family has no continuous sheets")
    sheets = []
    for spec, o, (lo, hi) in family.specs:
        def z(s, th, spec=spec):
            s = np.asarray(s, float)
            th = np.asarray(th, float)
            out1 = np.zeros(np.broadcast(s, th).shape, complex)
            out2 = np.zeros_like(out1)
            for sv in np.unique(s):
                m = np.broadcast_to(s == sv, out1.shape)
                a, b = spec.evaluate(np.broadcast_to(th, out1.shape)[m], float(sv))
                out1[m], out2[m] = a, b
            return out1, out2

        def dz(s, th, spec=spec):
            s = np.asarray(s, float)
            th = np.asarray(th, float)
            out1 = np.zeros(np.broadcast(s, th).shape, complex)
            out2 = np.zeros_like(out1)
            for sv in np.unique(s):
                m = np.broadcast_to(s == sv, out1.shape)
                a, b = spec.dt(np.broadcast_to(th, out1.shape)[m], float(sv))
                out1[m], out2[m] = a, b
            return out1, out2

        sheets.append(Sheet(z, lambda s: np.asarray(s, float), (lo, hi), False,
                            spec.period, o, dz))
    return Surface(tuple(sheets), (float(family.t_grid[0]), float(family.t_grid[-1])))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def table_rows(table: MomentTable):
    """CSV lines: re_zeta, im_zeta, component, k, re_S, im_S over labelled points."""
    f = lambda x: format(float(x), ".17g")
    yield "re_zeta,im_zeta,component,k,re_S,im_S"
    if table.empty:
        return
    rows, cols = np.nonzero(table.cmap.label != BOUNDARY)
    for r, c in zip(rows, cols):
        z = table.cmap.grid.points[r, c]
        j = int(table.cmap.label[r, c])
        for k in range(table.kmax + 1):
            s = table.values[k, r, c]
            yield ",".join([f(z.real), f(z.imag), str(j), str(k), f(s.real), f(s.imag)])


def table_to_json(table: MomentTable) -> dict:
    ok = table.cmap.label != BOUNDARY
    return {"t": float(table.t), "kMax": int(table.kmax), "quadratureN": int(table.quadrature_n),
            "grid": table.cmap.grid.to_json(),
            "label": table.cmap.label.tolist(),
            "winding": {str(j): int(w) for j, w in sorted(table.cmap.winding.items())},
            "values": [[[float(v.real), float(v.imag)] for v in table.values[k][ok]]
                       for k in range(table.kmax + 1)] if not table.empty else []}
