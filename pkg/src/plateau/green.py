"""Integral machinery on a complex curve {F_t = 0} in C^2: Hefer divided
differences, the Cauchy-type kernel, a dbar-solver, the Green function,
Cauchy data and the harmonic extension of boundary values."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .errors import (DegenerateParametrization, InvalidSpec, MissingInput,
                     ObstructedExtension, ParseError, SingularPoint,
                     SingularPointOfCurve, UseAlternative)
from .geometry import (TWO_PI, ParamCurve, _fourier_resample, _spectral_derivative,
                       project_z1)
from .polynomials import BiPoly, bipoly_from_json

SINGULAR_GRAD = 1e-10
EXTEND_TOL = 1e-3
COLLAR = 1.1


# ---------------------------------------------------------------------------
# defining functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DefiningFunction:
    """F(t; z1, z2) = sum c[m, i, j] t^m z1^i z2^j."""
    poly: BiPoly

    @classmethod
    def from_json(cls, doc) -> "DefiningFunction":
        if not isinstance(doc, dict) or "coeffs" not in doc:
            raise ParseError("defining function needs a 'coeffs' list")
        poly = bipoly_from_json(doc["coeffs"], "coeffs")
        d1, d2 = poly.degrees
        if "d1" in doc and d1 > int(doc["d1"]) or "d2" in doc and d2 > int(doc["d2"]):
            raise InvalidSpec("coefficient exponents exceed the declared degrees")
        return cls(poly)

    @classmethod
    def load(cls, path) -> "DefiningFunction":
        p = Path(path)
        if not p.exists():
            raise MissingInput(f"no such file: {p}")
        try:
            return cls.from_json(json.loads(p.read_text()))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None

    def to_json(self) -> dict:
        d1, d2 = self.poly.degrees
        return {"d1": d1, "d2": d2, "coeffs": self.poly.to_terms()}

    def __call__(self, z1, z2, t: float = 0.0):
        return self.poly(z1, z2, t)

    def grad(self, z1, z2, t: float = 0.0):
        return self.poly.d1()(z1, z2, t), self.poly.d2()(z1, z2, t)

    def graph_slope(self, t: float = 0.0):
        """a if F = a z2 + f(z1) with constant a != 0, else None."""
        c = self.poly.at(t)
        if c.shape[1] < 2 or c.shape[1] > 2 and np.any(c[:, 2:] != 0):
            return None
        if np.any(c[1:, 1] != 0) or c[0, 1] == 0:
            return None
        return complex(c[0, 1])

    def solve_z2(self, z1, t: float = 0.0, ref=None):
        """Point of the curve above z1: direct for graphs, else the root of
        F(z1, .) nearest to ref."""
        z1 = np.asarray(z1, dtype=complex)
        a = self.graph_slope(t)
        if a is not None:
            return -self(z1, 0.0, t) / a
        if ref is None:
            raise UseAlternative("a reference z2 is needed off graph-type curves")
        c = self.poly.at(t)
        out = np.empty(z1.shape, dtype=complex)
        ref = np.broadcast_to(np.asarray(ref, complex), z1.shape)
        for k, (x, r) in enumerate(zip(z1.ravel(), ref.ravel())):
            coeffs = np.array([np.polyval(c[::-1, j], x) for j in range(c.shape[1])])[::-1]
            roots = np.roots(coeffs)
            out.flat[k] = roots[np.argmin(np.abs(roots - r))] if len(roots) else np.nan
        return out


# ---------------------------------------------------------------------------
# Hefer decomposition and kernels
# ---------------------------------------------------------------------------

def _complete_h(x, y, m: int):
    """h_m(x, y) = sum_{p+q=m} x^p y^q, with h_{-1} = 0."""
    x, y = np.broadcast_arrays(np.asarray(x, complex), np.asarray(y, complex))
    if m < 0:
        return np.zeros(x.shape, complex)
    out = np.zeros(x.shape, complex)
    xp = np.ones(x.shape, complex)
    for p in range(m + 1):
        out = out + xp * y ** (m - p)
        xp = xp * x
    return out


def hefer(F: DefiningFunction, t: float, zp, z):
    """Q with F(z') - F(z) = Q1 (z1' - z1) + Q2 (z2' - z2), by exact divided
    differences of monomials (no cancellation as z' -> z)."""
    a = F.poly.at(t)
    z1p, z2p = (np.asarray(v, complex) for v in zp)
    z1, z2 = (np.asarray(v, complex) for v in z)
    shape = np.broadcast(z1p, z2p, z1, z2).shape
    Q1 = np.zeros(shape, complex)
    Q2 = np.zeros(shape, complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            c = a[i, j]
            if c == 0:
                continue
            if i:
                Q1 = Q1 + c * z2p ** j * _complete_h(z1p, z1, i - 1)
            if j:
                Q2 = Q2 + c * z1 ** i * _complete_h(z2p, z2, j - 1)
    return Q1, Q2


def omega_form(F: DefiningFunction, t: float, z):
    """(chart, coefficient): -dz1/F_z2 on chart 1, dz2/F_z1 on chart 2."""
    F1, F2 = F.grad(z[0], z[1], t)
    F1, F2 = np.asarray(F1), np.asarray(F2)
    if np.any(np.maximum(np.abs(F1), np.abs(F2)) < SINGULAR_GRAD):
        raise SingularPointOfCurve("both partial derivatives vanish")
    chart = np.where(np.abs(F2) >= np.abs(F1), 1, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(chart == 1, -1.0 / F2, 1.0 / F1)
    if chart.ndim == 0:
        return int(chart), complex(coef)
    return chart, coef


def kernel_k(F: DefiningFunction, t: float, zp, z):
    """det[beta(z', z), Q(z', z)] with beta = conj(z' - z) / |z' - z|^2."""
    z1p, z2p = (np.asarray(v, complex) for v in zp)
    z1, z2 = (np.asarray(v, complex) for v in z)
    d1, d2 = z1p - z1, z2p - z2
    n2 = np.abs(d1) ** 2 + np.abs(d2) ** 2
    if np.any(n2 == 0):
        raise SingularPoint("kernel evaluated at coincident points")
    Q1, Q2 = hefer(F, t, zp, z)
    return (np.conj(d1) * Q2 - np.conj(d2) * Q1) / n2


# ---------------------------------------------------------------------------
# lattice discretization of the curve piece
# ---------------------------------------------------------------------------

def _inside(planar, zeta):
    # winding of the projected curve, in chunks
    wn = np.zeros(zeta.shape)
    w = planar.velocity * planar.step * planar.orientation / (2j * math.pi)
    for a in range(0, zeta.size, 4096):
        d = planar.points[None, :] - zeta[a:a + 4096, None]
        wn[a:a + 4096] = ((w[None, :] / d).sum(axis=1)).real
    return np.rint(wn) != 0


@dataclass(frozen=True, eq=False)
class CurveDiscretization:
    F: DefiningFunction
    t: float
    curve: ParamCurve            # the boundary gamma = M_t
    h: float
    ij: np.ndarray               # (N, 2) lattice (row, col)
    shape: tuple                 # lattice (m, m)
    origin: complex              # zeta of lattice index (0, 0)
    zeta: np.ndarray             # (N,) chart-1 coordinate z1
    z2: np.ndarray               # (N,)
    coef: np.ndarray             # (N,) omega coefficient on chart 1: -1/F_z2
    chart: np.ndarray            # (N,) dominant chart 1 or 2
    weight: np.ndarray           # (N,) |coef|^2 h^2, the measure (i/2) omega ^ omega-bar
    boundary: np.ndarray         # (N,) outermost lattice ring of the collar
    inside: np.ndarray           # (N,) inside gamma
    slope: complex | None        # graph slope when F = a z2 + f(z1)

    @property
    def n(self) -> int:
        return len(self.zeta)

    @property
    def nodes(self) -> np.ndarray:
        return np.stack([self.zeta, self.z2], axis=1)

    def distance_to_curve(self, zeta=None) -> np.ndarray:
        zeta = self.zeta if zeta is None else np.asarray(zeta, complex)
        return project_z1(self.curve.resample(max(self.curve.n, 1024))).distance(zeta)

    def nearest(self, zeta) -> int:
        return int(np.argmin(np.abs(self.zeta - zeta)))

    @classmethod
    def build(cls, F: DefiningFunction, curve: ParamCurve, n_target: int = 10000,
              collar: float = COLLAR, t: float | None = None) -> "CurveDiscretization":
        """Square lattice in z1 clipped to gamma dilated by collar about its centroid."""
        t = curve.t if t is None else float(t)
        planar = project_z1(curve)
        center = complex(planar.points.mean())
        grown = project_z1(curve)
        grown = type(grown)(center + collar * (grown.points - center), collar * grown.velocity,
                            grown.params, grown.period, grown.orientation)
        ext = np.abs(grown.points - center).max()
        area_box = (2 * ext) ** 2
        area = abs(0.5 * np.sum((np.conj(grown.points) * grown.velocity).imag) * grown.step)
        m = int(math.ceil(math.sqrt(n_target * area_box / max(area, 1e-300))))
        h = 2 * ext / m
        x = (np.arange(m) - (m - 1) / 2) * h
        rows, cols = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        zeta = (center.real + x[cols] + 1j * (center.imag + x[rows])).ravel()
        keep = _inside(grown, zeta)
        ij = np.stack([rows.ravel(), cols.ravel()], axis=1)[keep]
        zeta = zeta[keep]
        ref = None
        if F.graph_slope(t) is None:
            near = np.abs(zeta[:, None] - planar.points[None, :]).argmin(axis=1)
            ref = curve.nodes[near, 1]
        z2 = F.solve_z2(zeta, t, ref)
        resid = np.abs(F(zeta, z2, t))
        if np.any(resid > 1e-8 * (1 + np.abs(zeta) + np.abs(z2)) ** max(F.poly.total_degree, 1)):
            raise InvalidSpec("lattice node does not lie on the curve")
        F1, F2 = F.grad(zeta, z2, t)
        if np.any(np.maximum(np.abs(F1), np.abs(F2)) < SINGULAR_GRAD):
            raise SingularPointOfCurve("singular point inside the discretized piece")
        if np.any(np.abs(F2) < SINGULAR_GRAD):
            raise UseAlternative("the z1-lattice needs dF/dz2 != 0 on the whole piece")
        coef = -1.0 / F2
        chart = np.where(np.abs(F2) >= np.abs(F1), 1, 2)
        occupied = np.zeros((m, m), bool)
        occupied[ij[:, 0], ij[:, 1]] = True
        pad = np.pad(occupied, 1)
        full = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
        boundary = ~full[ij[:, 0], ij[:, 1]]
        inside = _inside(planar, zeta)
        origin = complex(center.real + x[0], center.imag + x[0])
        return cls(F, t, curve, h, ij, (m, m), origin, zeta, z2, coef, chart,
                   np.abs(coef) ** 2 * h * h, boundary, inside, F.graph_slope(t))

    def sublattice(self, parity) -> np.ndarray:
        """Indices of nodes with (row, col) congruent to parity mod 2."""
        return np.nonzero((self.ij[:, 0] % 2 == parity[0] % 2) & (self.ij[:, 1] % 2 == parity[1] % 2))[0]


def _lattice_sum(disc: CurveDiscretization, values: np.ndarray, kernel, sel=None, step: int = 1):
    """out_i = sum_{j != i} kernel(zeta_j - zeta_i) values_j over a (sub)lattice,
    evaluated by FFT convolution."""
    sel = np.arange(disc.n) if sel is None else sel
    ij = disc.ij[sel]
    base = ij.min(axis=0)
    rc = (ij - base) // step
    m = int(rc.max()) + 1
    V = np.zeros((m, m), complex)
    V[rc[:, 0], rc[:, 1]] = values
    off = np.arange(-(m - 1), m)
    D = disc.h * step * (off[None, :] + 1j * off[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.where(D == 0, 0.0, kernel(-D))
    full = fftconvolve(V, K, mode="full")
    return full[m - 1 + rc[:, 0], m - 1 + rc[:, 1]]


# ---------------------------------------------------------------------------
# dbar-solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DbarResult:
    values: np.ndarray
    flagged: np.ndarray          # nodes where the output is not trustworthy


def dbar_solve(disc: CurveDiscretization, f, check_support: bool = True) -> DbarResult:
    """Solve dbar R = f dzeta-bar by the kernel integral with the self-node
    excluded; f holds chart-1 coefficients at the nodes."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (disc.n,):
        raise InvalidSpec("f must have one sample per node")
    if check_support and np.any(np.abs(f[disc.boundary]) > 0):
        raise InvalidSpec("f must vanish on the boundary ring of the discretized piece")
    if disc.slope is not None:
        # k(z', z) coef(z') = -1 / (zeta' - zeta) on graph-type curves
        out = _lattice_sum(disc, f, lambda d: -1.0 / d) * (disc.h ** 2 / math.pi)
    else:
        out = np.zeros(disc.n, complex)
        src = np.nonzero(f != 0)[0]
        for a in range(0, disc.n, 1024):
            i = np.arange(a, min(a + 1024, disc.n))
            zi = (disc.zeta[i, None], disc.z2[i, None])
            zj = (disc.zeta[None, src], disc.z2[None, src])
            same = i[:, None] == src[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                d1, d2 = zj[0] - zi[0], zj[1] - zi[1]
                Q1, Q2 = hefer(disc.F, disc.t, zj, zi)
                k = (np.conj(d1) * Q2 - np.conj(d2) * Q1) / (np.abs(d1) ** 2 + np.abs(d2) ** 2)
            k = np.where(same, 0.0, k)
            out[i] = (k * (disc.coef[src] * f[src])[None, :]).sum(axis=1) * (disc.h ** 2 / math.pi)
    return DbarResult(out, disc.boundary.copy())


# ---------------------------------------------------------------------------
# Green function
# ---------------------------------------------------------------------------

def _green_sum(disc: CurveDiscretization, star: int, sel=None, step: int = 1) -> np.ndarray:
    sel = np.arange(disc.n) if sel is None else sel
    zs = disc.zeta[star]
    w = step * step
    if disc.slope is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(sel == star, 0.0, 1.0 / (zs - disc.zeta[sel]))
        g = _lattice_sum(disc, v, lambda d: 1.0 / np.conj(d), sel, step)
        return g * (w * disc.h ** 2 / (2 * math.pi ** 2))
    zstar = (disc.zeta[star], disc.z2[star])
    nodes = (disc.zeta[sel], disc.z2[sel])
    with np.errstate(divide="ignore", invalid="ignore"):
        v = kernel_k(disc.F, disc.t, zstar, (np.where(sel == star, np.nan, nodes[0]), nodes[1]))
    v = np.where(sel == star, 0.0, v) * disc.weight[sel] * w
    out = np.zeros(len(sel), complex)
    for a in range(0, len(sel), 1024):
        i = np.arange(a, min(a + 1024, len(sel)))
        zi = (nodes[0][i, None], nodes[1][i, None])
        zj = (nodes[0][None, :], nodes[1][None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            d1, d2 = zj[0] - zi[0], zj[1] - zi[1]
            Q1, Q2 = hefer(disc.F, disc.t, zj, zi)
            k = (np.conj(d1) * Q2 - np.conj(d2) * Q1) / (np.abs(d1) ** 2 + np.abs(d2) ** 2)
        k = np.where(i[:, None] == np.arange(len(sel))[None, :], 0.0, k)
        out[i] = (np.conj(k) * v[None, :]).sum(axis=1)
    return out / (2 * math.pi ** 2)


def green_field(disc: CurveDiscretization, star: int, richardson: bool = False):
    """g(z*, .) at lattice nodes.

    Without Richardson: all nodes. With it: nodes of the sublattice through
    z*, extrapolated as 2 g_h - g_2h. Returns (node indices, values).
    """
    g = _green_sum(disc, star)
    if not richardson:
        return np.arange(disc.n), g
    sub = disc.sublattice(disc.ij[star])
    g2 = _green_sum(disc, star, sub, 2)
    return sub, 2 * g[sub] - g2


def green_eval(disc: CurveDiscretization, star: int, target: int, richardson: bool = True) -> complex:
    """g_{z*}(z) at node target, with two-level Richardson when target lies on
    the sublattice through z*."""
    if star == target:
        raise SingularPoint("Green function evaluated at its pole")
    if richardson and np.all(disc.ij[star] % 2 == disc.ij[target] % 2):
        idx, g = green_field(disc, star, True)
        return complex(g[np.searchsorted(idx, target)])
    return complex(_green_sum(disc, star)[target])


def distributional_pairing(disc: CurveDiscretization, star: int, chi_lap, richardson: bool = False) -> complex:
    """<g_{z*}, i ddbar chi> with chi_lap the chart Laplacian of chi at the nodes
    (i ddbar chi = (lap chi / 2) dA in the chart)."""
    idx, g = green_field(disc, star, richardson)
    area = disc.h ** 2 * (4 if richardson else 1)
    lap = np.asarray(chi_lap)[idx]
    mask = idx != star
    # pull the chart measure back to the curve measure cancels: both are dA here
    return complex((g[mask] * lap[mask] / 2).sum() * area)


def discrete_laplacian(disc: CurveDiscretization, values: np.ndarray) -> tuple:
    """Nine-point Laplacian (edges 4, corners 1, centre -20, over 6 h^2) at nodes
    whose eight neighbours are present; its error on harmonic functions is O(h^4)."""
    m = disc.shape[0]
    A = np.full((m + 2, m + 2), np.nan + 0j)
    A[disc.ij[:, 0] + 1, disc.ij[:, 1] + 1] = values
    r, c = disc.ij[:, 0] + 1, disc.ij[:, 1] + 1
    edges = A[r + 1, c] + A[r - 1, c] + A[r, c + 1] + A[r, c - 1]
    corners = A[r + 1, c + 1] + A[r - 1, c - 1] + A[r - 1, c + 1] + A[r + 1, c - 1]
    lap = (4 * edges + corners - 20 * A[r, c]) / (6 * disc.h ** 2)
    good = np.nonzero(np.isfinite(lap))[0]
    return good, lap[good]


# ---------------------------------------------------------------------------
# Cauchy data and harmonic extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CauchyDatum:
    curve: ParamCurve
    u: np.ndarray                # (N,) real
    u_prime: np.ndarray          # (N,) real, derivative along nu
    tu: np.ndarray               # (N,) derivative along tau
    tau: np.ndarray              # (N, 2) unit tangent in C^2, along the orientation
    nu: np.ndarray               # (N, 2) = -i tau, so (nu, tau) is direct
    alpha: np.ndarray            # (N,) coefficient of dz1

    def resample(self, n: int) -> "CauchyDatum":
        if n == self.curve.n:
            return self
        return cauchy_datum(self.curve.resample(n), _fourier_resample(self.u, n).real,
                            _fourier_resample(self.u_prime, n).real)

    def pullback(self) -> np.ndarray:
        """alpha(gamma'(theta)) at the nodes."""
        return self.alpha * self.curve.velocity[:, 0]


def cauchy_datum(curve: ParamCurve, u, u_prime) -> CauchyDatum:
    """alpha = 1/2 (u' - i Tu)(nu* + i tau*), stored as the dz1 coefficient."""
    u = np.asarray(u, dtype=float)
    up = np.asarray(u_prime, dtype=float)
    if u.shape != (curve.n,) or up.shape != (curve.n,):
        raise InvalidSpec("boundary samples must align with the curve nodes")
    vel = curve.velocity
    speed = np.sqrt((np.abs(vel) ** 2).sum(axis=1))
    if speed.min() < 1e-12 * max(speed.max(), 1e-300):
        raise DegenerateParametrization("tangent vanishes on the boundary curve")
    tau = curve.orientation * vel / speed[:, None]
    nu = -1j * tau
    tu = curve.orientation * _spectral_derivative(u, curve.period).real / speed
    if np.any(np.abs(nu[:, 0]) < 1e-12):
        raise UseAlternative("the leaf is vertical over z1 somewhere on the curve")
    alpha = 0.5 * (up - 1j * tu) / nu[:, 0]
    return CauchyDatum(curve, u, up, tu, tau, nu, alpha)


def neumann_of_real_part(curve: ParamCurve, dH) -> np.ndarray:
    """u' for u = Re H(z1) on the leaf: Re(H'(z1) nu_1)."""
    vel = curve.velocity
    speed = np.sqrt((np.abs(vel) ** 2).sum(axis=1))
    nu1 = -1j * curve.orientation * vel[:, 0] / speed
    return (np.asarray(dH(curve.nodes[:, 0])) * nu1).real


def _required_n(datum: CauchyDatum, zeta: np.ndarray, digits: float = 40.0) -> np.ndarray:
    """Boundary nodes needed per target: the trapezoid error decays like
    exp(-2 pi n d / arc), d a lower bound on the distance to gamma."""
    planar = project_z1(datum.curve.resample(4 * datum.curve.n))
    d = np.maximum(planar.distance(zeta) - 0.25 * planar.cutoff(), 1e-6)
    arc = float(np.abs(planar.velocity).mean()) * planar.period
    need = digits * arc / (TWO_PI * d)
    n = np.full(zeta.shape, datum.curve.n)
    while True:
        grow = (n < need) & (n < (1 << 16))
        if not grow.any():
            return n
        n[grow] *= 2


def _green_boundary(datum: CauchyDatum, zeta) -> np.ndarray:
    """sum over gamma of u dg + g alpha-bar, g = (1/4 pi) log|zeta - z|^2, per target."""
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    out = np.zeros(zeta.shape, complex)
    if not zeta.size:
        return out
    need = _required_n(datum, zeta)
    for n in np.unique(need):
        sel = np.nonzero(need == n)[0]
        d = datum.resample(int(n))
        c = d.curve
        zb = c.nodes[:, 0]
        dz = c.velocity[:, 0]
        abar = np.conj(d.pullback())
        scale = c.step * c.orientation
        chunk = max(1, (1 << 22) // c.n)
        for a in range(0, len(sel), chunk):
            i = sel[a:a + chunk]
            diff = zb[None, :] - zeta[i, None]
            dg = dz[None, :] / (4 * math.pi * diff)
            g = np.log(np.abs(diff) ** 2) / (4 * math.pi)
            out[i] = ((d.u[None, :] * dg + g * abar[None, :]).sum(axis=1)) * scale
    return out


def green_moment_test(datum: CauchyDatum, exterior) -> float:
    """max over exterior points of |integral over gamma of u dg + g alpha-bar|."""
    exterior = np.asarray(exterior, dtype=complex)
    if exterior.size == 0:
        return 0.0
    return float(np.abs(_green_boundary(datum, exterior)).max())


def extension_values(datum: CauchyDatum, zeta) -> np.ndarray:
    """U(z) = (2/i) integral of u dg + g alpha-bar, at chart points zeta (complex;
    the imaginary part is a consistency diagnostic)."""
    return (2 / 1j) * _green_boundary(datum, zeta)


def exterior_points(disc: CurveDiscretization, min_dist: float | None = None) -> np.ndarray:
    """Collar nodes outside gamma, away from gamma and the collar edge."""
    min_dist = 2 * disc.h if min_dist is None else min_dist
    out = ~disc.inside & ~disc.boundary
    idx = np.nonzero(out)[0]
    if not len(idx):
        return np.zeros(0, complex)
    far = disc.distance_to_curve(disc.zeta[idx]) >= min_dist
    return disc.zeta[idx[far]]


def harmonic_extend(disc: CurveDiscretization, datum: CauchyDatum, targets,
                    tol: float = EXTEND_TOL, exterior=None):
    """Real extension U at chart points; refuses data failing the moment test."""
    if disc.slope is None:
        raise UseAlternative("harmonic extension is implemented for graph-type leaves")
    exterior = exterior_points(disc) if exterior is None else exterior
    res = green_moment_test(datum, exterior)
    if res >= tol:
        raise ObstructedExtension(f"Green moment residual {res:.3g} exceeds {tol:g}", residual=res)
    return extension_values(datum, targets).real, res


def jump_check(datum: CauchyDatum, delta: float = 0.02, stride: int = 4) -> float:
    """max |u - (U+ - U-)| at boundary nodes, U+- taken at distances delta and
    2 delta along -+nu and extrapolated linearly to the curve."""
    idx = np.arange(0, datum.curve.n, stride)
    zb = datum.curve.nodes[idx, 0]
    nhat = datum.nu[idx, 0] / np.abs(datum.nu[idx, 0])
    J = []
    for s in (delta, 2 * delta):
        up = extension_values(datum, zb - s * nhat).real
        um = extension_values(datum, zb + s * nhat).real
        J.append(up - um)
    jump = 2 * J[0] - J[1]
    return float(np.abs(datum.u[idx] - jump).max())


def jump_values(datum: CauchyDatum, delta: float, stride: int = 4):
    """(U+, U-) at distance delta on either side of the sampled boundary nodes."""
    idx = np.arange(0, datum.curve.n, stride)
    zb = datum.curve.nodes[idx, 0]
    nhat = datum.nu[idx, 0] / np.abs(datum.nu[idx, 0])
    return extension_values(datum, zb - delta * nhat).real, extension_values(datum, zb + delta * nhat).real


def values_csv(zeta, z2, values, residual=None) -> str:
    f = lambda x: format(float(x), ".17g")
    rows = ["re_z1,im_z1,re_z2,im_z2,value" + (",residual" if residual is not None else "")]
    for k in range(len(zeta)):
        row = [f(zeta[k].real), f(zeta[k].imag), f(z2[k].real), f(z2[k].imag), f(np.real(values[k]))]
        if residual is not None:
            row.append(f(residual[k] if np.ndim(residual) else residual))
        rows.append(",".join(row))
    return "\n".join(rows) + "\n"
