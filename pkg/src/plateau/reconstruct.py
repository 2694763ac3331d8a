"""Holomorphic 1-chain filling one slice: fiber polynomials from power sums,
their roots, the discriminant locus, Stokes validation and the mass estimate."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (BoundaryMismatch, MassBoundViolation, MomentViolation,
                     NonPositiveChain, RootFailure)
from .geometry import (TWO_PI, ComponentMap, ZetaGrid, classify_components,
                       project_z1)
from .moments import (MOMENT_TOL, MomentTable, _as_list, build_moment_table,
                      fiber_moments, moment_residual)
from .polynomials import as_real, stokes_test_forms

NEWTON_TOL = 1e-6
DISC_TOL = 1e-8
STOKES_TOL = 1e-6
ROOT_TOL = 1e-10
MATCH_CAP = 4.0
MASS_SLACK = 0.1


# ---------------------------------------------------------------------------
# power sums <-> monic polynomials
# ---------------------------------------------------------------------------

def _elementary(p: np.ndarray, d: int, dp: np.ndarray | None = None):
    # p[k-1] = p_k, trailing axes are batch axes
    shape = p.shape[1:]
    e = np.zeros((d + 1,) + shape, dtype=complex)
    e[0] = 1.0
    de = np.zeros_like(e) if dp is not None else None
    for k in range(1, d + 1):
        acc = np.zeros(shape, dtype=complex)
        dacc = np.zeros(shape, dtype=complex)
        for i in range(1, k + 1):
            s = 1.0 if i % 2 else -1.0
            acc += s * e[k - i] * p[i - 1]
            if dp is not None:
                dacc += s * (de[k - i] * p[i - 1] + e[k - i] * dp[i - 1])
        e[k] = acc / k
        if dp is not None:
            de[k] = dacc / k
    return (e[1:], de[1:]) if dp is not None else e[1:]


def monic_coefficients(e: np.ndarray) -> np.ndarray:
    """a_0..a_d of w^d + a_1 w^{d-1} + ... with a_k = (-1)^k e_k; e has shape (d, ...)."""
    d = e.shape[0]
    sign = (-1.0) ** np.arange(1, d + 1)
    a = np.empty((d + 1,) + e.shape[1:], dtype=complex)
    a[0] = 1.0
    a[1:] = e * sign.reshape((d,) + (1,) * (e.ndim - 1))
    return a


def newton_to_monic(p, d: int, tol: float = NEWTON_TOL) -> np.ndarray:
    """Elementary symmetric e_1..e_d from power sums p_1..p_L (L >= d).

    Batch axes trail the first. Surplus power sums (L > d) are recomputed from
    the roots of the result and must agree to tol relative to the root scale.
    """
    p = np.asarray(p, dtype=complex)
    if d < 1:
        raise ValueError("degree must be at least 1")
    if p.shape[0] < d:
        raise ValueError(f"need at least {d} power sums, got {p.shape[0]}")
    e = _elementary(p, d)
    if p.shape[0] > d:
        w = fiber_roots(e, check=False)
        scale = 1.0 + np.abs(w).max(axis=-1)
        for k in range(d + 1, p.shape[0] + 1):
            err = np.abs(p[k - 1] - (w ** k).sum(axis=-1)) / scale ** k
            if np.any(err >= tol):
                raise NonPositiveChain(
                    f"power sum p_{k} is inconsistent with a degree-{d} fiber "
                    f"(mismatch {float(err.max()):.3g})", power=k)
    return e


def fiber_roots(e, check: bool = True, tol: float = ROOT_TOL) -> np.ndarray:
    """Roots of w^d - e_1 w^{d-1} + ... for each batch entry; result (..., d)."""
    e = np.asarray(e, dtype=complex)
    d = e.shape[0]
    batch = e.shape[1:]
    a = monic_coefficients(e).reshape(d + 1, -1).T          # (P, d+1)
    P = a.shape[0]
    if d == 1:
        w = -a[:, 1:2]
    else:
        comp = np.zeros((P, d, d), dtype=complex)
        comp[:, 0, :] = -a[:, 1:]
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        if not np.all(np.isfinite(comp)):
            raise RootFailure("non-finite fiber coefficients")
        try:
            w = np.linalg.eigvals(comp)
        except np.linalg.LinAlgError as exc:
            raise RootFailure(f"eigenvalue solver failed: {exc}") from None
        # one Newton step where the derivative is not small
        val, der = _horner(a, w)
        ok = np.abs(der) > 1e-8 * (1 + np.abs(w)) ** (d - 1)
        step = np.where(ok, val / np.where(ok, der, 1.0), 0.0)
        w2 = w - step
        v2, _ = _horner(a, w2)
        w = np.where(np.abs(v2) < np.abs(val), w2, w)
    if check:
        val, _ = _horner(a, w)
        back = np.abs(val) / (1 + np.abs(w)) ** d
        if np.any(~np.isfinite(back)) or np.any(back >= tol):
            raise RootFailure(f"root backward error {float(np.nanmax(back)):.3g}")
    return w.reshape(batch + (d,))


def _horner(a: np.ndarray, w: np.ndarray):
    # a: (P, d+1), w: (P, m); value and derivative of the monic polynomial
    val = np.ones_like(w)
    der = np.zeros_like(w)
    for k in range(1, a.shape[1]):
        der = der * w + val
        val = val * w + a[:, k:k + 1]
    return val, der


def discriminant(e) -> np.ndarray:
    """Discriminant of the monic polynomial via the Sylvester resultant with its derivative."""
    e = np.asarray(e, dtype=complex)
    d = e.shape[0]
    batch = e.shape[1:]
    if d == 1:
        return np.ones(batch, dtype=complex)
    a = monic_coefficients(e).reshape(d + 1, -1).T
    b = a[:, :-1] * np.arange(d, 0, -1)[None, :]
    n = 2 * d - 1
    S = np.zeros((a.shape[0], n, n), dtype=complex)
    for r in range(d - 1):
        S[:, r, r:r + d + 1] = a
    for r in range(d):
        S[:, d - 1 + r, r:r + d] = b
    res = np.linalg.det(S)
    sign = (-1.0) ** (d * (d - 1) // 2)
    return (sign * res).reshape(batch)


# ---------------------------------------------------------------------------
# slice containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiberPolynomial:
    component_id: int
    degree: int
    index: tuple                 # (rows, cols) of the component's grid points
    zeta: np.ndarray             # (P,)
    coeffs: np.ndarray           # (d, P): e_1..e_d
    discriminant: np.ndarray     # (P,) complex

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("fiber degree must be positive")
        if not np.all(np.isfinite(self.coeffs)):
            raise RootFailure("non-finite fiber coefficients", component=self.component_id)


@dataclass(frozen=True, eq=False)
class SurfaceSample:
    """Off-grid evaluation of the chain at polar quadrature nodes."""
    zeta: np.ndarray             # (Q,)
    weight: np.ndarray           # (Q,) area weights in the zeta plane
    degree: np.ndarray           # (Q,) fiber degree at each node
    roots: tuple                 # per node group: (idx, w (m, d), dw (m, d))


@dataclass(frozen=True, eq=False)
class ChainSlice:
    t: float
    cmap: ComponentMap | None
    fibers: tuple
    roots: tuple                 # per fiber: (P, d) sheet-ordered roots
    locus: tuple = ()            # per fiber: array of flagged cell centres
    near_singular: tuple = ()    # per fiber: boolean (P,) matching flags
    surface: SurfaceSample | None = None
    curves: tuple = ()
    stokes_residual: float = 0.0
    sign: int = 1
    mass: float = 0.0
    shift: complex = 0.0

    @property
    def empty(self) -> bool:
        return not self.fibers

    def perturbed(self, shift: complex) -> "ChainSlice":
        """The same chain with every root moved by shift (boundary unchanged)."""
        return dataclasses.replace(self, shift=self.shift + shift)

    def points(self):
        """Rows (zeta, w, sheet, component) of the point cloud."""
        for f, r in zip(self.fibers, self.roots):
            for s in range(f.degree):
                for z, w in zip(f.zeta, r[:, s] + self.shift):
                    yield z, w, s, f.component_id

    def singular_cells(self) -> np.ndarray:
        if not self.locus:
            return np.zeros(0, dtype=complex)
        return np.concatenate([np.asarray(c, complex) for c in self.locus])


def empty_slice(t: float, curves=()) -> ChainSlice:
    return ChainSlice(float(t), None, (), (), curves=tuple(curves))


# ---------------------------------------------------------------------------
# component map with a quadrature-safe band
# ---------------------------------------------------------------------------

def slice_component_map(curves, n: int = 64, coarse: int = 64, margin: float = 0.25) -> ComponentMap:
    """Grid classification whose exclusion band is the chord cutoff of a
    coarse (coarse * cover node) sampling, so that the full-resolution power
    sums are converged on every labelled point."""
    curves = _as_list(curves)
    planars = [project_z1(c) for c in curves]
    # at least four chords of the actual sampling, where the trapezoid error is ~1e-10
    cutoffs = [max(2 * p.cutoff(), project_z1(c.resample(max(16, coarse * c.cover))).cutoff())
               for p, c in zip(planars, curves)]
    pts = np.concatenate([p.points for p in planars])
    half = 0.5 * max(np.ptp(pts.real), np.ptp(pts.imag), 1e-6)
    # the outer component must surround the band with a grid step to spare
    step = 2 * half * (1 + margin) / (n - 1)
    if max(cutoffs) + step > margin * half:
        margin = (max(cutoffs) + 4 * step) / half
    grid = ZetaGrid.around(planars, n, margin)
    return classify_components(planars, grid, cutoffs)


# ---------------------------------------------------------------------------
# root matching
# ---------------------------------------------------------------------------

def _assign(ref: np.ndarray, w: np.ndarray):
    # greedy nearest pairs; returns permutation of w aligned with ref and max move
    d = len(ref)
    dist = np.abs(ref[:, None] - w[None, :])
    perm = np.empty(d, dtype=int)
    used_r = np.zeros(d, bool)
    used_w = np.zeros(d, bool)
    worst = 0.0
    for _ in range(d):
        m = np.where(used_r[:, None] | used_w[None, :], np.inf, dist)
        i, j = np.unravel_index(np.argmin(m), m.shape)
        perm[i] = j
        worst = max(worst, float(dist[i, j]))
        used_r[i] = used_w[j] = True
    return w[perm], worst


def match_roots(rows: np.ndarray, cols: np.ndarray, roots: np.ndarray, cap: float):
    """Order roots into sheets by walking the component in raster order.

    Each point is matched against an already-ordered 4-neighbour; moves beyond
    cap flag the point as near-singular.
    """
    P, d = roots.shape
    out = roots.copy()
    flag = np.zeros(P, dtype=bool)
    if d == 1 or P == 0:
        return out, flag
    where = {(int(r), int(c)): k for k, (r, c) in enumerate(zip(rows, cols))}
    done = np.zeros(P, dtype=bool)
    order = np.lexsort((cols, rows))
    for k in order:
        r, c = int(rows[k]), int(cols[k])
        ref = None
        for nb in ((r, c - 1), (r - 1, c), (r, c + 1), (r + 1, c)):
            j = where.get(nb)
            if j is not None and done[j]:
                ref = j
                break
        if ref is None:
            w = roots[k]
            out[k] = w[np.lexsort((w.imag, w.real))]
        else:
            out[k], move = _assign(out[ref], roots[k])
            flag[k] = move > cap
        done[k] = True
    return out, flag


# ---------------------------------------------------------------------------
# discriminant locus
# ---------------------------------------------------------------------------

def discriminant_locus(fiber: FiberPolynomial, grid: ZetaGrid, tol: float = DISC_TOL) -> np.ndarray:
    """Centres of grid cells where the discriminant (nearly) vanishes.

    A cell is flagged when a corner value is below tol * scale^(2d-2), or when
    the discriminant winds around the cell's four corners.
    """
    d = fiber.degree
    if d == 1:
        return np.zeros(0, dtype=complex)
    ny, nx = grid.shape
    disc = np.full((ny, nx), np.nan + 0j)
    scale = np.full((ny, nx), np.nan)
    rows, cols = fiber.index
    disc[rows, cols] = fiber.discriminant
    scale[rows, cols] = np.maximum(1.0, np.abs(fiber.coeffs).max(axis=0))
    small = np.abs(disc) < tol * scale ** (2 * d - 2)

    corners = [disc[:-1, :-1], disc[:-1, 1:], disc[1:, 1:], disc[1:, :-1]]
    valid = np.all([np.isfinite(c) for c in corners], axis=0)
    turn = np.zeros(valid.shape)
    for a, b in zip(corners, corners[1:] + corners[:1]):
        with np.errstate(invalid="ignore", divide="ignore"):
            turn += np.angle(b / a)
    wound = valid & (np.abs(np.rint(turn / TWO_PI)) >= 1)
    tiny = valid & (small[:-1, :-1] | small[:-1, 1:] | small[1:, 1:] | small[1:, :-1])
    r, c = np.nonzero(wound | tiny)
    cx = 0.5 * (grid.x[c] + grid.x[c + 1])
    cy = 0.5 * (grid.y[r] + grid.y[r + 1])
    return cx + 1j * cy


# ---------------------------------------------------------------------------
# polar surface quadrature
# ---------------------------------------------------------------------------

def _ray_crossings(curves, center: complex, phis: np.ndarray, dense: int = 2048):
    """Radii where each ray center + r e^{i phi} meets a projected curve."""
    hits = [[] for _ in phis]
    for c in curves:
        m = max(dense, 8 * c.n)
        dth = c.period / m
        th = np.linspace(0.0, c.period, m, endpoint=False) + 0.3141 * dth
        z1 = np.asarray(c.z_at(th)[0]) - center
        rot = np.exp(-1j * phis)
        g = (z1[None, :] * rot[:, None]).imag                  # (rays, m)
        s = np.sign(g)
        k, i = np.nonzero(s * np.roll(s, -1, axis=1) < 0)
        front = ((z1[i] + z1[(i + 1) % m]) * rot[k]).real > 0
        k, i = k[front], i[front]
        if not len(k):
            continue
        lo, hi = th[i], th[i] + dth
        glo, ghi = g[k, i], g[k, (i + 1) % m]
        x = lo - glo * (hi - lo) / (ghi - glo)
        # safeguarded Newton inside each bracket
        for _ in range(30):
            zz = np.asarray(c.z_at(x)[0]) - center
            f = (zz * rot[k]).imag
            df = (np.asarray(c.z_at(x, 1)[0]) * rot[k]).imag
            left = np.sign(f) == np.sign(glo)
            lo, glo = np.where(left, x, lo), np.where(left, f, glo)
            hi = np.where(left, hi, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = x - f / df
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            done = np.abs(xn - x) < 1e-15 * c.period
            x = xn
            if np.all(done):
                break
        r = ((np.asarray(c.z_at(x)[0]) - center) * rot[k]).real
        for kk, rr in zip(k, r):
            hits[kk].append(float(rr))
    out = []
    for h in hits:
        h = np.sort(np.asarray(h))
        # a multiply covered curve meets the ray several times at one point
        keep = np.concatenate([[True], np.diff(h) > 1e-9 * (1 + h[1:])]) if len(h) else h
        out.append(h[keep.astype(bool)] if len(h) else h)
    return out


def polar_nodes(curves, n_phi: int = 128, n_r: int = 20, center: complex | None = None):
    """Area quadrature over the bounded region cut by the projected curves:
    trapezoid in angle, Gauss-Legendre in radius between crossings.

    The innermost segment uses r = r1 s^2, which keeps square-root behaviour
    at a branch-point centre smooth in s.
    """
    curves = _as_list(curves)
    pts = np.concatenate([project_z1(c).points for c in curves])
    if center is None:
        center = complex(pts.mean())
        cut = max(project_z1(c).cutoff() for c in curves)
        if np.abs(pts - center).min() < cut:
            center = complex(pts[np.argmax(np.abs(pts - center))] * 0.5 + center * 0.5)
    phis = (np.arange(n_phi) + 0.5) * (TWO_PI / n_phi)
    xg, wg = np.polynomial.legendre.leggauss(n_r)
    zs, ws = [], []
    for phi, radii in zip(phis, _ray_crossings(curves, center, phis)):
        edges = np.concatenate([[0.0], radii])
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= 0:
                continue
            if lo == 0.0:
                sg = 0.5 * xg + 0.5
                r = hi * sg * sg
                jac = wg * 0.5 * 2 * hi * sg
            else:
                r = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
                jac = wg * 0.5 * (hi - lo)
            zs.append(center + r * np.exp(1j * phi))
            ws.append(jac * r * (TWO_PI / n_phi))
    if not zs:
        return np.zeros(0, complex), np.zeros(0)
    return np.concatenate(zs), np.concatenate(ws)


def _disc_at(curves, d: int, zeta) -> np.ndarray:
    S = fiber_moments(curves, np.atleast_1d(zeta), d)
    return discriminant(_elementary(S[1:d + 1], d))


def branch_points(chain: "ChainSlice", iters: int = 40) -> list:
    """Zeros of the discriminant refined by secant steps from the flagged cells."""
    found = []
    if chain.cmap is None:
        return found
    h = chain.cmap.grid.step
    for f, cells in zip(chain.fibers, chain.locus):
        for z0 in cells:
            a, b = complex(z0), complex(z0) + 0.25 * h
            fa, fb = _disc_at(chain.curves, f.degree, [a, b])
            for _ in range(iters):
                if fb == fa:
                    break
                c = b - fb * (b - a) / (fb - fa)
                if abs(c - z0) > 2 * h:
                    break
                a, fa = b, fb
                b, fb = c, _disc_at(chain.curves, f.degree, c)[0]
                if abs(b - a) < 1e-14 * (1 + abs(b)):
                    break
            z = b if abs(b - z0) <= 2 * h else complex(z0)
            if all(abs(z - q) > h for q in found):
                found.append(z)
    return found


def sample_surface(curves, n_phi: int = 128, n_r: int = 20,
                   center: complex | None = None) -> SurfaceSample:
    """Roots and their zeta-derivatives at polar nodes.

    Derivatives come from the Cauchy derivative of the power sums and
    implicit differentiation of the fiber polynomial.
    """
    curves = _as_list(curves)
    zeta, weight = polar_nodes(curves, n_phi, n_r, center)
    S0 = fiber_moments(curves, zeta, 0)[0]
    deg = np.rint(S0.real).astype(int)
    if np.any(deg < 0):
        raise NonPositiveChain("negative fiber degree at a quadrature node")
    groups = []
    dmax = int(deg.max(initial=0))
    if dmax >= 1:
        S, dS = fiber_moments(curves, zeta[deg >= 1], dmax, deriv=True)
        sub = np.nonzero(deg >= 1)[0]
        for d in range(1, dmax + 1):
            loc = np.nonzero(deg[sub] == d)[0]
            if not len(loc):
                continue
            e, de = _elementary(S[1:d + 1, loc], d, dS[1:d + 1, loc])
            w = fiber_roots(e, check=False)
            a = monic_coefficients(e).T                  # (m, d+1)
            da = monic_coefficients(de).T
            da[:, 0] = 0.0
            val_t = np.zeros_like(w)
            for k in range(d + 1):
                val_t = val_t * w + da[:, k:k + 1]
            _, der = _horner(a, w)
            dw = -val_t / der
            groups.append((sub[loc], w, dw))
    return SurfaceSample(zeta, weight, deg, tuple(groups))


def _boundary_integral(form, curves) -> float:
    total = 0.0
    for c in curves:
        X = as_real(c.nodes[:, 0], c.nodes[:, 1])
        V = as_real(c.velocity[:, 0], c.velocity[:, 1])
        total += c.orientation * c.step * float((form.values(X) * V).sum())
    return total


def _surface_integral(form, surf: SurfaceSample, shift: complex) -> float:
    total = 0.0
    for idx, w, dw in surf.roots:
        z = np.broadcast_to(surf.zeta[idx][:, None], w.shape)
        X = as_real(z, w + shift)
        ux, vx = dw.real, dw.imag
        one, zero = np.ones_like(ux), np.zeros_like(ux)
        # columns d/dx, d/dy of the graph map zeta -> (zeta, w(zeta))
        J = np.stack([np.stack([one, zero]), np.stack([zero, one]),
                      np.stack([ux, -vx]), np.stack([vx, ux])])
        D = form.exterior(X)
        dens = np.zeros(ux.shape)
        for b in range(4):
            for a in range(4):
                if a != b:
                    dens += D[b, a] * (J[b, 0] * J[a, 1] - J[b, 1] * J[a, 0])
        total += float((dens * surf.weight[idx][:, None]).sum())
    return total


def validate_boundary(chain: ChainSlice, curves=None, forms=None, tol: float = STOKES_TOL,
                      raise_on_fail: bool = True):
    """Max Stokes mismatch over the test forms under the better global sign.

    Returns (residual, sign).
    """
    curves = chain.curves if curves is None else tuple(_as_list(curves))
    forms = stokes_test_forms() if forms is None else forms
    surf = chain.surface if chain.surface is not None else sample_surface(curves)
    lhs = np.array([_surface_integral(f, surf, chain.shift) for f in forms])
    rhs = np.array([_boundary_integral(f, curves) for f in forms])
    res = {s: float(np.abs(lhs - s * rhs).max(initial=0.0)) for s in (1, -1)}
    sign = 1 if res[1] <= res[-1] else -1
    if raise_on_fail and res[sign] > tol:
        raise BoundaryMismatch(f"Stokes mismatch {res[sign]:.3g} exceeds {tol:g}",
                               t=chain.t, residual=res[sign])
    return res[sign], sign


def mass_estimate(chain: ChainSlice, slack: float = MASS_SLACK, check: bool = True) -> float:
    """Area of the chain: sum over sheets of the integral of 1 + |dw/dzeta|^2."""
    surf = chain.surface
    if chain.empty and (surf is None or not surf.roots):
        return 0.0
    if surf is None:
        surf = sample_surface(chain.curves)
    mass = 0.0
    for idx, _, dw in surf.roots:
        mass += float(((1 + np.abs(dw) ** 2) * surf.weight[idx][:, None]).sum())
    if check and chain.curves:
        bound = mass_bound(chain.curves, slack)
        if mass > bound:
            raise MassBoundViolation(f"mass {mass:.6g} exceeds bound {bound:.6g}", t=chain.t)
    return mass


def mass_bound(curves, slack: float = MASS_SLACK) -> float:
    """2 A length(M_t) (1 + slack), A the largest |z| on the boundary."""
    curves = _as_list(curves)
    radius = max(c.max_radius() for c in curves)
    length = sum(c.length() for c in curves)
    return 2.0 * radius * length * (1.0 + slack)


# ---------------------------------------------------------------------------
# the slice pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReconstructConfig:
    moment_tol: float = MOMENT_TOL
    newton_tol: float = NEWTON_TOL
    disc_tol: float = DISC_TOL
    stokes_tol: float = STOKES_TOL
    match_cap: float = MATCH_CAP
    mass_slack: float = MASS_SLACK
    grid_n: int = 64
    grid_margin: float = 0.25
    kmax: int | None = None
    n_phi: int = 128
    n_r: int = 20
    validate: bool = True


def reconstruct_slice(curves, table: MomentTable | None = None,
                      config: ReconstructConfig = ReconstructConfig()) -> ChainSlice:
    """Fill one slice: fibers per bounded component, roots, locus, validation."""
    curves = tuple(_as_list(curves))
    t = float(table.t) if table is not None else (curves[0].t if curves else 0.0)
    if not curves:
        return empty_slice(t)
    if table is None:
        cmap = slice_component_map(curves, config.grid_n, margin=config.grid_margin)
        table = build_moment_table(curves, cmap, config.kmax, t)
    cmap = table.cmap
    negative = {j: w for j, w in cmap.winding.items() if w < 0}
    if negative:
        raise NonPositiveChain(f"negative winding on components {sorted(negative)}",
                               t=t, components=sorted(negative))
    res = moment_residual(table)
    if res >= config.moment_tol:
        raise MomentViolation(f"moment residual {res:.3g} on the unbounded component",
                              t=t, residual=res)

    cap = config.match_cap * cmap.grid.step
    fibers, roots, loci, flags = [], [], [], []
    for j in cmap.bounded():
        d = cmap.winding[j]
        if d == 0:
            continue
        rows, cols = np.nonzero(cmap.mask(j))
        p = table.values[1:, rows, cols]
        e = newton_to_monic(p, d, config.newton_tol)
        w = fiber_roots(e)
        fib = FiberPolynomial(j, d, (rows, cols), cmap.grid.points[rows, cols], e, discriminant(e))
        w, flag = match_roots(rows, cols, w, cap)
        fibers.append(fib)
        roots.append(w)
        flags.append(flag)
        loci.append(discriminant_locus(fib, cmap.grid, config.disc_tol))
    chain = ChainSlice(t, cmap, tuple(fibers), tuple(roots), tuple(loci), tuple(flags), curves=curves)
    if not config.validate or not fibers:
        return chain
    bps = branch_points(chain)
    surf = sample_surface(curves, config.n_phi, config.n_r, bps[0] if len(bps) == 1 else None)
    chain = dataclasses.replace(chain, surface=surf)
    residual, sign = validate_boundary(chain, tol=config.stokes_tol)
    mass = mass_estimate(chain, config.mass_slack)
    return dataclasses.replace(chain, stokes_residual=residual, sign=sign, mass=mass)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def fmt(x: float) -> str:
    return format(float(x), ".17g")


def chain_to_json(chain: ChainSlice) -> dict:
    fibers = []
    for f in chain.fibers:
        fibers.append({
            "component": int(f.component_id),
            "degree": int(f.degree),
            "zeta": [[float(z.real), float(z.imag)] for z in f.zeta],
            "coeffs": [[[float(c.real), float(c.imag)] for c in col] for col in f.coeffs.T],
        })
    return {"t": chain.t, "sign": chain.sign, "stokesResidual": chain.stokes_residual,
            "massEstimate": chain.mass, "fibers": fibers}


def point_cloud_rows(chain: ChainSlice):
    yield "re_zeta,im_zeta,re_w,im_w,sheet,component"
    for z, w, s, j in chain.points():
        yield ",".join([fmt(z.real), fmt(z.imag), fmt(w.real), fmt(w.imag), str(s), str(j)])


def locus_rows(chain: ChainSlice, with_t: bool = False):
    yield ("t," if with_t else "") + "re_zeta,im_zeta,component"
    for f, cells in zip(chain.fibers, chain.locus):
        for z in cells:
            lead = fmt(chain.t) + "," if with_t else ""
            yield lead + ",".join([fmt(z.real), fmt(z.imag), str(f.component_id)])


def _emit(obj, indent: int, out: list):
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for k, (key, val) in enumerate(items):
            out.append(f"{pad} {json.dumps(str(key))}: ")
            _emit(val, indent + 1, out)
            out.append(",\n" if k < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for k, val in enumerate(obj):
            out.append(pad + " ")
            _emit(val, indent + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, (bool, np.bool_)) or obj is None:
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(fmt(x) if math.isfinite(x) else ("NaN" if x != x else ("Infinity" if x > 0 else "-Infinity")))
    elif isinstance(obj, (complex, np.complexfloating)):
        _emit([float(obj.real), float(obj.imag)], indent, out)
    else:
        out.append(json.dumps(str(obj)))


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    out = []
    _emit(doc, 0, out)
    return "".join(out) + "\n"
