"""Small polynomial containers: holomorphic polynomials in (z1, z2) with
polynomial t-dependence, and real polynomial 1-forms on R^4 = C^2."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import InvalidSpec, ParseError


@dataclass(frozen=True, eq=False)
class BiPoly:
    """sum_{m,i,j} c[m, i, j] t^m z1^i z2^j."""
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3:
            raise InvalidSpec("coefficient table must be (t-degree, d1, d2)")
        if not np.all(np.isfinite(c)):
            raise InvalidSpec("non-finite polynomial coefficient")
        object.__setattr__(self, "c", c)

    @classmethod
    def from_terms(cls, terms) -> "BiPoly":
        """terms: iterable of (i, j, [c0, c1, ...]) with t-polynomial coefficients."""
        terms = [(int(i), int(j), np.atleast_1d(np.asarray(tp, dtype=complex))) for i, j, tp in terms]
        if not terms:
            return cls(np.zeros((1, 1, 1)))
        di = max(i for i, _, _ in terms) + 1
        dj = max(j for _, j, _ in terms) + 1
        dm = max(len(tp) for _, _, tp in terms)
        c = np.zeros((dm, di, dj), dtype=complex)
        for i, j, tp in terms:
            if i < 0 or j < 0:
                raise InvalidSpec("negative exponent")
            c[:len(tp), i, j] += tp
        return cls(c)

    @property
    def degrees(self):
        return self.c.shape[1] - 1, self.c.shape[2] - 1

    @property
    def total_degree(self) -> int:
        nz = np.argwhere(np.abs(self.c).sum(axis=0) > 0)
        return int(nz.sum(axis=1).max()) if len(nz) else 0

    def at(self, t: float) -> np.ndarray:
        """Coefficient matrix a[i, j] at parameter t."""
        out = np.zeros(self.c.shape[1:], dtype=complex)
        for m in range(self.c.shape[0] - 1, -1, -1):
            out = out * t + self.c[m]
        return out

    def __call__(self, z1, z2, t: float = 0.0):
        a = self.at(t)
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        out = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
        # Horner in z1, then in z2
        for i in range(a.shape[0] - 1, -1, -1):
            row = np.zeros_like(out)
            for j in range(a.shape[1] - 1, -1, -1):
                row = row * z2 + a[i, j]
            out = out * z1 + row
        return out

    def d1(self) -> "BiPoly":
        if self.c.shape[1] == 1:
            return BiPoly(np.zeros((self.c.shape[0], 1, 1)))
        k = np.arange(1, self.c.shape[1])[None, :, None]
        return BiPoly(self.c[:, 1:, :] * k)

    def d2(self) -> "BiPoly":
        if self.c.shape[2] == 1:
            return BiPoly(np.zeros((self.c.shape[0], 1, 1)))
        k = np.arange(1, self.c.shape[2])[None, None, :]
        return BiPoly(self.c[:, :, 1:] * k)

    def dt(self) -> "BiPoly":
        if self.c.shape[0] == 1:
            return BiPoly(np.zeros((1,) + self.c.shape[1:]))
        k = np.arange(1, self.c.shape[0])[:, None, None]
        return BiPoly(self.c[1:] * k)

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        shape = tuple(max(a, b) for a, b in zip(self.c.shape, other.c.shape))
        out = np.zeros(shape, dtype=complex)
        out[tuple(slice(0, s) for s in self.c.shape)] += self.c
        out[tuple(slice(0, s) for s in other.c.shape)] -= other.c
        return BiPoly(out)

    def to_terms(self):
        out = []
        for i, j in product(range(self.c.shape[1]), range(self.c.shape[2])):
            tp = self.c[:, i, j]
            if np.any(tp != 0):
                out.append({"i": i, "j": j, "t_poly": [[v.real, v.imag] for v in tp]})
        return out


def _read_tpoly(value, where):
    vals = []
    for v in value:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ParseError(f"{where}: complex entries are [re, im]")
            vals.append(complex(v[0], v[1]))
        else:
            vals.append(complex(float(v)))
    return vals


def bipoly_from_json(terms, where="poly") -> BiPoly:
    try:
        rows = []
        for k, e in enumerate(terms):
            tp = e.get("t_poly", e.get("c", [0.0]))
            if not isinstance(tp, list):
                tp = [tp]
            vals = _read_tpoly(tp, f"{where}[{k}]")
            if "im" in e:
                im = e["im"] if isinstance(e["im"], list) else [e["im"]]
                vals += [0j] * (len(im) - len(vals))
                vals = [v + 1j * float(b) for v, b in zip(vals, im + [0.0] * len(vals))]
            rows.append((e["i"], e["j"], vals))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"{where}: malformed polynomial term ({exc})") from None
    return BiPoly.from_terms(rows)


@dataclass(frozen=True, eq=False)
class HolomorphicTestForm:
    """h = h1 dz1 + h2 dz2 with polynomial coefficients."""
    h1: BiPoly
    h2: BiPoly
    max_degree: int = 12

    def __post_init__(self):
        if max(self.h1.total_degree, self.h2.total_degree) > self.max_degree:
            raise InvalidSpec("test form degree exceeds the configured bound")

    def dh(self) -> BiPoly:
        """Coefficient of dz1 ^ dz2 in dh."""
        return self.h2.d1() - self.h1.d2()

    @classmethod
    def monomial(cls, i: int, j: int, slot: int) -> "HolomorphicTestForm":
        mono = BiPoly.from_terms([(i, j, [1.0])])
        zero = BiPoly.from_terms([])
        return cls(mono, zero) if slot == 1 else cls(zero, mono)

    @classmethod
    def from_json(cls, doc) -> "HolomorphicTestForm":
        return cls(bipoly_from_json(doc.get("h1", []), "h1"), bipoly_from_json(doc.get("h2", []), "h2"))


def holomorphic_basis(max_degree: int = 3):
    """All monomial forms z1^i z2^j dz_s with i + j <= max_degree."""
    out = []
    for d in range(max_degree + 1):
        for i in range(d + 1):
            for slot in (1, 2):
                out.append(HolomorphicTestForm.monomial(i, d - i, slot))
    return out


# ---------------------------------------------------------------------------
# real 1-forms on C^2 seen as R^4 with coordinates (x1, y1, x2, y2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealForm:
    """phi = sum_a A_a dx_a, each A_a a dict {(e1, e2, e3, e4): coefficient}."""
    coeffs: tuple

    @staticmethod
    def _eval(poly: dict, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[1:])
        for e, c in poly.items():
            term = np.full(X.shape[1:], float(c))
            for a, p in enumerate(e):
                if p:
                    term = term * X[a] ** p
            out += term
        return out

    @staticmethod
    def _diff(poly: dict, b: int) -> dict:
        out = {}
        for e, c in poly.items():
            if e[b]:
                f = list(e)
                f[b] -= 1
                out[tuple(f)] = out.get(tuple(f), 0.0) + c * e[b]
        return out

    def values(self, X: np.ndarray) -> np.ndarray:
        """Coefficient functions A_a at points X of shape (4, ...)."""
        return np.stack([self._eval(p, X) for p in self.coeffs])

    def exterior(self, X: np.ndarray) -> np.ndarray:
        """D[b, a] = dA_a/dx_b, so d phi = sum_{b,a} D[b, a] dx_b ^ dx_a."""
        return np.stack([np.stack([self._eval(self._diff(p, b), X) for p in self.coeffs])
                         for b in range(4)])


def as_real(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    return np.stack([z1.real, z1.imag, z2.real, z2.imag])


def stokes_test_forms():
    """Six polynomial test 1-forms used for boundary validation."""
    E = lambda *e: tuple(e)
    z = {}
    forms = [
        (z, z, z, {E(1, 0, 0, 0): 1.0}),                          # x1 dy2
        ({E(0, 0, 1, 0): 1.0}, z, z, z),                          # x2 dx1
        (z, {E(1, 0, 1, 0): 1.0}, z, z),                          # x1 x2 dy1
        (z, z, z, {E(0, 0, 1, 0): 1.0}),                          # x2 dy2
        ({E(0, 0, 0, 2): 1.0}, z, {E(0, 1, 0, 0): 1.0}, z),       # y2^2 dx1 + y1 dx2
        (z, z, {E(0, 1, 1, 1): 1.0}, {E(2, 0, 0, 0): 0.5}),        # x2 y1 y2 dx2 + x1^2/2 dy2
    ]
    return [RealForm(tuple(dict(a) for a in f)) for f in forms]
