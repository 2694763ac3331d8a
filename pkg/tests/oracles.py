"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical routines: windings come from
unwrapped arguments, power sums from residues, coefficients from numpy.poly,
bumps from hand-differentiated closed forms.
"""
import math

import numpy as np


def winding_by_angle(points: np.ndarray, zeta: complex) -> int:
    """Total change of arg(z - zeta) along a closed polygon, over 2 pi."""
    ang = np.unwrap(np.angle(np.append(points, points[0]) - zeta))
    return int(round((ang[-1] - ang[0]) / (2 * math.pi)))


def graph_power_sum(zeta, power: int, k: int):
    """S_k inside the unit disk for the graph w = z^power: (zeta^power)^k."""
    return np.asarray(zeta, complex) ** (power * k)


def sqrt_power_sum(zeta, k: int):
    """Sum of w^k over w = +-sqrt(zeta)."""
    r = np.sqrt(np.asarray(zeta, complex))
    return r ** k + (-r) ** k


def elementary_from_roots(roots: np.ndarray) -> np.ndarray:
    """(e_1..e_d) with prod (w - r) = w^d - e_1 w^{d-1} + ..."""
    a = np.poly(roots)
    d = len(roots)
    return a[1:] * (-1.0) ** np.arange(1, d + 1)


def graph_area(power: int) -> float:
    """Area of {(z, z^p) : |z| < 1}: integral of 1 + p^2 |z|^(2p-2)."""
    return math.pi + power ** 2 * 2 * math.pi / (2 * power)


def bump(center: complex, rho: float, poly=lambda z: 1 + 0 * z, dpoly_dzbar=lambda z: 0 * z):
    """chi = poly(z) exp(-1 / (1 - s)), s = |z - c|^2 / rho^2, and d chi / d zbar."""
    def f(z):
        z = np.asarray(z, complex)
        s = np.abs(z - center) ** 2 / rho ** 2
        ins = s < 1
        ss = s[ins]
        b = np.exp(-1 / (1 - ss))
        db = b * (-1 / (1 - ss) ** 2) * ((z[ins] - center) / rho ** 2)
        chi = np.zeros_like(z)
        dchi = np.zeros_like(z)
        chi[ins] = poly(z[ins]) * b
        dchi[ins] = dpoly_dzbar(z[ins]) * b + poly(z[ins]) * db
        return chi, dchi
    return f


def radial_bump(center: complex, rho: float):
    """chi = exp(-1 / (1 - s)) and its Laplacian 4 d^2/dz dzbar chi."""
    def f(z):
        z = np.asarray(z, complex)
        s = np.abs(z - center) ** 2 / rho ** 2
        ins = s < 1
        ss = s[ins]
        b = np.exp(-1 / (1 - ss))
        b1 = -b / (1 - ss) ** 2
        b2 = b / (1 - ss) ** 4 - 2 * b / (1 - ss) ** 3
        chi = np.zeros(z.shape)
        lap = np.zeros(z.shape)
        chi[ins] = b
        lap[ins] = 4 * (b2 * ss + b1) / rho ** 2
        return chi, lap
    return f


def dbar_cases():
    """Three bump-times-polynomial test functions on the unit disk."""
    return [bump(0, 0.9),
            bump(0.05 + 0.02j, 0.85, lambda z: 1 + z),
            bump(-0.05j, 0.9, lambda z: 0.5 + z * np.conj(z) + 0.5 * z ** 2, lambda z: z)]


def pairing_cases():
    return [radial_bump(0, 0.8), radial_bump(0.1 + 0.1j, 0.6), radial_bump(-0.2, 0.7)]


def disk_green(zeta, star):
    """Green function of the unit disk with pole star, normalized so that its
    Laplacian is 2 delta (i ddbar g = delta)."""
    zeta = np.asarray(zeta, complex)
    return (np.log(np.abs(zeta - star)) - np.log(np.abs(1 - np.conj(star) * zeta))) / math.pi


def graph_stokes_pair(power: int) -> float:
    """For w = z^power over the unit disk, the integral of dx2 ^ dy2 over the
    graph equals the boundary integral of x2 dy2: power * pi."""
    return power * math.pi
