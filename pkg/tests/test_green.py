import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plateau import fixtures as fx
from plateau.errors import (InvalidSpec, ObstructedExtension, ParseError, SingularPoint,
                            SingularPointOfCurve, UseAlternative)
from plateau.geometry import CurveSpec, sample_curve
from plateau.green import (CurveDiscretization, DefiningFunction, cauchy_datum, dbar_solve,
                           discrete_laplacian, distributional_pairing, exterior_points,
                           extension_values, green_eval, green_field, green_moment_test,
                           harmonic_extend, hefer, jump_check, jump_values, kernel_k,
                           neumann_of_real_part, omega_form, values_csv)
from oracles import dbar_cases, disk_green, pairing_cases


def F_of(terms):
    return DefiningFunction.from_json({"coeffs": [{"i": i, "j": j, "t_poly": list(c)} for i, j, c in terms]})


SQRT = F_of([(0, 2, [1.0]), (1, 0, [-1.0])])          # z2^2 - z1
PARABOLA = DefiningFunction.from_json(fx.parabola_function())
PLANE = DefiningFunction.from_json(fx.plane_function())
CUSP = F_of([(0, 2, [1.0]), (3, 0, [-1.0])])           # z2^2 - z1^3
DIAGONAL = F_of([(0, 1, [1.0]), (1, 0, [-1.0])])      # z2 - z1
CUBIC = F_of([(3, 1, [0.5, 1.0]), (0, 3, [2.0]), (2, 2, [[0.0, -1.0]]), (1, 0, [0.3])])

complex_pt = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def disk():
    return sample_curve(fx.disk_spec(), 256)


@pytest.fixture(scope="module")
def plane_disc(disk):
    return CurveDiscretization.build(PLANE, disk, 10000)


# -- defining functions ----------------------------------------------------

def test_defining_function_json():
    F = DefiningFunction.from_json(fx.parabola_function(True))
    assert F(1.0, 1.0, 0.0) == 0 and F(1.0, 2.0, 1.0) == 0
    assert DefiningFunction.from_json(F.to_json())(0.3, 0.7j, 0.2) == F(0.3, 0.7j, 0.2)
    with pytest.raises(ParseError):
        DefiningFunction.from_json({"d1": 1})
    with pytest.raises(InvalidSpec):
        DefiningFunction.from_json({"d1": 1, "d2": 1, "coeffs": [{"i": 2, "j": 0, "t_poly": [1]}]})


# -- Hefer decomposition ---------------------------------------------------

def test_hefer_examples():
    Q1, Q2 = hefer(SQRT, 0.0, (0.3, 1.2j), (-0.1, 0.4))
    assert Q1 == -1 and Q2 == pytest.approx(1.2j + 0.4)
    Q1, Q2 = hefer(PARABOLA, 0.0, (1, 1), (0, 0))
    assert (Q1, Q2) == (-1, 1)


def test_hefer_at_coincidence_is_gradient():
    z = (0.4 - 0.2j, 0.1 + 0.9j)
    Q = hefer(CUBIC, 0.3, z, z)
    np.testing.assert_allclose(Q, CUBIC.grad(*z, 0.3), rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(complex_pt, complex_pt, complex_pt, complex_pt, st.floats(-1, 1))
def test_hefer_identity(a, b, c, d, t):
    for F in (SQRT, PARABOLA, CUBIC):
        Q1, Q2 = hefer(F, t, (a, b), (c, d))
        lhs = Q1 * (a - c) + Q2 * (b - d)
        rhs = F(a, b, t) - F(c, d, t)
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs) + 100)


def test_hefer_identity_bulk(rng):
    z = rng.normal(size=(4, 10000)) + 1j * rng.normal(size=(4, 10000))
    for F in (SQRT, PARABOLA, CUBIC):
        Q1, Q2 = hefer(F, 0.7, (z[0], z[1]), (z[2], z[3]))
        rhs = F(z[0], z[1], 0.7) - F(z[2], z[3], 0.7)
        err = np.abs(Q1 * (z[0] - z[2]) + Q2 * (z[1] - z[3]) - rhs)
        assert (err / (1 + np.abs(rhs))).max() < 1e-13


# -- omega and the kernel --------------------------------------------------

def dz1_coefficient(F, z, chart, coef):
    # on the curve dz2 = -(F_z1 / F_z2) dz1
    F1, F2 = F.grad(*z)
    return coef if chart == 1 else -coef * F1 / F2


def test_omega_examples():
    # the chart follows the larger partial; the form itself is chart independent
    chart, coef = omega_form(PARABOLA, 0.0, (1, 1))
    assert chart == 2 and coef == -0.5
    assert dz1_coefficient(PARABOLA, (1, 1), chart, coef) == -1
    assert omega_form(SQRT, 0.0, (0.25, 0.5)) == (1, -1)
    chart, coef = omega_form(SQRT, 0.0, (0.0001, 0.01))
    assert chart == 2 and coef == -1
    # the branch point of the projection is a smooth point of the curve
    assert omega_form(SQRT, 0.0, (0, 0)) == (2, -1)
    with pytest.raises(SingularPointOfCurve):
        omega_form(CUSP, 0.0, (0, 0))


@settings(max_examples=100, deadline=None)
@given(complex_pt, complex_pt)
def test_plane_kernel_is_cauchy_kernel(zp, z):
    if abs(zp - z) < 1e-6:
        return
    k = kernel_k(PLANE, 0.0, (zp, 0), (z, 0))
    assert k == pytest.approx(1 / (zp - z), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(complex_pt, complex_pt)
def test_plane_kernel_swap(zp, z):
    if abs(zp - z) < 1e-6:
        return
    assert kernel_k(PLANE, 0.0, (z, 0), (zp, 0)) == pytest.approx(-kernel_k(PLANE, 0.0, (zp, 0), (z, 0)))


def test_diagonal_kernel():
    # Q = (-1, 1), beta = conj(d) (1, 1) / (2 |d|^2): k = 1 / d
    zp, z = 0.3 + 0.4j, -0.2j
    k = kernel_k(DIAGONAL, 0.0, (zp, zp), (z, z))
    assert k == pytest.approx(1 / (zp - z))
    # against dz1 ^ dz1-bar the induced area doubles, so k dA = 1/(2 (zeta' - zeta)) dA_induced
    assert k / 2 == pytest.approx(1 / (2 * (zp - z)))
    with pytest.raises(SingularPoint):
        kernel_k(DIAGONAL, 0.0, (z, z), (z, z))


# -- discretization --------------------------------------------------------

def test_discretization_invariants(plane_disc, disk):
    d = plane_disc
    assert 9000 < d.n < 11000
    assert np.all(d.weight > 0)
    assert np.abs(PLANE(d.zeta, d.z2)).max() < 1e-8
    assert np.all(np.abs(d.zeta) < 1.1 + d.h)
    assert np.all(np.abs(d.zeta[d.boundary]) > 1.1 - 2 * d.h)
    np.testing.assert_array_equal(d.inside, np.abs(d.zeta) < 1)
    g = CurveDiscretization.build(PARABOLA, sample_curve(fx.graph_spec(2), 256), 2500)
    np.testing.assert_allclose(g.z2, g.zeta ** 2, atol=1e-15)
    assert g.slope == 1


def test_two_sheeted_piece_charts():
    d = CurveDiscretization.build(SQRT, sample_curve(fx.sqrt_spec(), 256), 400)
    assert d.slope is None
    assert np.abs(SQRT(d.zeta, d.z2)).max() < 1e-8
    F1, F2 = SQRT.grad(d.zeta, d.z2)
    dom = np.where(d.chart == 1, np.abs(F2), np.abs(F1))
    assert np.all(dom >= np.minimum(np.abs(F1), np.abs(F2)))
    assert np.all(d.chart[np.abs(d.zeta) < 0.2] == 2)


# -- dbar-solver -----------------------------------------------------------

def test_dbar_of_zero(plane_disc):
    assert np.all(dbar_solve(plane_disc, np.zeros(plane_disc.n)).values == 0)


def test_dbar_support_enforced(plane_disc):
    with pytest.raises(InvalidSpec):
        dbar_solve(plane_disc, np.ones(plane_disc.n))
    with pytest.raises(InvalidSpec):
        dbar_solve(plane_disc, np.ones(3))


def test_dbar_inverts_bumps(plane_disc):
    for case in dbar_cases():
        chi, dchi = case(plane_disc.zeta)
        r = dbar_solve(plane_disc, dchi).values
        assert np.abs(r - chi)[plane_disc.inside].max() < 1e-3


def test_dbar_error_decreases_with_refinement(disk):
    chi_fn = dbar_cases()[1]
    errs = []
    for n in (2500, 10000):
        d = CurveDiscretization.build(PLANE, disk, n)
        chi, dchi = chi_fn(d.zeta)
        errs.append(np.abs(dbar_solve(d, dchi).values - chi)[d.inside].max())
    # at least linear in h (h halves)
    assert errs[1] <= errs[0] / 2


def test_dbar_of_dzbar_is_zbar_plus_holomorphic(plane_disc):
    d = plane_disc
    f = np.where(d.boundary, 0.0, 1.0).astype(complex)
    r = dbar_solve(d, f).values
    # the remainder r - zbar must be holomorphic: its discrete Laplacian vanishes
    # away from the cut-off ring
    good, lap = discrete_laplacian(d, r - np.conj(d.zeta))
    inner = np.abs(d.zeta[good]) < 0.9
    assert np.abs(lap[inner]).max() < 1e-3


def test_generic_kernel_route_matches_fast_path():
    gam = sample_curve(fx.graph_spec(2), 256)
    d = CurveDiscretization.build(PARABOLA, gam, 1600)
    slow = dataclasses.replace(d, slope=None)
    chi, dchi = dbar_cases()[0](d.zeta)
    np.testing.assert_allclose(dbar_solve(d, dchi).values, dbar_solve(slow, dchi).values, atol=1e-12)
    from plateau.green import _green_sum
    star = d.nearest(0.1)
    np.testing.assert_allclose(_green_sum(d, star), _green_sum(slow, star), atol=1e-12)


# -- Green function --------------------------------------------------------

def test_green_pairing(plane_disc):
    star = plane_disc.nearest(0.05 + 0.03j)
    for case in pairing_cases():
        chi, lap = case(plane_disc.zeta)
        got = distributional_pairing(plane_disc, star, lap)
        assert abs(got - chi[star]) < 5e-2


def test_green_pairing_improves(disk, plane_disc):
    fine = CurveDiscretization.build(PLANE, disk, 40000)
    case = pairing_cases()[1]
    errs = []
    for d in (plane_disc, fine):
        star = d.nearest(0.05 + 0.03j)
        chi, lap = case(d.zeta)
        errs.append(abs(distributional_pairing(d, star, lap) - chi[star]))
    assert errs[1] < errs[0] and errs[1] < 2e-2


def test_green_harmonic_away_from_pole(plane_disc):
    d = plane_disc
    star = d.nearest(0.05 + 0.03j)
    _, g = green_field(d, star)
    good, lap = discrete_laplacian(d, g)
    far = d.inside[good] & (np.abs(d.zeta[good] - d.zeta[star]) > 8 * d.h)
    assert np.abs(lap[far]).max() < 1e-3


def test_green_vs_disk_green_up_to_harmonic(plane_disc):
    # g - disk Green function is harmonic inside the disk
    d = plane_disc
    star = d.nearest(0.2)
    _, g = green_field(d, star)
    with np.errstate(divide="ignore", invalid="ignore"):
        good, lap = discrete_laplacian(d, g.real - disk_green(d.zeta, d.zeta[star]))
    far = d.inside[good] & (np.abs(d.zeta[good] - d.zeta[star]) > 8 * d.h)
    assert np.abs(lap[far]).max() < 1e-3


def test_green_eval(plane_disc):
    d = plane_disc
    star = d.nearest(0.0)
    with pytest.raises(SingularPoint):
        green_eval(d, star, star)
    target = d.nearest(0.4)
    _, g = green_field(d, star)
    assert green_eval(d, star, target, richardson=False) == g[target]
    assert abs(green_eval(d, star, target) - g[target]) < 1e-2


# -- Cauchy data -----------------------------------------------------------

def test_constant_datum_has_no_alpha(disk):
    d = cauchy_datum(disk, np.ones(disk.n), np.zeros(disk.n))
    assert np.abs(d.alpha).max() < 1e-13


@pytest.mark.parametrize("p", [1, 3])
def test_datum_of_harmonic_polynomial(disk, p):
    # alpha = d(Re z^p) restricted to the circle, dz1 coefficient p z^(p-1) / 2
    th = disk.params
    u = np.cos(p * th)
    d = cauchy_datum(disk, u, p * np.cos(p * th))
    np.testing.assert_allclose(d.alpha, p * disk.nodes[:, 0] ** (p - 1) / 2, atol=1e-12)
    np.testing.assert_allclose(neumann_of_real_part(disk, lambda z: p * z ** (p - 1)), p * u, atol=1e-12)


def test_frames_orthonormal(disk):
    d = cauchy_datum(disk, np.zeros(disk.n), np.zeros(disk.n))
    np.testing.assert_allclose((np.abs(d.tau) ** 2).sum(axis=1), 1, atol=1e-14)
    np.testing.assert_allclose((d.nu * np.conj(d.tau)).sum(axis=1).real, 0, atol=1e-14)
    with pytest.raises(InvalidSpec):
        cauchy_datum(disk, np.zeros(3), np.zeros(3))


# -- moment test and extension ---------------------------------------------

def datum_for(curve, H, dH):
    return cauchy_datum(curve, H(curve.nodes[:, 0]).real, neumann_of_real_part(curve, dH))


def interior_targets(disc):
    return disc.zeta[disc.inside & (disc.distance_to_curve() > 0.1)]


def test_moment_test(disk, plane_disc):
    ext = exterior_points(plane_disc)
    assert len(ext) > 100
    assert green_moment_test(datum_for(disk, lambda z: z ** 3, lambda z: 3 * z ** 2), ext) < 1e-3
    assert green_moment_test(cauchy_datum(disk, 2 * np.ones(disk.n), np.zeros(disk.n)), ext) < 1e-3
    bad = cauchy_datum(disk, disk.nodes[:, 0].real, neumann_of_real_part(disk, lambda z: 2 * z))
    assert green_moment_test(bad, ext) > 1e-2
    with pytest.raises(ObstructedExtension):
        harmonic_extend(plane_disc, bad, [0.0])


@pytest.mark.parametrize("power", [0, 1, 3])
def test_disk_extension(disk, plane_disc, power):
    H = lambda z: z ** power + 0j
    dH = lambda z: power * z ** max(power - 1, 0) if power else 0 * z
    d = datum_for(disk, H, dH)
    tg = interior_targets(plane_disc)
    U, res = harmonic_extend(plane_disc, d, tg)
    assert np.abs(U - H(tg).real).max() < 1e-3
    assert res < 1e-3
    assert jump_check(d) < 5e-3


def test_constant_extends_inside_only(disk, plane_disc):
    d = cauchy_datum(disk, np.ones(disk.n), np.zeros(disk.n))
    outside = exterior_points(plane_disc)
    np.testing.assert_allclose(extension_values(d, outside).real, 0, atol=1e-3)
    up, um = jump_values(d, 0.05)
    np.testing.assert_allclose(up, 1, atol=1e-3)
    np.testing.assert_allclose(um, 0, atol=1e-3)


def test_zero_datum_jump(disk):
    assert jump_check(cauchy_datum(disk, np.zeros(disk.n), np.zeros(disk.n))) == 0


@pytest.mark.parametrize("power", [0, 1, 3])
def test_graph_extension(power):
    gam = sample_curve(fx.graph_spec(2), 256)
    disc = CurveDiscretization.build(PARABOLA, gam, 10000)
    H = lambda z: z ** power + 0j
    dH = lambda z: power * z ** max(power - 1, 0) if power else 0 * z
    d = datum_for(gam, H, dH)
    tg = interior_targets(disc)
    U, _ = harmonic_extend(disc, d, tg)
    assert np.abs(U - H(tg).real).max() < 1e-3
    assert jump_check(d) < 5e-3


def test_extension_needs_graph_leaf():
    gam = sample_curve(fx.graph_spec(2), 256)
    disc = dataclasses.replace(CurveDiscretization.build(PARABOLA, gam, 400), slope=None)
    with pytest.raises(UseAlternative):
        harmonic_extend(disc, datum_for(gam, lambda z: z + 0j, lambda z: 1 + 0 * z), [0.0])


def curve_t(t):
    spec = CurveSpec({Fraction(1): np.array([1 + 0j])},
                     {Fraction(2): np.array([1 + 0j]), Fraction(0): np.array([t + 0j])})
    return sample_curve(spec, 256, t=t)


def test_extension_smooth_in_parameter():
    # F = z2 - z1^2 - t, u = Re z2^2 on the leaf; U = Re (z1^2 + t)^2
    F = DefiningFunction.from_json(fx.parabola_function(True))
    pts = np.array([0.2 + 0.1j, -0.3j, 0.5])
    second = []
    for h in (0.1, 0.05, 0.025):
        U = []
        for t in (-h, 0.0, h):
            c = curve_t(t)
            assert np.abs(F(c.nodes[:, 0], c.nodes[:, 1], t)).max() < 1e-12
            d = cauchy_datum(c, (c.nodes[:, 1] ** 2).real,
                             neumann_of_real_part(c, lambda z: 4 * z * (z ** 2 + t)))
            disc = CurveDiscretization.build(F, c, 2500, t=t)
            U.append(harmonic_extend(disc, d, pts)[0])
        second.append((U[0] - 2 * U[1] + U[2]) / h ** 2)
    second = np.array(second)
    # d^2/dt^2 Re (z^2 + t)^2 = 2
    np.testing.assert_allclose(second, 2, atol=1e-6)
    assert np.ptp(second, axis=0).max() < 1e-6


def test_values_csv():
    text = values_csv(np.array([0.5 + 0.25j]), np.array([0.0j]), np.array([1 / 3]), 0.0)
    head, row = text.splitlines()
    assert head == "re_z1,im_z1,re_z2,im_z2,value,residual"
    assert row.split(",")[4] == "0.33333333333333331"
