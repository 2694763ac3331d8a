import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plateau import fixtures as fx
from plateau.errors import InvalidSpec, NearBoundary, OutOfRange, SingularPoint, UseAlternative
from plateau.geometry import BOUNDARY, family_from_json
from plateau.moments import (build_moment_table, family_moment_direct, family_moment_poincare,
                             fiber_moments, moment_residual, poincare_form, power_sum, power_sums,
                             table_rows, table_to_json)
from plateau.polynomials import BiPoly, HolomorphicTestForm, holomorphic_basis
from plateau.reconstruct import slice_component_map
from oracles import graph_power_sum, sqrt_power_sum


def curve(name, n=256):
    return fx.family(name, n).slices[0]


# -- power sums ------------------------------------------------------------

def test_power_sum_examples():
    assert abs(power_sum(curve("disk"), 1, 0.3)) < 1e-15
    assert power_sum(curve("graph2"), 1, 0.3) == pytest.approx(0.09, abs=1e-14)
    assert power_sum(curve("sqrt"), 2, 0.25) == pytest.approx(0.5, abs=1e-14)


def test_power_sum_near_curve():
    with pytest.raises(NearBoundary):
        power_sum(curve("disk"), 1, 1.001)
    with pytest.raises(InvalidSpec):
        power_sum(curve("disk"), -1, 0.0)


def test_power_sum_linear_in_curve_list():
    a, b = curve("annulus")
    z = np.array([0.7, 0.2j, 1.5])
    np.testing.assert_allclose(power_sum([a, b], 2, z), power_sum([a], 2, z) + power_sum([b], 2, z),
                               atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 4), st.floats(0.0, 0.85), st.floats(0, 2 * np.pi))
def test_reversal_negates_power_sums(k, r, phi):
    z = r * np.exp(1j * phi)
    c = curve("graph3", 128)[0]
    assert power_sum(c.reversed(), k, z) == pytest.approx(-power_sum(c, k, z), abs=1e-13)


def test_fiber_moments_near_the_contour():
    # upsampled evaluation stays spectrally accurate close to the curve
    z = np.array([0.99, 0.995j, -0.999])
    S = fiber_moments(curve("graph2"), z, 3)
    for k in range(4):
        np.testing.assert_allclose(S[k], graph_power_sum(z, 2, k), atol=1e-11)


# -- tables ----------------------------------------------------------------

def table(name, kmax=None, n=256):
    cs = curve(name, n)
    return build_moment_table(cs, slice_component_map(cs), kmax)


def test_graph_table_matches_cauchy_formula():
    tb = table("graph2", 3)
    inner = tb.cmap.label == 1
    z = tb.cmap.grid.points[inner]
    for k in range(4):
        np.testing.assert_allclose(tb.values[k][inner], graph_power_sum(z, 2, k), atol=1e-10)
    assert np.abs(tb.values[1:, tb.cmap.label == 0]).max() < 1e-10


def test_sqrt_table_two_sheets():
    tb = table("sqrt", 4)
    inner = tb.cmap.label == 1
    z = tb.cmap.grid.points[inner]
    np.testing.assert_allclose(tb.values[0][inner], 2, atol=1e-10)
    np.testing.assert_allclose(tb.values[1][inner], 0, atol=1e-10)
    np.testing.assert_allclose(tb.values[3][inner], 0, atol=1e-10)
    np.testing.assert_allclose(tb.values[2][inner], sqrt_power_sum(z, 2), atol=1e-10)
    np.testing.assert_allclose(tb.values[4][inner], sqrt_power_sum(z, 4), atol=1e-10)


def test_table_s0_equals_winding():
    tb = table("annulus")
    ok = tb.cmap.label != BOUNDARY
    wind = np.vectorize(tb.cmap.winding.get)(tb.cmap.label[ok])
    assert np.abs(tb.values[0][ok] - wind).max() < 1e-6
    assert tb.s0_residual() < 1e-6


def test_empty_slice_table():
    tb = build_moment_table((), slice_component_map(curve("disk")), 2)
    assert tb.empty and moment_residual(tb) == 0.0


def test_kmax_below_degree_rejected():
    cs = curve("sqrt")
    with pytest.raises(InvalidSpec):
        build_moment_table(cs, slice_component_map(cs), 1)


def test_moment_residuals():
    assert moment_residual(table("graph2")) < 1e-10
    assert moment_residual(table("disk")) == 0.0


def test_table_export():
    tb = table("disk", 1, 64)
    rows = list(table_rows(tb))
    ok = int((tb.cmap.label != BOUNDARY).sum())
    assert rows[0] == "re_zeta,im_zeta,component,k,re_S,im_S"
    assert len(rows) == 1 + 2 * ok
    doc = table_to_json(tb)
    assert doc["kMax"] == 1 and len(doc["values"][0]) == ok


# -- Poincare form and the family integral ---------------------------------

def test_poincare_form_values():
    assert poincare_form(0.7, 0.2)[0] == 0.5
    assert poincare_form(-0.1, 0.2)[0] == -0.5
    with pytest.raises(SingularPoint):
        poincare_form(0.2, 0.2)


def test_direct_integral_vanishes_on_torus():
    fam = fx.family("torus")
    h = HolomorphicTestForm.monomial(0, 1, 1)      # z2 dz1
    dz1 = HolomorphicTestForm.monomial(0, 0, 1)
    for t in fam.t_grid:
        assert abs(family_moment_direct(fam, h, t)) < 1e-12
        assert abs(family_moment_direct(fam, dz1, t)) < 1e-12


def test_direct_integral_empty_slice_and_non_transverse():
    doc = fx.single_slice_doc(fx.disk_spec(), "disk")
    doc["tGrid"] = [0.0, 1.0]
    fam = family_from_json(doc, 64)
    assert family_moment_direct(fam, HolomorphicTestForm.monomial(1, 0, 2), 1.0) == 0
    doc["nonTransverse"] = [0.0]
    with pytest.raises(UseAlternative):
        family_moment_direct(family_from_json(doc, 64), HolomorphicTestForm.monomial(1, 0, 2), 0.0)


def test_direct_integral_detects_missing_filling():
    # the sphere slices (r e^{i th}, r e^{-i th}) bound no holomorphic chain:
    # the integral of z2 dz1 is 2 pi i r^2
    fam = family_from_json(fx.sphere_doc(), 256)
    h = HolomorphicTestForm.monomial(0, 1, 1)
    for t in fam.t_grid:
        assert family_moment_direct(fam, h, t) == pytest.approx(2j * np.pi * (1 - t * t), abs=1e-12)


def test_poincare_route_agrees_with_direct():
    S = fx.torus_surface()
    fam = fx.family("torus")
    for h in holomorphic_basis(2):
        for t in fam.t_grid[::5]:
            assert abs(family_moment_poincare(S, h, t) - family_moment_direct(fam, h, t)) < 1e-6
    sph = fx.sphere_surface()
    sfam = family_from_json(fx.sphere_doc(), 256)
    h = HolomorphicTestForm.monomial(0, 1, 1)
    for t in sfam.t_grid[::2]:
        assert abs(family_moment_poincare(sph, h, t) - family_moment_direct(sfam, h, t)) < 1e-6


def test_poincare_closed_form_and_range():
    S = fx.torus_surface()
    closed = HolomorphicTestForm.monomial(2, 0, 1)      # z1^2 dz1 = d(z1^3 / 3)
    assert family_moment_poincare(S, closed, 0.3) == 0
    with pytest.raises(OutOfRange):
        family_moment_poincare(S, closed, 1.5)


def test_test_form_degree_bound():
    big = BiPoly.from_terms([(13, 0, [1.0])])
    with pytest.raises(InvalidSpec):
        HolomorphicTestForm(big, BiPoly.from_terms([]))


def test_spectral_convergence_of_outer_moments():
    cm = slice_component_map(curve("graph2"))
    pts = cm.grid.points[cm.label == 0]
    res = [np.abs(power_sums(curve("graph2", n), pts, 4)[1:]).max() for n in (32, 64, 128, 256)]
    eps = np.finfo(float).eps
    for a, b in zip(res, res[1:]):
        assert b <= a * a + 16 * eps
    assert res[-1] < 1e-10
