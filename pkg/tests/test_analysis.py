import math

import numpy as np
import pytest

from translab import analysis, geom, grid, radial
from translab.analysis import VariationSpec
from translab.errors import (EmptyMaskError, PerturbationTooLargeError,
                             RegionOutOfBoundsError)


def reaper_strip(h=0.025, half=1.5, span=3.5):
    n = int(round(2 * span / h)) + 1
    m = int(round(2 * half / h)) + 1
    return grid.from_function(lambda X, Y: np.log(np.cos(Y)),
                              -span, span, -half, half, n, m)


def test_weighted_area_flat_and_constant():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -1, 1, -1, 1, 41, 41)
    assert abs(analysis.weighted_area(g, (-0.5, 0.5, -0.5, 0.5)) - 1.0) < 1e-12
    gc = grid.GridFunction(41, 41, 0.05, 0.05, -1.0, -1.0,
                           np.full((41, 41), 0.7))
    val = analysis.weighted_area(gc, (-0.5, 0.5, -0.5, 0.5))
    assert abs(val - math.exp(-0.7)) < 1e-12


def test_weighted_area_grim_reaper_closed_form():
    # int_{-1}^{1} e^{-log cos x} sec x dx = 2 tan 1, constant in y
    g = grid.from_function(lambda X, Y: np.log(np.cos(X)),
                           -1.3, 1.3, -0.5, 1.5, 261, 201)
    val = analysis.weighted_area(g, (-1.0, 1.0, 0.0, 1.0))
    assert abs(val - 2 * math.tan(1.0)) < 1e-4


def test_weighted_area_region_guard():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -1, 1, -1, 1, 21, 21)
    with pytest.raises(RegionOutOfBoundsError):
        analysis.weighted_area(g, (-2.0, 0.5, -0.5, 0.5))


def test_first_variation_vanishes_on_translator():
    vals = []
    for h in (0.05, 0.025):
        g = reaper_strip(h)
        spec = VariationSpec(center=(0, 0), radius=(1.2, 1.2), epsilon=1e-4)
        vals.append(abs(analysis.first_variation_check(g, spec)))
    assert vals[1] < 1e-3
    assert 3.0 <= vals[0] / vals[1] <= 5.0  # O(h^2)


def test_first_variation_negative_control():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -4, 4, -4, 4, 161, 161)
    spec = VariationSpec(center=(0, 0), radius=(1.5, 1.5), epsilon=1e-4)
    d = analysis.first_variation_check(g, spec)
    # d A = -int(phi) for the flat plane; the cos^2 bump integrates to rx*ry
    assert abs(d + 2.25) < 1e-6
    assert abs(d) >= 1e-3


def test_first_variation_epsilon_order():
    g = reaper_strip(0.025)
    ds = [analysis.first_variation_check(
        g, VariationSpec(center=(0, 0), radius=(1.2, 1.2), epsilon=e),
        richardson=False) for e in (0.2, 0.1, 0.05)]
    ratio = (ds[0] - ds[1]) / (ds[1] - ds[2])
    assert 3.4 <= ratio <= 4.6  # central difference converges at O(eps^2)


def test_first_variation_guards():
    g = reaper_strip(0.05)
    with pytest.raises(ValueError):
        analysis.first_variation_check(
            g, VariationSpec(center=(3.4, 0), radius=(1.0, 1.0)))
    with pytest.raises(PerturbationTooLargeError):
        analysis.first_variation_check(
            g, VariationSpec(center=(0, 0), radius=(1.2, 1.2), epsilon=1e300))


def test_stability_operator_basics():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -1, 1, -1, 1, 21, 21)
    G = geom.graph_geometry(g)
    zero = np.zeros_like(g.values)
    assert np.nanmax(np.abs(analysis.stability_apply(g, G, zero))) == 0.0
    # plane: e3.N = 1, |A|^2 = 0, so L(e3.N) = 0
    assert analysis.jacobi_field_defect(g, G) < 1e-12


def test_jacobi_field_on_bowl_refines_at_second_order():
    p = radial.shoot_bowl(2, 6.0, 1e-3)
    defs = []
    for n in (81, 161):
        gb = radial.profile_to_grid(p, -2, 2, -2, 2, n, n)
        defs.append(analysis.jacobi_field_defect(gb))
    assert defs[1] < 1e-3
    assert 3.0 <= defs[0] / defs[1] <= 5.0


def test_gradH_identity():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -1, 1, -1, 1, 21, 21)
    assert analysis.gradH_identity_check(g) < 1e-12  # both sides vanish

    p = radial.shoot_bowl(2, 6.0, 1e-3)
    defs = []
    for n in (81, 161):
        gb = radial.profile_to_grid(p, -2, 2, -2, 2, n, n)
        defs.append(analysis.gradH_identity_check(gb))
    assert defs[0] / defs[1] > 1.7  # at least halves when h halves


def test_spruck_xiao_on_tilted_reaper():
    from translab import catalog
    t = catalog.AnalyticTranslator(catalog.Kind.TILTED_GRIM_REAPER, math.pi / 6)
    g = catalog.sample_grid(t, 0.02, 0.9)
    rep = analysis.spruck_xiao_report(g)
    assert rep.orientationFlipped  # downward family seen with the upward normal
    h = max(g.hx, g.hy)
    # kappa2 = 0 identically: H/kappa1 = 1 up to discretization noise
    assert abs(rep.rangeHoverK1[0] - 1.0) < 10 * h
    assert abs(rep.rangeHoverK1[1] - 1.0) < 10 * h
    assert rep.fracInequalityHolds >= 0.99
    assert np.nanmax(np.abs(rep.lhsInequality[rep.mask])) < 10 * h


def test_spruck_xiao_flags_non_translator():
    # sphere cap: drift identity for H fails by 4/R^3
    R = 3.0
    g = grid.from_function(
        lambda X, Y: np.sqrt(R * R - X * X - Y * Y) - R, -1, 1, -1, 1, 81, 81)
    rep = analysis.spruck_xiao_report(g)
    assert rep.maxDefectDriftH > 0.1


def test_spruck_xiao_empty_mask_on_plane():
    g = grid.from_function(lambda X, Y: np.zeros_like(X), -1, 1, -1, 1, 21, 21)
    with pytest.raises(EmptyMaskError):
        analysis.spruck_xiao_report(g)
