import math

import numpy as np
import pytest

from metamap.map_model import (Branch, HypothesisViolation, MapModelError,
                               PerturbationFamily, PiecewiseMap,
                               branch_preimages, distortion, evaluate,
                               infinitesimal_holes, min_expansion,
                               postcritical_points, validate_hypotheses)
from metamap.transfer_operator import DensityGrid
from metamap.families import doubling_map


def test_evaluate_branch_interior(fam_a):
    # 0.25 sits inside the branch 3x - 1/2
    assert evaluate(fam_a.base, 0.25) == (0.25,)


def test_evaluate_bivalued_at_shared_endpoint(fam_a):
    # one-sided limits of 3x and 3x - 1/2 at x = 1/6
    vals = evaluate(fam_a.base, 1 / 6)
    assert len(vals) == 2
    assert abs(vals[0] - 0.5) < 1e-14 and abs(vals[1] - 0.0) < 1e-14


def test_evaluate_fixed_endpoint(fam_a):
    assert evaluate(fam_a.base, 0.0) == (0.0,)


def test_evaluate_dedups_equal_limits(fam_a):
    # both branches adjacent to 1/3 send it to 1/2
    assert evaluate(fam_a.base, 1 / 3) == pytest.approx((0.5,), abs=1e-14)


def test_evaluate_outside_domain_raises(fam_a):
    with pytest.raises(MapModelError):
        evaluate(fam_a.base, 1.2)


def test_evaluate_matches_branch_formula_on_interiors(fam_a):
    rng = np.random.default_rng(7)
    T = fam_a.base
    for _ in range(300):
        br = T.branches[rng.integers(len(T.branches))]
        x = rng.uniform(br.domain.lo + 1e-6, br.domain.hi - 1e-6)
        vals = evaluate(T, x)
        assert len(vals) == 1
        assert abs(vals[0] - (br.slope * x + br.intercept)) <= 1e-14


def test_min_expansion_family_a(fam_a):
    assert min_expansion(fam_a.base) == 3.0


def test_min_expansion_doubling():
    assert min_expansion(doubling_map()) == 2.0


def test_min_expansion_mixed_slopes():
    m = PiecewiseMap([Branch.affine(0, 0.5, 1.5, 0),
                      Branch.affine(0.5, 1, 1.6, -0.8)])
    assert min_expansion(m) == 1.5
    fam = PerturbationFamily(base=m, boundary_b=0.75)
    report = validate_hypotheses(fam, depth=2)
    assert not report.passes_I4a


def test_distortion_affine_is_zero(fam_a):
    assert distortion(fam_a.base) == 0.0
    assert distortion(fam_a.instantiate(0.037)) == 0.0


def _smooth_plus_affine_map():
    # x^2 + 2x maps [0, sqrt(2)-1] onto [0, 1]; an affine branch closes [0,1]
    a = math.sqrt(2) - 1
    smooth = Branch.smooth(0.0, a, lambda x: x * x + 2 * x,
                           lambda x: 2 * x + 2, lambda x: 2.0)
    affine = Branch.affine(a, 1.0, 1 / (1 - a), -a / (1 - a))
    return PiecewiseMap([smooth, affine])


def test_distortion_smooth_branch_dense_grid_oracle():
    m = _smooth_plus_affine_map()
    a = math.sqrt(2) - 1
    xs = np.linspace(0.0, a, 200001)
    oracle = np.max(2.0 / np.abs(2 * xs + 2))    # sup |T''| / |T'| by brute force
    assert oracle == pytest.approx(1.0, abs=1e-9)
    assert distortion(m) == pytest.approx(oracle, abs=1e-4)


def test_branch_preimages_of_half(fam_a):
    got = branch_preimages(fam_a.base, 0.5)
    expected = [(1 / 6, 0), (1 / 3, 1), (1 / 3, 2), (2 / 3, 3), (2 / 3, 4), (5 / 6, 5)]
    assert len(got) == len(expected)
    for (x, i), (xe, ie) in zip(got, expected):
        assert i == ie and abs(x - xe) <= 1e-12


def test_branch_preimages_of_zero(fam_a):
    got = branch_preimages(fam_a.base, 0.0)
    expected = [(0.0, 0), (1 / 6, 1), (0.5, 2)]
    assert len(got) == len(expected)
    for (x, i), (xe, ie) in zip(got, expected):
        assert i == ie and abs(x - xe) <= 1e-12


def test_branch_without_y_in_image_contributes_nothing(fam_a):
    # 0.9 lies only in the images of the three right branches
    got = branch_preimages(fam_a.base, 0.9)
    assert [i for _, i in got] == [3, 4, 5]


def test_preimage_evaluate_round_trip(fam_a):
    rng = np.random.default_rng(11)
    T = fam_a.instantiate(0.01)
    for _ in range(1000):
        x = rng.uniform(1e-9, 1 - 1e-9)
        y = T(x)
        pres = [p for p, _ in branch_preimages(T, y)]
        assert min(abs(p - x) for p in pres) <= 1e-12


def test_smooth_preimage_bracketing():
    m = _smooth_plus_affine_map()
    br = m.branches[0]
    for y in (0.1, 0.5, 0.9):
        x = br.preimage(y)
        assert abs(x * x + 2 * x - y) <= 1e-11


def test_infinitesimal_holes_family_a(fam_a):
    holes = infinitesimal_holes(fam_a.base, 0.5)
    assert np.allclose(holes, [1 / 6, 1 / 3, 2 / 3, 5 / 6], atol=1e-12)


def test_infinitesimal_holes_family_b(fam_b):
    # right-branch bottoms include the endpoint x = 1 (its one-sided value is 1/2)
    holes = infinitesimal_holes(fam_b.base, 0.5)
    assert np.allclose(holes, [1 / 6, 1 / 3, 2 / 3, 5 / 6, 1.0], atol=1e-12)


def test_infinitesimal_holes_subset_of_critical_set(fam_a, fam_b):
    for fam in (fam_a, fam_b):
        crit = fam.base.critical_set
        for h in infinitesimal_holes(fam.base, 0.5):
            assert min(abs(h - c) for c in crit) <= 1e-12


def test_no_holes_when_only_b_maps_to_b():
    m = PiecewiseMap([
        Branch.affine(0.0, 0.25, 1.6, 0.0),      # image [0, 0.4], misses 1/2
        Branch.affine(0.25, 0.5, 2.0, -0.5),     # attains 1/2 only at x = 1/2
        Branch.affine(0.5, 0.75, 2.0, -0.5),     # attains 1/2 only at x = 1/2
        Branch.affine(0.75, 1.0, 1.6, -0.6),     # image [0.6, 1], misses 1/2
    ])
    assert infinitesimal_holes(m, 0.5) == []


def test_interior_preimage_of_b_is_a_violation():
    # full-branch map without invariant halves: preimages of b are interior
    m = PiecewiseMap([Branch.affine(0, 0.4, 2.5, 0),
                      Branch.affine(0.4, 0.8, 2.5, -1.0),
                      Branch.affine(0.8, 1.0, 5.0, -4.0)])
    with pytest.raises(HypothesisViolation):
        infinitesimal_holes(m, 0.5)


def test_validate_family_a_passes(fam_a):
    report = validate_hypotheses(fam_a, depth=8)
    assert report.passes_I2 and report.passes_I4a and report.passes_P2
    assert report.min_expansion == 3.0 and report.distortion == 0.0
    layers = postcritical_points(fam_a.base, 8)
    every = sorted({p for pts in layers.values() for p in pts})
    assert np.allclose(every, [0.0, 0.5, 1.0], atol=1e-12)


def test_validate_family_a_with_densities_checks_I3(fam_a):
    n = 384
    from metamap.map_model import Interval
    phi_l = DensityGrid.indicator(Interval(0, 0.5), n, normalize=True)
    phi_r = DensityGrid.indicator(Interval(0.5, 1), n, normalize=True)
    report = validate_hypotheses(fam_a, depth=8, phi_l=phi_l, phi_r=phi_r)
    assert report.passes_I3 is True
    report = validate_hypotheses(fam_a, depth=8)
    assert report.passes_I3 is None


def test_validate_family_b_boundary_failure(fam_b):
    report = validate_hypotheses(fam_b, depth=8)
    assert not report.passes_P2
    assert any("T0(b-)" in d for d in report.diagnostics)
    # the endpoint hole at 1 is also hit by the critical orbit
    assert not report.passes_I2


def test_validate_doubling_fails_I4a():
    fam = PerturbationFamily(base=doubling_map(), boundary_b=0.5)
    report = validate_hypotheses(fam, depth=4)
    assert not report.passes_I4a
    assert any("(I4a)" in d for d in report.diagnostics)


def test_failed_predicates_have_diagnostics(fam_b):
    report = validate_hypotheses(fam_b, depth=8)
    if not report.passes_I2:
        assert any("(I2)" in d for d in report.diagnostics)
    if not report.passes_P2:
        assert any("(P2" in d for d in report.diagnostics)


def test_instantiate_at_zero_is_base(fam_a):
    T0 = fam_a.instantiate(0.0)
    assert T0 is fam_a.base
    for b0, b1 in zip(T0.branches, fam_a.base.branches):
        assert b0.slope == b1.slope and b0.intercept == b1.intercept


def test_instantiate_perturbs_declared_branches(fam_a):
    T = fam_a.instantiate(0.01)
    assert T.branches[1].intercept == pytest.approx(-0.5 + 0.03, abs=1e-15)
    assert T.branches[4].intercept == pytest.approx(-1.5 - 0.01, abs=1e-15)
    for i in (0, 2, 3, 5):
        assert T.branches[i].intercept == fam_a.base.branches[i].intercept
    assert T.critical_set == fam_a.base.critical_set


def test_branch_domains_tile_unit_interval(fam_a, fam_b):
    for fam in (fam_a, fam_b):
        crit = fam.base.critical_set
        assert crit[0] == 0.0 and crit[-1] == 1.0
        for a, b in zip(fam.base.branches, fam.base.branches[1:]):
            assert a.domain.hi == b.domain.lo


def test_overlapping_domains_rejected():
    with pytest.raises(MapModelError):
        PiecewiseMap([Branch.affine(0, 0.6, 2, 0, ),
                      Branch.affine(0.5, 1, 2, -1)])


def test_gap_in_domains_rejected():
    with pytest.raises(MapModelError):
        PiecewiseMap([Branch.affine(0, 0.4, 2, 0),
                      Branch.affine(0.5, 1, 2, -1)])


def test_non_expanding_branch_rejected():
    with pytest.raises(MapModelError):
        Branch.affine(0, 1, 0.8, 0)


def test_branch_image_escaping_rejected():
    with pytest.raises(MapModelError):
        Branch.affine(0, 0.5, 3, 0)    # image [0, 1.5]


def test_smooth_branch_perturbation():
    # additive callable perturbation: branch value becomes f + eps * g
    a = math.sqrt(2) - 1
    base = _smooth_plus_affine_map()
    bump = (lambda x: x * (a - x), lambda x: a - 2 * x, lambda x: -2.0)
    fam = PerturbationFamily(base=base, smooth_eps=(bump, None),
                             boundary_b=a)
    eps = 0.01
    T = fam.instantiate(eps)
    for x in (0.1, 0.2, 0.3):
        expected = (x * x + 2 * x) + eps * x * (a - x)
        assert evaluate(T, x)[0] == pytest.approx(expected, abs=1e-14)
    # the affine branch is untouched
    assert T.branches[1].slope == base.branches[1].slope


def test_family_b_definition_matches_mod_formula(fam_b):
    # T_eps(x) = [(3x mod 1/2) + 3eps]1_{x<1/2} + [(-3x mod 1/2) + 1/2 - eps]1_{x>1/2}
    eps = 0.01
    T = fam_b.instantiate(eps)
    rng = np.random.default_rng(3)
    for _ in range(500):
        x = rng.uniform(1e-6, 1 - 1e-6)
        if abs(x - 0.5) < 1e-9:
            continue
        if x < 0.5:
            expected = (3 * x) % 0.5 + 3 * eps
        else:
            expected = (-3 * x) % 0.5 + 0.5 - eps
        vals = evaluate(T, x)
        assert min(abs(v - expected) for v in vals) <= 1e-9
