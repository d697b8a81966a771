import math
from fractions import Fraction as F

import numpy as np
import pytest

from oracles import family_root, moran_root
from quasicop import ifs_support as ifs


def test_maps_of_t0(t0):
    maps = ifs.nonzero_maps(t0)
    assert len(maps) == 5
    assert ifs.all_similarities(maps)
    assert ifs.moran_check(maps)
    assert {f.ratio for f in maps} == {F(1, 3)}
    centre = next(f for f in maps if f.cell == (2, 2))
    assert centre(F(1, 2), F(1, 2)) == (F(1, 2), F(1, 2))


def test_moran_check_detects_overlap():
    a = ifs.SimilarityMap((1, 1), F(0), F(1, 2), F(0), F(1, 2), F(1, 2))
    b = ifs.SimilarityMap((1, 2), F(1, 4), F(1, 2), F(1, 4), F(1, 2), F(1, 2))
    assert not ifs.moran_check([a, b])


def test_support_depth2(t0):
    S = ifs.enumerate_support(t0, 2)
    assert len(S) == 25
    masses = S.masses()
    assert masses.count(F(-1, 9)) == 8
    assert S.total_mass() == 1
    assert S.area() == F(25, 81)
    r = S.rect(0)
    assert r.corners[1] - r.corners[0] == F(1, 9)


def test_support_json(t0):
    rec = ifs.enumerate_support(t0, 1).to_json()
    assert len(rec) == 5
    assert rec[0]["corners"] == [["0", "1/3"], ["1/3", "2/3"]]
    assert rec[0]["mass"] == "1/3"


def test_support_mass_for_tr(tr_half):
    S = ifs.enumerate_support(tr_half, 3)
    assert len(S) == 1000
    assert S.total_mass() == 1


def test_budget(t0):
    with pytest.raises(ifs.BudgetExceeded):
        ifs.enumerate_support(t0, 10, budget=1000)


def test_cover_cells_fit(tr_half):
    eps = F(1, 36)
    S = ifs.enumerate_cover(tr_half, eps)
    assert S.total_mass() == 1
    for k in range(len(S)):
        u1, u2, v1, v2 = S.corners(k)
        assert u2 - u1 <= eps and v2 - v1 <= eps


def test_moran_closed_forms(t0):
    assert abs(ifs.solve_moran([0.5] * 4).s - 2) < 1e-12
    ratios = [f.ratio for f in ifs.nonzero_maps(t0)]
    assert abs(ifs.solve_moran(ratios).s - math.log(5) / math.log(3)) < 1e-12


@pytest.mark.parametrize("ratios", [[0.3, 0.5, 0.1], [0.9, 0.05, 0.05, 0.05], [0.2] * 30])
def test_moran_against_brentq(ratios):
    assert abs(ifs.solve_moran(ratios).s - moran_root(ratios)) < 1e-11


def test_moran_errors():
    with pytest.raises(ifs.NoRootInRange):
        ifs.solve_moran([0.5])
    with pytest.raises(ValueError):
        ifs.solve_moran([0.5, 1.5])


@pytest.mark.parametrize("r", [0.01, 0.2, 0.5, 0.8, 0.99])
def test_s_of_r_against_brentq(r):
    assert abs(ifs.s_of_r(r).s - family_root(r)) < 1e-12
    assert abs(ifs.s_of_r(r, 3).s - family_root(r, 3)) < 1e-12


def test_family_derivative_is_numerical_derivative():
    s, r, h = 1.4, 0.3, 1e-6
    num = (ifs.family_equation(s, r + h) - ifs.family_equation(s, r - h)) / (2 * h)
    assert abs(num - ifs.family_equation_dr(s, r)) < 1e-7


def test_family_dimension_dispatch():
    r = 0.37
    s = ifs.family_dimension("s_of_r", r)
    assert abs(ifs.family_dimension("r_of_s", s) - r) < 1e-10
    with pytest.raises(ValueError):
        ifs.family_dimension("sideways", r)


def test_box_counting_full_square():
    bc = ifs.box_counting_estimate(np.ones((64, 64), dtype=bool), [F(1, 4), F(1, 8), F(1, 16)])
    assert abs(bc.dim - 2) < 1e-12
    assert bc.counts == (16, 64, 256)


def test_box_counting_rejects_bad_scales():
    mask = np.ones((64, 64), dtype=bool)
    with pytest.raises(ifs.DegenerateScales):
        ifs.box_counting_estimate(mask, [F(1, 3), F(1, 8), F(1, 16)])
    with pytest.raises(ifs.DegenerateScales):
        ifs.box_counting_estimate(mask, [F(1, 8), F(1, 16)])
    with pytest.raises(ifs.DegenerateScales):
        ifs.box_counting_estimate(np.zeros((64, 64), dtype=bool), [F(1, 4), F(1, 8), F(1, 16)])


@pytest.mark.parametrize("n", [3, 4])
def test_s_of_r_increasing_in_higher_dimension(n):
    ss = [ifs.s_of_r(r, n).s for r in np.linspace(0, 1, 42)[1:-1]]
    assert all(a < b for a, b in zip(ss, ss[1:]))
    assert 1 < ss[0] and ss[-1] < n
