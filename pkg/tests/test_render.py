from fractions import Fraction as F

import numpy as np
import pytest

from quasicop import ifs_support as ifs
from quasicop import render


def test_t0_plus_shape(t0):
    mask = render.rasterize_support(ifs.enumerate_support(t0, 1), 81)
    occ = mask.occupied
    third = [(0, 27), (27, 54), (54, 81)]
    for a, (r0, r1) in enumerate(third):
        for b, (c0, c1) in enumerate(third):
            block = occ[r0:r1, c0:c1]
            if a == 1 or b == 1:
                assert block.all()
            else:
                assert not block.any()
    assert (mask.cells[27:54, 27:54] == render.NEGATIVE).all()
    assert (mask.cells[0:27, 27:54] == render.POSITIVE).all()


def test_tr_big_square_and_block(tr_half):
    mask = render.rasterize_support(ifs.enumerate_support(tr_half, 1), 96)
    assert mask.region(0, F(1, 2), 0, F(1, 2)).all()
    assert not mask.region(0, F(1, 2), F(1, 2), 1).any()
    assert not mask.region(F(1, 2), 1, 0, F(1, 2)).any()
    assert mask.region(F(1, 2), 1, F(1, 2), 1).all()
    assert (mask.region(F(2, 3), F(5, 6), F(2, 3), F(5, 6)) == render.NEGATIVE).all()


def test_mixed_pixels(t0):
    # at depth 2 a pixel straddling a positive and a negative cell is mixed
    S = ifs.enumerate_support(t0, 2)
    mask = render.rasterize_support(S, 16)
    assert (mask.cells == render.MIXED).any()


def test_rasterization_is_exact_at_cell_edges(t0):
    S = ifs.enumerate_support(t0, 4)
    mask = render.rasterize_support(S, 81)
    assert mask.occupied.sum() == 625


def test_small_resolution(t0):
    with pytest.raises(render.ResolutionTooSmall):
        render.rasterize_support(ifs.enumerate_support(t0, 1), 8)


def test_pgm_layout():
    mask = render.SignedMask(np.array([[0, 1], [2, 3]], dtype=np.uint8))
    data = render.encode_image(mask, "PGM")
    assert data[:11] == b"P5\n2 2\n255\n"
    assert len(data) == 15
    assert list(data[11:]) == [255, 170, 60, 110]


def test_ppm_layout():
    mask = render.SignedMask(np.array([[0, 3], [2, 1]], dtype=np.uint8))
    data = render.encode_image(mask, "ppm")
    assert data.startswith(b"P6\n2 2\n255\n")
    assert list(data[11:17]) == [255, 255, 255, 255, 0, 0]


@pytest.mark.parametrize("fmt", ["PGM", "PPM"])
def test_image_round_trip(tmp_path, t0, fmt):
    mask = render.rasterize_support(ifs.enumerate_support(t0, 3), 27)
    path = tmp_path / f"m.{fmt.lower()}"
    render.write_image(mask, fmt, path)
    assert np.array_equal(render.read_image(path).cells, mask.cells)


def test_write_failure(tmp_path, t0):
    mask = render.rasterize_support(ifs.enumerate_support(t0, 1), 27)
    with pytest.raises(render.IoFailure):
        render.write_image(mask, "PGM", tmp_path / "missing" / "x.pgm")


def test_unknown_format():
    with pytest.raises(ValueError):
        render.encode_image(render.SignedMask(np.zeros((2, 2), dtype=np.uint8)), "PNG")


def test_depth6_area_fraction(t0):
    S = ifs.enumerate_support(t0, 6)
    mask = render.rasterize_support(S, 729)
    frac = mask.occupied.sum() / 729**2
    assert S.area() == F(5, 9) ** 6
    assert abs(frac / float(F(5, 9) ** 6) - 1) < 0.02
