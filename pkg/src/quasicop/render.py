"""Rasterising support approximations and writing them as binary PGM/PPM."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ifs_support import SupportApprox

EMPTY, POSITIVE, NEGATIVE, MIXED = 0, 1, 2, 3

PGM_LEVELS = {EMPTY: 255, POSITIVE: 170, NEGATIVE: 60, MIXED: 110}
PPM_COLOURS = {
    EMPTY: (255, 255, 255),
    POSITIVE: (170, 170, 170),
    NEGATIVE: (60, 60, 60),
    MIXED: (255, 0, 0),
}


class ResolutionTooSmall(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass
class SignedMask:
    """Pixel classes in image order: row 0 is the top edge (v = 1)."""

    cells: np.ndarray

    @property
    def resolution(self) -> int:
        return self.cells.shape[0]

    @property
    def occupied(self) -> np.ndarray:
        return self.cells != EMPTY

    def region(self, u1, u2, v1, v2) -> np.ndarray:
        """Sub-array of pixels lying inside ``[u1,u2] x [v1,v2]`` (fractions of the side)."""
        n = self.resolution
        c0, c1 = int(u1 * n), int(u2 * n)
        r0, r1 = n - int(v2 * n), n - int(v1 * n)
        return self.cells[r0:r1, c0:c1]


def _coverage(n: int, r0, r1, c0, c1) -> np.ndarray:
    """Count how many of the inclusive pixel boxes cover each pixel."""
    diff = np.zeros((n + 1, n + 1), dtype=np.int64)
    np.add.at(diff, (r0, c0), 1)
    np.add.at(diff, (r0, c1 + 1), -1)
    np.add.at(diff, (r1 + 1, c0), -1)
    np.add.at(diff, (r1 + 1, c1 + 1), 1)
    return diff.cumsum(axis=0).cumsum(axis=1)[:n, :n]


def pixel_spans(lo, length, den: int, n: int):
    """First and last pixel whose interior meets ``[lo, lo+length] / den``."""
    first = (lo * n) // den
    last = -((-(lo + length) * n) // den) - 1
    return np.asarray(first, dtype=np.int64), np.asarray(last, dtype=np.int64)


def rasterize_support(S: SupportApprox, resolution: int) -> SignedMask:
    """Mark every pixel whose interior meets a rectangle, keeping the sign.

    Pixel ``k`` along an axis is ``[k/N, (k+1)/N]``; all tests are done on
    integer numerators, so the result is exact and deterministic.
    """
    n = int(resolution)
    if n < 16:
        raise ResolutionTooSmall(f"resolution must be at least 16, got {n}")
    if len(S) == 0:
        return SignedMask(np.zeros((n, n), dtype=np.uint8))
    c0, c1 = pixel_spans(S.u_lo, S.u_len, S.u_den, n)
    k0, k1 = pixel_spans(S.v_lo, S.v_len, S.v_den, n)
    # v grows upwards, image rows grow downwards
    r0, r1 = n - 1 - k1, n - 1 - k0
    pos = S.signs > 0
    neg = ~pos
    cells = np.zeros((n, n), dtype=np.uint8)
    if pos.any():
        cells[_coverage(n, r0[pos], r1[pos], c0[pos], c1[pos]) > 0] |= POSITIVE
    if neg.any():
        cells[_coverage(n, r0[neg], r1[neg], c0[neg], c1[neg]) > 0] |= NEGATIVE
    return SignedMask(cells)


def encode_image(mask: SignedMask, fmt: str = "PGM") -> bytes:
    fmt = fmt.upper()
    h, w = mask.cells.shape
    if fmt == "PGM":
        lut = np.array([PGM_LEVELS[k] for k in range(4)], dtype=np.uint8)
        return f"P5\n{w} {h}\n255\n".encode("ascii") + lut[mask.cells].tobytes()
    if fmt == "PPM":
        lut = np.array([PPM_COLOURS[k] for k in range(4)], dtype=np.uint8)
        return f"P6\n{w} {h}\n255\n".encode("ascii") + lut[mask.cells].tobytes()
    raise ValueError(f"unknown image format {fmt!r}")


def write_image(mask: SignedMask, fmt: str, path) -> None:
    try:
        Path(path).write_bytes(encode_image(mask, fmt))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_image(path) -> SignedMask:
    """Read a PGM/PPM written by :func:`write_image` back into pixel classes.

    Unknown grey levels or colours count as occupied-positive, which is what
    box counting needs from foreign images.
    """
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end].decode("ascii"))
        pos = end
    pos += 1
    magic, w, h, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    if magic == "P5":
        px = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos).reshape(h, w)
        cells = np.full((h, w), POSITIVE, dtype=np.uint8)
        for k, level in PGM_LEVELS.items():
            cells[px == level] = k
    elif magic == "P6":
        px = np.frombuffer(data, dtype=np.uint8, count=3 * w * h, offset=pos).reshape(h, w, 3)
        cells = np.full((h, w), POSITIVE, dtype=np.uint8)
        for k, rgb in PPM_COLOURS.items():
            cells[np.all(px == np.array(rgb, dtype=np.uint8), axis=2)] = k
    else:
        raise ValueError(f"not a binary PGM/PPM file (magic {magic!r})")
    return SignedMask(cells)
