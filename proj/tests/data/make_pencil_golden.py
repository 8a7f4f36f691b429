#!/usr/bin/env python3
"""Regenerates the pencil-filter golden pair used by the imagecore tests.

The expected output is computed here with numpy only, independently of the
C++ code: 5x5 midpoint ellipse, edge-replicated dilation, 255*G//P with 255
where P == 0.
"""
import os
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def make_input():
    rng = np.random.default_rng(20240611)
    img = rng.integers(0, 256, size=(32, 32), dtype=np.int64)
    yy, xx = np.mgrid[0:32, 0:32]
    img[:, 16:] = (xx[:, 16:] * 7 + yy[:, 16:] * 3) % 256   # ramp half
    img[20:28, 2:12] = 0                                    # dark patch: P == 0 inside
    img[0:6, 0:6] = 0                                       # dark corner touching the border
    img[8:12, 20:30] = 255
    img[14, :] = 128
    return img.astype(np.uint8)


def ellipse(w, h):
    a, b = w / 2.0, h / 2.0
    cx, cy = w // 2, h // 2
    r, c = np.mgrid[0:h, 0:w]
    return ((c - cx) / a) ** 2 + ((r - cy) / b) ** 2 <= 1.0


def dilate(g, mask):
    h, w = mask.shape
    ry, rx = h // 2, w // 2
    pad = np.pad(g, ((ry, ry), (rx, rx)), mode="edge")
    out = np.zeros_like(g)
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                out = np.maximum(out, pad[r:r + g.shape[0], c:c + g.shape[1]])
    return out


def pencil(g):
    p = dilate(g, ellipse(5, 5)).astype(np.int64)
    gi = g.astype(np.int64)
    out = np.full(g.shape, 255, dtype=np.int64)
    nz = p > 0
    out[nz] = (255 * gi[nz]) // p[nz]
    return out.astype(np.uint8)


def write_pgm(path, img):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        f.write(img.tobytes())


if __name__ == "__main__":
    g = make_input()
    out = pencil(g)
    assert (out[22:26, 4:10] == 255).all() and (dilate(g, ellipse(5, 5))[22:26, 4:10] == 0).all()
    write_pgm(os.path.join(HERE, "pencil_input.pgm"), g)
    write_pgm(os.path.join(HERE, "pencil_expected.pgm"), out)
