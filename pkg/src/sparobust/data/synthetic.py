"""Procedural image datasets.

Two generators, both deterministic in their seed:

* segment digits: the ten digits drawn as jittered seven-segment strokes on
  28x28 grayscale canvases in a near-canonical pose. Digit identity
  survives rotations up to +/-45 degrees and scalings in [0.7, 1.3] (no
  digit pair is a <=90 degree rotation of another), so the geometric
  attributes are label-preserving, while a classifier trained only on the
  canonical pose leans on orientation-specific features.
* faces: 32x32 RGB cartoon faces. The class is the face aspect (wide vs
  tall); a binary "smiling" annotation in {-1, +1} controls the mouth
  curvature, giving an object-level attribute with known ground truth.
"""

import numpy as np

GLYPH_CLASSES = 10
FACE_CLASSES = 2


def _stroke(dist, thickness, aa=0.7):
    # soft band of the given half-thickness around dist == 0
    return np.clip((thickness - dist) / aa + 0.5, 0.0, 1.0)


def _seg_dist(px, py, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den < 1e-12:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / den, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _polyline(px, py, pts):
    d = None
    for a, b in zip(pts[:-1], pts[1:]):
        dd = _seg_dist(px, py, a, b)
        d = dd if d is None else np.minimum(d, dd)
    return d


# seven-segment corners: A top, G middle, D bottom; B/C right, F/E left
_SEGMENTS = {
    "A": ((-0.55, -1.0), (0.55, -1.0)),
    "B": ((0.55, -1.0), (0.55, 0.0)),
    "C": ((0.55, 0.0), (0.55, 1.0)),
    "D": ((-0.55, 1.0), (0.55, 1.0)),
    "E": ((-0.55, 0.0), (-0.55, 1.0)),
    "F": ((-0.55, -1.0), (-0.55, 0.0)),
    "G": ((-0.55, 0.0), (0.55, 0.0)),
}

_DIGIT_SEGMENTS = {
    0: "ABCDEF",
    1: "BC",
    2: "ABGED",
    3: "ABGCD",
    4: "FGBC",
    5: "AFGCD",
    6: "AFGECD",
    7: "ABC",
    8: "ABCDEFG",
    9: "ABCDFG",
}


def _glyph_canvas(cls, rng, size=28):
    if cls not in _DIGIT_SEGMENTS:
        raise ValueError(f"unknown glyph class {cls}")
    cy = size / 2 - 0.5 + rng.uniform(-1.5, 1.5)
    cx = size / 2 - 0.5 + rng.uniform(-1.5, 1.5)
    s = 8.0 * rng.uniform(0.85, 1.15)
    t = rng.uniform(1.0, 1.4)
    phi = np.deg2rad(rng.uniform(-3.0, 3.0))  # intrinsic pose jitter
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    x, y = xx - cx, yy - cy
    u = np.cos(phi) * x + np.sin(phi) * y
    v = -np.sin(phi) * x + np.cos(phi) * y

    d = None
    for name in _DIGIT_SEGMENTS[cls]:
        (ax, ay), (bx, by) = _SEGMENTS[name]
        jit = rng.uniform(-0.06, 0.06, size=4)
        a = ((ax + jit[0]) * s * 0.82, (ay + jit[1]) * s)
        b = ((bx + jit[2]) * s * 0.82, (by + jit[3]) * s)
        dd = _seg_dist(u, v, a, b)
        d = dd if d is None else np.minimum(d, dd)

    img = _stroke(d, t) * rng.uniform(0.7, 1.0)
    img = img + rng.normal(0.0, 0.05, img.shape)
    return np.clip(img, 0.0, 1.0)


def render_glyphs(n, seed, size=28):
    """n glyph images. Returns (images [n,1,size,size] f32, labels [n] i64)."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, GLYPH_CLASSES, size=n)
    images = np.empty((n, 1, size, size), dtype=np.float32)
    for i, cls in enumerate(labels):
        images[i, 0] = _glyph_canvas(int(cls), rng, size)
    return images, labels.astype(np.int64)


def _face_canvas(cls, smile, rng, size=32):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.empty((3, size, size))
    base = rng.uniform(0.1, 0.35, size=3)
    for c in range(3):
        img[c] = base[c] + 0.15 * yy / size  # soft vertical gradient backdrop

    cy = size / 2 - 0.5 + rng.uniform(-1.0, 1.0)
    cx = size / 2 - 0.5 + rng.uniform(-1.0, 1.0)
    if cls == 0:  # wide face
        rx = size * rng.uniform(0.36, 0.42)
        ry = size * rng.uniform(0.24, 0.29)
    else:  # tall face
        rx = size * rng.uniform(0.24, 0.29)
        ry = size * rng.uniform(0.36, 0.42)
    x, y = xx - cx, yy - cy
    ellipse = (x / rx) ** 2 + (y / ry) ** 2
    face = np.clip((1.0 - ellipse) / 0.12, 0.0, 1.0)
    skin = np.array([0.85, 0.65, 0.5]) * rng.uniform(0.85, 1.1)
    for c in range(3):
        img[c] = img[c] * (1 - face) + np.clip(skin[c], 0, 1) * face

    eye_r = 0.10 * min(rx, ry) + 0.8
    for ex in (-0.45 * rx, 0.45 * rx):
        d = np.hypot(x - ex, y + 0.35 * ry)
        dot = np.clip((eye_r - d) / 0.7 + 0.5, 0.0, 1.0)
        for c in range(3):
            img[c] = img[c] * (1 - dot) + 0.05 * dot

    # mouth: smile in [-1, 1] sets the curvature sign and magnitude
    w = 0.55 * rx
    depth = 0.28 * ry * float(smile) * rng.uniform(0.85, 1.15)
    us = np.linspace(-w, w, 9)
    pts = [(cx + u0, cy + 0.45 * ry + depth * (0.5 - (u0 / w) ** 2)) for u0 in us]
    d = _polyline(xx, yy, pts)
    mouth = np.clip((1.0 - d) / 0.7 + 0.5, 0.0, 1.0)
    col = np.array([0.45, 0.1, 0.12])
    for c in range(3):
        img[c] = img[c] * (1 - mouth) + col[c] * mouth

    img = img + rng.normal(0.0, 0.02, img.shape)
    return np.clip(img, 0.0, 1.0)


def render_faces(n, seed, size=32):
    """n cartoon faces. Returns (images [n,3,s,s], labels [n], smiles [n])."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, FACE_CLASSES, size=n)
    smiles = rng.choice([-1.0, 1.0], size=n)
    images = np.empty((n, 3, size, size), dtype=np.float32)
    for i in range(n):
        images[i] = _face_canvas(int(labels[i]), smiles[i], rng, size)
    return images, labels.astype(np.int64), smiles.astype(np.float32)
