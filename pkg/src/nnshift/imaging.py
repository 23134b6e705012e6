"""Mean shift image segmentation in the joint (x, y, L*, u*, v*) domain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ascent import AscentParams, nnga_plus
from .core import DataError, Dataset, min_max_normalize
from .labeling import Clustering, EpsParams, estimate_epsilon, partitioned_labeling

# sRGB primaries, D65 white
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
# reference white is the image of RGB (1, 1, 1), so white has zero chroma
_WHITE = _RGB_TO_XYZ.sum(axis=1)
_EPS = (6 / 29) ** 3
_KAPPA = (29 / 3) ** 3


def _uv_prime(X, Y, Z):
    den = X + 15 * Y + 3 * Z
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, 4 * X / safe, 0.0), np.where(den > 0, 9 * Y / safe, 0.0)


_UN, _VN = _uv_prime(*_WHITE)


@dataclass(frozen=True)
class Image:
    """8-bit RGB image, ``pixels`` shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise DataError("pixels must be shaped (height, width, 3)")
        object.__setattr__(self, "pixels", px.astype(np.uint8, copy=False))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _read_token(buf: bytes, pos: int):
    n = len(buf)
    while pos < n:
        if buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif buf[pos:pos + 1].isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    return buf[start:pos], pos


def read_ppm(path) -> Image:
    """Read a binary P6 file with maxval 255."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic != b"P6":
        raise DataError(f"{path}: not a binary PPM (P6) file")
    vals = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        if not tok.isdigit():
            raise DataError(f"{path}: malformed PPM header")
        vals.append(int(tok))
    width, height, maxval = vals
    if maxval != 255:
        raise DataError(f"{path}: only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte before the raster
    need = width * height * 3
    raster = np.frombuffer(buf, dtype=np.uint8, count=need, offset=pos) \
        if len(buf) - pos >= need else None
    if raster is None:
        raise DataError(f"{path}: truncated raster")
    return Image(raster.reshape(height, width, 3).copy())


def write_ppm(img: Image, path) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (img.width, img.height))
        fh.write(np.ascontiguousarray(img.pixels).tobytes())


def write_pgm(gray, path) -> None:
    gray = np.asarray(gray, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (gray.shape[1], gray.shape[0]))
        fh.write(np.ascontiguousarray(gray).tobytes())


def rgb_to_luv(rgb) -> np.ndarray:
    """8-bit sRGB to CIE 1976 L*u*v*; works on a single triple or any (..., 3) array."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB_TO_XYZ.T
    X, Y, Z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    yr = Y / _WHITE[1]
    L = np.where(yr > _EPS, 116 * np.cbrt(yr) - 16, _KAPPA * yr)
    up, vp = _uv_prime(X, Y, Z)
    black = (X + 15 * Y + 3 * Z) <= 0
    u = np.where(black, 0.0, 13 * L * (up - _UN))
    v = np.where(black, 0.0, 13 * L * (vp - _VN))
    return np.stack([L, u, v], axis=-1)


def luv_to_rgb(luv) -> np.ndarray:
    """Inverse of :func:`rgb_to_luv`, rounded and clipped to 8-bit channels."""
    luv = np.asarray(luv, dtype=np.float64)
    L, u, v = luv[..., 0], luv[..., 1], luv[..., 2]
    Y = np.where(L > 8, ((L + 16) / 116) ** 3, L / _KAPPA) * _WHITE[1]
    pos = L > 0
    safeL = np.where(pos, L, 1.0)
    up = np.where(pos, u / (13 * safeL) + _UN, _UN)
    vp = np.where(pos, v / (13 * safeL) + _VN, _VN)
    safev = np.where(vp > 0, vp, 1.0)
    X = np.where(vp > 0, Y * 9 * up / (4 * safev), 0.0)
    Z = np.where(vp > 0, Y * (12 - 3 * up - 20 * vp) / (4 * safev), 0.0)
    lin = np.stack([X, Y, Z], axis=-1) @ _XYZ_TO_RGB.T
    lin = np.clip(lin, 0.0, 1.0)
    c = np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1 / 2.4) - 0.055)
    return np.clip(np.rint(c * 255), 0, 255).astype(np.uint8)


def image_to_features(img: Image) -> Dataset:
    """One normalized (x, y, L*, u*, v*) point per pixel, row-major order."""
    if img.height == 0 or img.width == 0:
        raise DataError("empty image")
    ys, xs = np.mgrid[0:img.height, 0:img.width]
    luv = rgb_to_luv(img.pixels).reshape(-1, 3)
    feats = np.column_stack([xs.ravel(), ys.ravel(), luv]).astype(np.float64)
    return min_max_normalize(Dataset(feats))[0]


def render_mean_colors(img: Image, clustering: Clustering) -> Image:
    labels = clustering.labels
    rgb = img.pixels.reshape(-1, 3).astype(np.float64)
    c = clustering.n_clusters
    counts = np.bincount(labels, minlength=c)[:, None]
    sums = np.zeros((c, 3))
    np.add.at(sums, labels, rgb)
    means = np.clip(np.rint(sums / counts), 0, 255).astype(np.uint8)
    return Image(means[labels].reshape(img.pixels.shape))


def boundary_map(labels, height: int, width: int) -> np.ndarray:
    """255 where a 4-neighbor carries a different label, 0 elsewhere."""
    lab = np.asarray(labels).reshape(height, width)
    edge = np.zeros((height, width), dtype=bool)
    dv = lab[1:, :] != lab[:-1, :]
    dh = lab[:, 1:] != lab[:, :-1]
    edge[1:, :] |= dv
    edge[:-1, :] |= dv
    edge[:, 1:] |= dh
    edge[:, :-1] |= dh
    return np.where(edge, 255, 0).astype(np.uint8)


@dataclass
class Segmentation:
    clustering: Clustering
    rendered: Image
    eps2: float
    features: Dataset
    prototypes: np.ndarray


def segment(img: Image, ascent: AscentParams, labeling: EpsParams, p_label: int = 1,
            workers: int | None = None) -> Segmentation:
    """Shift pixel features with bucketed mean shift, then epsilon-label the prototypes.

    When ``labeling.eps2`` is unset the radius is estimated on the
    normalized pixel features before the ascent.
    """
    feats = image_to_features(img)
    eps2 = labeling.eps2
    if eps2 is None:
        eps2 = estimate_epsilon(feats, labeling.eps_knn, labeling.m1, p_label,
                                labeling.seed, workers)
    res = nnga_plus(feats, None, ascent, workers=workers)
    params = EpsParams(eps2=eps2, k3=labeling.k3, m1=labeling.m1, seed=labeling.seed)
    clustering = partitioned_labeling(Dataset(res.prototypes), params, p_label, workers)[0]
    return Segmentation(clustering, render_mean_colors(img, clustering), eps2, feats,
                        res.prototypes)


def segment_image(img: Image, ascent: AscentParams, labeling: EpsParams,
                  workers: int | None = None) -> tuple[Clustering, Image]:
    seg = segment(img, ascent, labeling, workers=workers)
    return seg.clustering, seg.rendered
