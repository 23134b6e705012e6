import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnshift import AscentParams, DataError, EpsParams
from nnshift.imaging import (Image, boundary_map, image_to_features, luv_to_rgb, read_ppm,
                             render_mean_colors, rgb_to_luv, segment, segment_image, write_pgm,
                             write_ppm)
from nnshift.labeling import Clustering

from oracles import eps_graph_components, same_partition, srgb_to_luv

channel = st.integers(0, 255)


def test_black():
    assert rgb_to_luv([0, 0, 0]).tolist() == [0.0, 0.0, 0.0]


def test_white_has_no_chroma():
    L, u, v = rgb_to_luv([255, 255, 255])
    assert L == pytest.approx(100.0) and abs(u) < 0.5 and abs(v) < 0.5


def test_red_lightness():
    assert rgb_to_luv([255, 0, 0])[0] == pytest.approx(53.2, abs=0.5)


@given(channel, channel, channel)
def test_matches_scalar_oracle(r, g, b):
    assert np.allclose(rgb_to_luv([r, g, b]), srgb_to_luv(r, g, b), atol=1e-2)


def test_matches_skimage():
    skcolor = pytest.importorskip("skimage.color")
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, (50, 3)).astype(np.uint8)
    ours = rgb_to_luv(rgb)
    theirs = skcolor.rgb2luv(rgb.reshape(1, -1, 3)).reshape(-1, 3)
    assert np.allclose(ours, theirs, atol=0.05)


def test_color_round_trip():
    rng = np.random.default_rng(1)
    rgb = rng.integers(0, 256, (1000, 3))
    back = luv_to_rgb(rgb_to_luv(rgb)).astype(int)
    assert np.abs(back - rgb).max() <= 1


def test_lightness_range():
    rng = np.random.default_rng(2)
    L = rgb_to_luv(rng.integers(0, 256, (500, 3)))[:, 0]
    assert L.min() >= 0 and L.max() <= 100 + 1e-9


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    img = Image(rng.integers(0, 256, (4, 5, 3)))
    write_ppm(img, tmp_path / "a.ppm")
    assert np.array_equal(read_ppm(tmp_path / "a.ppm").pixels, img.pixels)


def test_ppm_header_comments(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6\n# made by hand\n2 1\n255\n" + bytes([1, 2, 3, 4, 5, 6]))
    assert read_ppm(p).pixels.tolist() == [[[1, 2, 3], [4, 5, 6]]]


@pytest.mark.parametrize("data", [b"P3\n1 1\n255\n0 0 0\n", b"P6\n1 1\n65535\n\0\0\0\0\0\0",
                                  b"P6\n2 2\n255\n\0\0\0"])
def test_ppm_rejects(tmp_path, data):
    p = tmp_path / "bad.ppm"
    p.write_bytes(data)
    with pytest.raises(DataError):
        read_ppm(p)


def test_pgm(tmp_path):
    write_pgm(np.array([[0, 255]]), tmp_path / "b.pgm")
    assert (tmp_path / "b.pgm").read_bytes() == b"P5\n2 1\n255\n\x00\xff"


def test_features_single_pixel():
    ds = image_to_features(Image(np.zeros((1, 1, 3))))
    assert ds.points.shape == (1, 5)


def test_features_two_identical_pixels():
    ds = image_to_features(Image(np.full((1, 2, 3), 77)))
    assert ds.points.tolist() == [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]


def test_features_size_and_order():
    img = Image(np.zeros((321, 481, 3)))
    ds = image_to_features(img)
    assert ds.n == 154401 and ds.dim == 5
    assert ds.points[1, 0] > 0 and ds.points[1, 1] == 0  # row-major: second pixel is x=1


def test_features_empty():
    with pytest.raises(DataError):
        image_to_features(Image(np.zeros((0, 3, 3))))


def test_render_one_color_per_cluster():
    px = np.array([[[0, 0, 0], [10, 20, 30]], [[100, 100, 100], [2, 2, 2]]])
    out = render_mean_colors(Image(px), Clustering([0, 1, 1, 0]))
    flat = out.pixels.reshape(-1, 3)
    assert flat[0].tolist() == flat[3].tolist() == [1, 1, 1]
    assert flat[1].tolist() == flat[2].tolist() == [55, 60, 65]


def test_boundary_map():
    lab = np.array([[0, 0, 1], [0, 0, 1]])
    assert boundary_map(lab, 2, 3).tolist() == [[0, 255, 255], [0, 255, 255]]


def _halves(h=20, w=20):
    px = np.zeros((h, w, 3), dtype=np.uint8)
    px[:, : w // 2] = (200, 30, 30)
    px[:, w // 2:] = (20, 40, 220)
    return Image(px)


def test_uniform_image_is_one_cluster():
    img = Image(np.full((12, 12, 3), 90))
    c, out = segment_image(img, AscentParams(k1=10, m1=2), EpsParams(eps_knn=10, m1=2))
    assert c.n_clusters == 1
    assert np.array_equal(out.pixels, img.pixels)


def test_two_half_planes():
    img = _halves()
    seg = segment(img, AscentParams(k1=20, m1=4), EpsParams(eps_knn=8, m1=4))
    want = np.repeat([[0] * 10 + [1] * 10], 20, axis=0).ravel()
    assert seg.clustering.n_clusters == 2
    assert same_partition(seg.clustering.labels, want)
    # the labeling of prototypes agrees with a brute-force epsilon graph on them
    assert same_partition(seg.clustering.labels, eps_graph_components(seg.prototypes, seg.eps2))


def test_segmentation_deterministic():
    img = _halves(16, 16)
    a = segment(img, AscentParams(k1=12, m1=3, seed=4), EpsParams(eps_knn=6, m1=3, seed=4))
    b = segment(img, AscentParams(k1=12, m1=3, seed=4), EpsParams(eps_knn=6, m1=3, seed=4),
                workers=3)
    assert np.array_equal(a.clustering.labels, b.clustering.labels)
    assert np.array_equal(a.rendered.pixels, b.rendered.pixels)
