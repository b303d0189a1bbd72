"""Edge-detector tests against geometric ground truth."""

import numpy as np
import pytest

from gazekit import canny
from gazekit.synth import render_disk


def test_zero_image_has_no_edges():
    assert not canny(np.zeros((16, 16), dtype=np.uint8)).any()


def test_vertical_step_yields_single_line_near_boundary():
    img = np.zeros((32, 32), dtype=np.uint8)
    img[:, 16:] = 255  # step between columns 15 and 16
    edges = canny(img)
    assert edges.any()
    per_row = edges.sum(axis=1)
    assert (per_row == 1).all()  # one-pixel-thin line in every row
    cols = np.nonzero(edges)[1]
    assert np.all((cols >= 15) & (cols <= 16))


def test_horizontal_step_is_symmetric():
    img = np.zeros((32, 32), dtype=np.uint8)
    img[16:, :] = 255
    edges = canny(img)
    per_col = edges.sum(axis=0)
    assert (per_col == 1).all()
    rows = np.nonzero(edges)[0]
    assert np.all((rows >= 15) & (rows <= 16))


def test_disk_boundary_edges_lie_on_the_circle():
    img = render_disk(64, 64, (31.5, 31.5), 14.0, fg=30, bg=220)
    edges = canny(img)
    ys, xs = np.nonzero(edges)
    assert len(xs) > 40  # a decent share of the circumference
    dist = np.hypot(xs - 31.5, ys - 31.5)
    assert np.all(np.abs(dist - 14.0) <= 1.5)


def test_threshold_validation():
    img = np.zeros((8, 8), dtype=np.uint8)
    img[:, 4:] = 200
    with pytest.raises(ValueError):
        canny(img, low=5.0, high=2.0)
    with pytest.raises(ValueError):
        canny(img, low=0.0, high=0.0)
    with pytest.raises(ValueError):
        canny(img, sigma=0.0)


def test_explicit_thresholds_respected():
    img = np.zeros((16, 16), dtype=np.uint8)
    img[:, 8:] = 255
    strict = canny(img, low=1e9, high=2e9)  # beyond any gradient
    assert not strict.any()


def test_padding_with_replicated_border_is_invariant():
    img = render_disk(48, 48, (23.0, 25.0), 10.0, fg=40, bg=210)
    pad = 8  # beyond the blur radius for sigma 1.4
    padded = np.pad(img, pad, mode="edge")
    inner = canny(padded)[pad:-pad, pad:-pad]
    assert np.array_equal(inner, canny(img))


def test_pure_function():
    img = render_disk(32, 32, (15.0, 16.0), 8.0, fg=50, bg=200)
    assert np.array_equal(canny(img), canny(img.copy()))
