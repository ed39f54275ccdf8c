"""Resize / normalize / channel replication tests."""

import numpy as np
import pytest

from sonic.image import (
    IMAGE_SIZE,
    NormalizeMode,
    normalize,
    prepare_image,
    replicate_channels,
    resize_bilinear,
)


class TestResize:
    def test_identity_resize(self):
        rng = np.random.default_rng(0)
        m = rng.random((224, 224))
        np.testing.assert_array_equal(resize_bilinear(m, 224, 224), m)

    def test_constant_input_stays_constant(self):
        m = np.full((7, 13), 3.25)
        out = resize_bilinear(m, 224, 224)
        np.testing.assert_array_equal(out, np.full((224, 224), 3.25))

    def test_2x2_corners_and_center(self):
        m = np.array([[0.0, 1.0], [2.0, 3.0]])
        out = resize_bilinear(m, 224, 224)
        assert out[0, 0] == 0.0
        assert out[0, -1] == 1.0
        assert out[-1, 0] == 2.0
        assert out[-1, -1] == 3.0
        # odd output size puts a sample exactly midway between the corners
        center = resize_bilinear(m, 3, 3)[1, 1]
        assert center == pytest.approx(1.5, abs=1e-12)

    def test_single_row_broadcasts(self):
        m = np.array([[1.0, 2.0, 3.0]])
        out = resize_bilinear(m, 4, 5)
        for row in out:
            np.testing.assert_array_equal(row, out[0])
        assert out[0, 0] == 1.0 and out[0, -1] == 3.0

    def test_single_column_broadcasts(self):
        m = np.array([[1.0], [5.0]])
        out = resize_bilinear(m, 5, 4)
        for col in out.T:
            np.testing.assert_array_equal(col, out[:, 0])
        assert out[0, 0] == 1.0 and out[-1, 0] == 5.0

    def test_range_containment_randomized(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            h = int(rng.integers(1, 60))
            w = int(rng.integers(1, 60))
            m = rng.random((h, w)) * rng.integers(1, 100)
            out = resize_bilinear(m, 224, 224)
            assert out.min() >= m.min()
            assert out.max() <= m.max()

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros(5))


class TestNormalize:
    def test_all_zero_maps_to_zero(self):
        out = normalize(np.zeros((4, 4)))
        np.testing.assert_array_equal(out, np.zeros((4, 4)))

    def test_minmax_endpoints(self):
        m = np.array([[0.0, 2.0], [5.0, 10.0]])
        out = normalize(m, NormalizeMode.MINMAX)
        assert out.min() == 0.0
        assert out.max() == 1.0
        assert out[0, 0] == 0.0 and out[1, 1] == 1.0

    def test_log_minmax_fixture(self):
        # ln1p maps these to [0, 1, 2, 3]; min-max then to thirds
        m = np.array([[0.0, np.e - 1.0], [np.e**2 - 1.0, np.e**3 - 1.0]])
        out = normalize(m, NormalizeMode.LOG_MINMAX)
        np.testing.assert_allclose(out, [[0.0, 1 / 3], [2 / 3, 1.0]], atol=1e-15)

    def test_monotonicity(self):
        rng = np.random.default_rng(5)
        m = rng.random((16, 16)) * 50
        for mode in NormalizeMode:
            out = normalize(m, mode)
            order_in = np.argsort(m.ravel(), kind="stable")
            values_out = out.ravel()[order_in]
            assert np.all(np.diff(values_out) >= 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            normalize(np.array([[1.0, -0.5]]))


class TestReplicate:
    def test_channels_are_copies(self):
        rng = np.random.default_rng(9)
        m = rng.random((8, 8))
        t = replicate_channels(m)
        assert t.shape == (8, 8, 3)
        for c in range(3):
            np.testing.assert_array_equal(t[:, :, c], m)

    def test_sum_triples(self):
        rng = np.random.default_rng(10)
        m = rng.random((30, 20))
        t = replicate_channels(m)
        assert t.sum() == pytest.approx(3 * m.sum(), rel=1e-12)


class TestPrepareImage:
    def test_end_to_end_shape_and_range(self):
        rng = np.random.default_rng(13)
        for shape in [(51, 129), (1, 5), (300, 7)]:
            tensor = prepare_image(rng.random(shape) * 40)
            assert tensor.shape == (IMAGE_SIZE, IMAGE_SIZE, 3)
            assert tensor.min() >= 0.0 and tensor.max() <= 1.0
            np.testing.assert_array_equal(tensor[:, :, 0], tensor[:, :, 1])
            np.testing.assert_array_equal(tensor[:, :, 0], tensor[:, :, 2])

    def test_zero_spectrogram_gives_zero_tensor(self):
        tensor = prepare_image(np.zeros((51, 129)))
        assert np.all(tensor == 0.0)
