import numpy as np
import pytest
from PIL import Image

from errors import CorruptHeader, DegenerateImage, UnreadableFile, UnsupportedFormat
from raster.images import (
    BinaryImage,
    GrayImage,
    binarize,
    load_image,
    otsu_threshold,
    write_pgm,
)


def brute_force_variance(values, threshold):
    values = np.asarray(values, dtype=np.float64).ravel()
    low, high = values[values < threshold], values[values >= threshold]
    if low.size == 0 or high.size == 0:
        return 0.0
    w0, w1 = low.size / values.size, high.size / values.size
    return w0 * w1 * (low.mean() - high.mean()) ** 2


class TestLoadImage:
    def test_ascii_pgm(self, tmp_path):
        path = tmp_path / "tiny.pgm"
        path.write_bytes(b"P2\n# comment\n2 2\n255\n0 85\n170 255\n")
        img = load_image(path)
        assert (img.width, img.height) == (2, 2)
        assert img.data.tolist() == [[0, 85], [170, 255]]

    def test_sixteen_bit_pgm_is_rescaled(self, tmp_path):
        path = tmp_path / "deep.pgm"
        payload = np.array([0, 32768, 65535], dtype=">u2").tobytes()
        path.write_bytes(b"P5\n3 1\n65535\n" + payload)
        assert load_image(path).data.tolist() == [[0, 128, 255]]

    def test_rgb_png_uses_luminance(self, tmp_path):
        path = tmp_path / "rgb.png"
        pixels = np.array([[[255, 255, 255]], [[255, 0, 0]]], dtype=np.uint8)
        Image.fromarray(pixels).save(path)
        assert load_image(path).data.ravel().tolist() == [255, 76]

    def test_gray_png(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.fromarray(np.array([[12, 200]], dtype=np.uint8)).save(path)
        assert load_image(path).data.tolist() == [[12, 200]]

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableFile) as err:
            load_image(tmp_path / "nope.pgm")
        assert "nope.pgm" in str(err.value)

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "x.gif"
        path.write_bytes(b"GIF89a....")
        with pytest.raises(UnsupportedFormat):
            load_image(path)

    @pytest.mark.parametrize("raw", [b"P5\n2\n", b"P5 2 2 255\n\x00\x01\x02", b"P2\n2 2\n255\n1 2 x 4\n"])
    def test_corrupt_pgm(self, tmp_path, raw):
        path = tmp_path / "bad.pgm"
        path.write_bytes(raw)
        with pytest.raises(CorruptHeader):
            load_image(path)

    def test_pgm_round_trip_is_bit_exact(self, tmp_path, rng):
        img = GrayImage(rng.integers(0, 256, size=(17, 23), dtype=np.uint8))
        path = write_pgm(img, tmp_path / "round.pgm")
        assert load_image(path) == img


class TestImageTypes:
    def test_gray_image_is_read_only(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.data[0, 0] = 5
        with pytest.raises(AttributeError):
            img.data = None

    def test_binary_image_rejects_non_binary_values(self):
        with pytest.raises(ValueError):
            BinaryImage(np.array([[0, 2]]))

    def test_binary_image_needs_two_dimensions(self):
        with pytest.raises(ValueError):
            BinaryImage(np.zeros(4, dtype=bool))


class TestBinarize:
    def test_black_image_is_all_ink(self):
        img = GrayImage(np.zeros((3, 4), dtype=np.uint8))
        assert binarize(img, threshold=128).data.all()

    def test_white_image_is_all_background(self):
        img = GrayImage(np.full((3, 4), 255, dtype=np.uint8))
        assert not binarize(img, threshold=128).data.any()

    def test_uniform_image_under_otsu_is_background(self):
        img = GrayImage(np.full((5, 5), 77, dtype=np.uint8))
        assert binarize(img).count() == 0

    def test_invert_treats_light_pixels_as_ink(self):
        img = GrayImage(np.full((2, 2), 255, dtype=np.uint8))
        assert binarize(img, threshold=128, invert=True).data.all()

    def test_threshold_out_of_range(self):
        with pytest.raises(ValueError):
            binarize(GrayImage(np.zeros((2, 2), dtype=np.uint8)), threshold=300)

    def test_bimodal_otsu_matches_exhaustive_scan(self):
        values = np.array([10] * 100 + [240] * 100, dtype=np.uint8).reshape(10, 20)
        threshold = otsu_threshold(GrayImage(values))
        assert 10 < threshold < 240
        oracle = [brute_force_variance(values, t) for t in range(256)]
        assert oracle[threshold] == pytest.approx(max(oracle))
        assert threshold == min(t for t in range(256) if oracle[t] >= max(oracle) - 1e-9)

    def test_otsu_maximises_inter_class_variance(self, rng):
        values = np.concatenate([rng.normal(40, 12, 300), rng.normal(190, 20, 500)])
        values = np.clip(values, 0, 255).astype(np.uint8)
        threshold = otsu_threshold(GrayImage(values.reshape(20, 40)))
        oracle = [brute_force_variance(values, t) for t in range(256)]
        assert oracle[threshold] == pytest.approx(max(oracle), rel=1e-9)

    def test_uniform_image_has_no_otsu_threshold(self):
        with pytest.raises(DegenerateImage):
            otsu_threshold(GrayImage(np.full((4, 4), 128, dtype=np.uint8)))

    def test_two_level_image_splits_at_dark_level(self):
        values = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        assert otsu_threshold(GrayImage(values)) == 1
        assert binarize(GrayImage(values)).data.tolist() == [[True, False], [False, True]]

    def test_foreground_grows_with_threshold(self, rng):
        img = GrayImage(rng.integers(0, 256, size=(20, 20), dtype=np.uint8))
        previous = binarize(img, threshold=0).data
        for t in range(16, 256, 16):
            current = binarize(img, threshold=t).data
            assert not (previous & ~current).any()
            previous = current
