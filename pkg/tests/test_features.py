import math

import numpy as np
import pytest

from conftest import frame
from errors import BlockTooLarge, EmptyFeatureSet, FeatureError
from features.caption import caption_features, load_lexicon, tokenize
from features.hough import LineSegment, axes_features, hough_accumulator, hough_lines, mutual_angle
from features.vector import (
    FeatureConfig,
    FeatureVector,
    assemble_feature_vector,
    extract_image_features,
    parse_families,
)
from features.wavelet import block_wavelet_features, haar_subbands, split_blocks
from raster.images import BinaryImage, GrayImage

LEXICON = ["distribution", "slope", "axes", "plot", "range"]


class TestWavelet:
    def test_constant_image_puts_all_mass_at_zero(self):
        features = block_wavelet_features(GrayImage(np.full((16, 16), 77, dtype=np.uint8)))
        assert features.shape == (48,)
        zero_bin = 8
        for band in range(3):
            assert features[band * 16 + zero_bin] == pytest.approx(1.0)

    def test_haar_detail_of_single_block(self):
        bands = haar_subbands(np.array([[[255.0, 0.0], [255.0, 0.0]]]))
        assert bands["HL"].item() == pytest.approx(255.0)
        assert bands["LH"].item() == pytest.approx(0.0, abs=1e-9)
        assert bands["HH"].item() == pytest.approx(0.0, abs=1e-9)

    def test_histograms_are_normalised(self, rng):
        img = GrayImage(rng.integers(0, 256, size=(37, 29), dtype=np.uint8))
        features = block_wavelet_features(img, block_size=4)
        assert features.sum() == pytest.approx(3.0)
        for band in range(3):
            assert features[band * 16:(band + 1) * 16].sum() == pytest.approx(1.0, abs=1e-9)

    def test_split_blocks_pads_by_replication(self):
        data = np.arange(9).reshape(3, 3)
        blocks = split_blocks(data, 2)
        assert blocks.shape == (4, 2, 2)
        assert blocks[3].tolist() == [[8, 8], [8, 8]]

    def test_block_larger_than_image(self):
        with pytest.raises(BlockTooLarge):
            block_wavelet_features(GrayImage(np.zeros((4, 20), dtype=np.uint8)), block_size=8)

    @pytest.mark.parametrize("block_size", [0, 3, 7])
    def test_block_size_must_be_even(self, block_size):
        with pytest.raises(FeatureError):
            block_wavelet_features(GrayImage(np.zeros((16, 16), dtype=np.uint8)), block_size=block_size)


class TestHough:
    def test_horizontal_line(self):
        lines = hough_lines(frame(50, 50, row=40))
        assert lines[0].orientation_deg == pytest.approx(0.0)
        assert lines[0].votes == 50
        assert lines[0].rho == pytest.approx(-40.0)

    def test_orthogonal_axes(self):
        lines = hough_lines(frame(50, 50, row=40, col=10))
        assert mutual_angle(lines[0].orientation_deg, lines[1].orientation_deg) == pytest.approx(90.0, abs=1.0)

    def test_main_diagonal(self):
        lines = hough_lines(BinaryImage(np.eye(50, dtype=bool)))
        assert lines[0].orientation_deg == pytest.approx(135.0, abs=1.0)
        assert lines[0].votes == 50

    def test_transpose_rotates_orientation(self):
        img = frame(40, 60, row=12)
        flipped = BinaryImage(img.data.T)
        a, b = hough_lines(img)[0], hough_lines(flipped)[0]
        assert a.votes == b.votes
        assert mutual_angle(a.orientation_deg, b.orientation_deg) == pytest.approx(90.0)

    @pytest.mark.parametrize("kind", ["row", "col", "diagonal", "anti"])
    def test_single_line_peak_holds_every_pixel(self, kind):
        data = np.zeros((50, 50), dtype=bool)
        idx = np.arange(50)
        if kind == "row":
            data[17, :] = True
        elif kind == "col":
            data[:, 33] = True
        elif kind == "diagonal":
            data[idx, idx] = True
        else:
            data[idx, 49 - idx] = True
        img = BinaryImage(data)
        accumulator, _, _ = hough_accumulator(img)
        top = hough_lines(img, min_votes=1)[0]
        assert top.votes == img.count() == accumulator.max()

    def test_results_sorted_by_votes(self):
        lines = hough_lines(frame(60, 80, row=30, col=20), min_votes=10)
        votes = [l.votes for l in lines]
        assert votes == sorted(votes, reverse=True)
        assert all(v >= 10 for v in votes)

    def test_empty_image_and_zero_top_k(self):
        assert hough_lines(BinaryImage.zeros(10, 10)) == []
        assert hough_lines(frame(50, 50, row=3), top_k=0) == []

    def test_parameter_validation(self):
        with pytest.raises(FeatureError):
            hough_lines(frame(10, 10, row=2), min_votes=0)
        with pytest.raises(FeatureError):
            hough_lines(frame(10, 10, row=2), theta_step=7)

    def test_line_geometry_helpers(self):
        horizontal = LineSegment(rho=-40.0, theta_deg=90.0, votes=50)
        vertical = LineSegment(rho=10.0, theta_deg=0.0, votes=50)
        assert horizontal.row_at(25) == pytest.approx(40.0)
        assert vertical.col_at(7) == pytest.approx(10.0)
        assert LineSegment.from_dict(horizontal.to_dict()) == horizontal


class TestAxesFeatures:
    def test_no_lines(self):
        assert axes_features([], 10.0).tolist() == [0.0, 0.0, 0.0]

    def test_two_orthogonal_lines(self):
        lines = [LineSegment(-50.0, 90.0, 100), LineSegment(50.0, 0.0, 100)]
        diag = math.hypot(100, 100)
        assert axes_features(lines, diag) == pytest.approx([100 / diag, 100 / diag, 1.0])

    def test_one_line(self):
        assert axes_features([LineSegment(0.0, 0.0, 80)], 141.42) == pytest.approx([0.5657, 0.0, 0.0], abs=1e-4)


class TestCaption:
    def test_keywords(self):
        bits = caption_features("Plot of the energy distribution", LEXICON)
        assert bits.tolist() == [True, False, False, True, False]

    def test_empty_caption(self):
        assert not caption_features("", LEXICON).any()
        assert not caption_features(None, LEXICON).any()

    def test_case_and_repetition_do_not_matter(self):
        bits = caption_features("axes. Axes, AXES", LEXICON)
        assert bits.tolist() == [False, False, True, False, False]

    def test_plural_forms(self):
        assert caption_features("Two plots over ranges", LEXICON).tolist() == [False, False, False, True, True]

    def test_tokenize_strips_punctuation(self):
        assert tokenize("Slope (fitted); x-range!") == ["slope", "fitted", "x", "range"]

    def test_load_lexicon(self, tmp_path):
        path = tmp_path / "words.txt"
        path.write_text("# keywords\nPlot\n\n  slope \n")
        assert load_lexicon(path) == ["plot", "slope"]


class TestFeatureVector:
    def test_single_family_zero_fills_others(self):
        vector = assemble_feature_vector(is_features=np.ones(48))
        assert vector.mask == frozenset({"IS"})
        assert not vector.ca_features.any()
        assert not vector.ct_features.any()

    def test_full_dimension(self):
        vector = assemble_feature_vector(np.zeros(48), np.zeros(3), np.zeros(5, dtype=bool))
        assert len(vector) == 56
        assert vector.values.shape == (56,)

    def test_no_family(self):
        with pytest.raises(EmptyFeatureSet):
            assemble_feature_vector()

    def test_wrong_family_length(self):
        with pytest.raises(FeatureError):
            assemble_feature_vector(ca_features=np.zeros(4))

    def test_mask_equals_zeroing(self, rng):
        is_part, ca_part = rng.random(48), rng.random(3)
        ct_part = np.array([True, False, True, False, True])
        full = assemble_feature_vector(is_part, ca_part, ct_part)
        assert full.with_mask({"IS", "CT"}) == assemble_feature_vector(is_part, None, ct_part)

    def test_empty_mask(self):
        with pytest.raises(EmptyFeatureSet):
            assemble_feature_vector(np.zeros(48)).with_mask({"CA"})

    def test_from_flat(self):
        values = list(range(48)) + [0.5, 0.25, 1.0] + [1, 0, 0, 1, 0]
        vector = FeatureVector.from_flat(values, (48, 3, 5))
        assert vector.ca_features.tolist() == [0.5, 0.25, 1.0]
        assert vector.ct_features.tolist() == [True, False, False, True, False]
        with pytest.raises(FeatureError):
            FeatureVector.from_flat(values[:-1], (48, 3, 5))

    def test_parse_families(self):
        assert parse_families(["is", " CT "]) == frozenset({"IS", "CT"})
        with pytest.raises(FeatureError):
            parse_families(["XY"])


class TestExtractImageFeatures:
    def test_deterministic_with_caption(self, rng):
        data = np.full((64, 64), 255, dtype=np.uint8)
        data[50, 5:60] = 0
        data[5:51, 8] = 0
        img = GrayImage(data)
        a = extract_image_features(img, "A plot of range")
        b = extract_image_features(img, "A plot of range")
        assert a == b
        assert len(a) == 56
        assert a.mask == frozenset({"IS", "CA", "CT"})
        assert a.ca_features[2] == pytest.approx(1.0, abs=1 / 90)

    def test_missing_caption_leaves_ct_out(self):
        img = GrayImage(np.full((16, 16), 255, dtype=np.uint8))
        vector = extract_image_features(img)
        assert "CT" not in vector.mask
        assert len(vector) == 56

    def test_custom_lexicon_changes_layout(self):
        config = FeatureConfig(lexicon=("Plot", "curve"))
        assert config.lexicon == ("plot", "curve")
        assert config.layout == (48, 3, 2)
        with pytest.raises(FeatureError):
            FeatureConfig(block_size=5)
