import numpy as np
import pytest

from anneal.annealer import AnnealConfig, Placement, render, template_map
from anneal.matching import match_placements
from errors import InfeasibleSpec, NoTemplates
from features.caption import caption_features
from features.hough import hough_lines, mutual_angle
from plotseg.templates import standard_templates
from raster.images import binarize
from synth.drawing import GLYPH_WIDTH, draw_line, draw_text, speckle, text_width
from synth.evaluation import RecallTable, eval_disambiguation
from synth.overlap import OverlapSpec, gen_overlap_image, masks_intersect, overlap_templates, overlapping_pairs
from synth.plots import (
    PlotSpec,
    PlotTruth,
    build_classifier_corpus,
    gen_negative_image,
    gen_plot_image,
    make_caption,
)


class TestDrawing:
    def test_horizontal_line(self):
        canvas = np.zeros((5, 10), dtype=bool)
        draw_line(canvas, 2, 1, 2, 8)
        assert canvas.sum() == 8
        assert canvas[2, 1:9].all()

    def test_line_is_clipped(self):
        canvas = np.zeros((5, 5), dtype=bool)
        draw_line(canvas, 2, -3, 2, 10)
        assert canvas[2].all() and canvas.sum() == 5

    def test_text_advances_by_glyph_and_gap(self):
        canvas = np.zeros((10, 40), dtype=bool)
        assert draw_text(canvas, 1, 2, [1, 2, 3]) == 2 + 3 * (GLYPH_WIDTH + 2)
        assert text_width(3) == 3 * GLYPH_WIDTH + 4

    def test_speckle_fraction(self, rng):
        canvas = np.zeros((20, 20), dtype=bool)
        speckle(canvas, 0.1, rng)
        assert canvas.sum() == 40


class TestOverlapImages:
    def test_image_is_rendered_truth(self):
        image, truth = gen_overlap_image(OverlapSpec(seed=3))
        assert image == render(truth, overlap_templates(), 90, 90)

    def test_default_layout(self):
        for seed in range(10):
            image, truth = gen_overlap_image(OverlapSpec(seed=seed))
            assert [p.shape_id for p in truth] == ["diamond"] * 3 + ["triangle"] * 2
            assert image.count() <= 5 * 61
            assert overlapping_pairs(truth, overlap_templates()) >= 1

    def test_deterministic(self):
        a = gen_overlap_image(OverlapSpec(seed=9))
        b = gen_overlap_image(OverlapSpec(seed=9))
        assert a == b

    def test_impossible_overlap_count(self):
        with pytest.raises(InfeasibleSpec):
            OverlapSpec(shape_counts={"diamond": 2}, min_overlap_pairs=2)

    def test_no_markers(self):
        with pytest.raises(InfeasibleSpec):
            OverlapSpec(shape_counts={"diamond": 0})

    def test_canvas_too_small(self):
        with pytest.raises(InfeasibleSpec):
            gen_overlap_image(OverlapSpec(canvas=(8, 8), shape_counts={"diamond": 1}, min_overlap_pairs=0))

    def test_unknown_shape(self):
        with pytest.raises(NoTemplates):
            gen_overlap_image(OverlapSpec(shape_counts={"star": 1}, min_overlap_pairs=0))


class TestPlotImages:
    def test_markers_stay_in_plotting_region(self):
        for seed in range(5):
            _, truth = gen_plot_image(PlotSpec(seed=seed))
            index = template_map(standard_templates())
            assert len(truth.placements) == 10
            for p in truth.placements:
                t = index[p.shape_id]
                assert truth.plotting_region.contains(p.i, p.j)
                assert truth.plotting_region.contains(p.i + t.height - 1, p.j + t.width - 1)
            for n, a in enumerate(truth.placements):
                for b in truth.placements[n + 1:]:
                    assert not masks_intersect(a, b, index)

    def test_axes_only_plot(self):
        image, truth = gen_plot_image(PlotSpec(series=(), seed=4))
        assert truth.placements == []
        lines = hough_lines(binarize(image))
        assert mutual_angle(lines[0].orientation_deg, lines[1].orientation_deg) == pytest.approx(90.0)

    def test_fused_pair_overlaps(self):
        _, truth = gen_plot_image(PlotSpec(fused_pairs=1, seed=2))
        assert truth.fused == [(10, 11)]
        first, second = truth.placements[10], truth.placements[11]
        assert masks_intersect(first, second, template_map(standard_templates()))

    def test_truth_round_trip(self):
        _, truth = gen_plot_image(PlotSpec(series=(("circle", 3), ("cross", 2)), fused_pairs=1, seed=6))
        assert PlotTruth.from_dict(truth.to_dict()) == truth

    def test_deterministic(self):
        spec = PlotSpec(noise=0.002, connect_points=True, seed=8)
        (a, ta), (b, tb) = gen_plot_image(spec), gen_plot_image(spec)
        assert a == b
        assert ta.to_dict() == tb.to_dict()

    def test_axes_outside_canvas(self):
        with pytest.raises(InfeasibleSpec):
            gen_plot_image(PlotSpec(axes=(200, 10)))

    def test_too_many_markers(self):
        with pytest.raises(InfeasibleSpec):
            gen_plot_image(PlotSpec(canvas=(60, 60), series=(("square", 200),)))

    def test_unknown_series_shape(self):
        with pytest.raises(NoTemplates):
            gen_plot_image(PlotSpec(series=(("star", 2),)))


class TestCorpus:
    def test_labels_and_names(self):
        items = build_classifier_corpus(4, 3, seed=1)
        assert [item.label for item in items] == [1] * 4 + [-1] * 3
        assert [item.name for item in items[4:]] == ["neg_speckle_0000", "neg_text_0001", "neg_photo_0002"]
        assert all(item.image.height == 120 and item.image.width == 150 for item in items)

    def test_deterministic(self):
        a = build_classifier_corpus(2, 2, seed=5)
        b = build_classifier_corpus(2, 2, seed=5)
        assert [(x.name, x.caption, x.image) for x in a] == [(y.name, y.caption, y.image) for y in b]

    def test_unknown_negative_kind(self, rng):
        with pytest.raises(ValueError):
            gen_negative_image("blank", (40, 40), rng)

    def test_positive_captions_mention_a_keyword(self, rng):
        for _ in range(50):
            assert caption_features(make_caption(True, rng)).any()


class TestRecallTable:
    def test_totals(self):
        table = RecallTable()
        truth = [Placement("diamond", 0, 0), Placement("triangle", 20, 20)]
        table.add(match_placements([Placement("diamond", 1, 1)], truth))
        table.add(match_placements(list(truth), truth))
        assert table.images == 2
        assert table.counts == {"diamond": (2, 2), "triangle": (2, 1)}
        assert table.recall("triangle") == 0.5
        assert table.aggregate_recall == 0.75
        assert table.format_text().splitlines()[0].split() == ["Shape", "Total", "#", "Correct", "%", "Recall"]

    def test_empty(self):
        assert RecallTable().aggregate_recall == 1.0


class TestEvalDisambiguation:
    def test_zero_budget_finds_nothing(self):
        table = eval_disambiguation(2, config=AnnealConfig(max_iterations=0))
        assert table.images == 2
        assert table.total == 10
        assert table.aggregate_recall == 0.0

    def test_workers_do_not_change_results(self):
        config = AnnealConfig(max_iterations=300)
        a = eval_disambiguation(3, config=config, workers=1)
        b = eval_disambiguation(3, config=config, workers=2)
        assert a.to_dict() == b.to_dict()

    def test_needs_an_image(self):
        with pytest.raises(ValueError):
            eval_disambiguation(0)
