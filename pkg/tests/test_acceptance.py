"""
End-to-end quality checks on seeded synthetic corpora.

Run with ``pytest -m slow``.
"""

import numpy as np
import pytest

from anneal.annealer import AnnealConfig, anneal
from anneal.matching import match_placements
from cli.pipeline import PlotExtractor
from conftest import INK_SEARCH
from features.hough import mutual_angle
from features.vector import extract_image_features
from plotseg.regions import detect_axes
from plotseg.templates import default_library
from raster.images import binarize, write_pgm
from svm.evaluation import ablation_table
from synth.evaluation import eval_disambiguation
from synth.overlap import OverlapSpec, gen_overlap_image, overlap_templates
from synth.plots import PlotSpec, build_classifier_corpus, gen_plot_image

pytestmark = pytest.mark.slow


def test_most_overlap_images_are_fully_resolved():
    templates = overlap_templates()
    resolved = 0
    for k in range(20):
        image, truth = gen_overlap_image(OverlapSpec(seed=100 + k), templates)
        result = anneal(image, templates, AnnealConfig(seed=100 + k, **INK_SEARCH))
        resolved += match_placements(result, truth, tol=2).recall == 1.0
    assert resolved >= 16


def test_per_shape_recall_and_slow_schedule():
    fast = eval_disambiguation(35, OverlapSpec(seed=500), AnnealConfig(seed=500, **INK_SEARCH), workers=4)
    for shape in ("diamond", "triangle"):
        assert fast.recall(shape) >= 0.85

    slow = eval_disambiguation(
        35,
        OverlapSpec(seed=500),
        AnnealConfig(seed=500, temp_constant_e=0.2, max_iterations=30000, **INK_SEARCH),
        workers=4,
    )
    assert slow.aggregate_recall >= fast.aggregate_recall - 0.1


def test_all_feature_families_beat_any_single_one():
    items = build_classifier_corpus(200, 200, seed=7)
    vectors = [extract_image_features(item.image, item.caption) for item in items]
    labels = [item.label for item in items]
    rows = dict(ablation_table(vectors, labels, k=3, seed=7, workers=4))
    assert rows["All"] >= 90.0
    for single in ("Only IS", "Only CA", "Only CT"):
        assert rows["All"] >= rows[single]


def test_axes_are_located_on_generated_plots():
    hits = 0
    for seed in range(50):
        image, truth = gen_plot_image(PlotSpec(seed=seed, noise=0.002))
        x_axis, y_axis = detect_axes(binarize(image))
        close = abs(x_axis.rho - truth.x_axis[0]) <= 2 and abs(y_axis.rho - truth.y_axis[0]) <= 2
        square = 88 <= mutual_angle(x_axis.orientation_deg, y_axis.orientation_deg) <= 92
        hits += close and square
    assert hits >= 48


@pytest.mark.parametrize("seed", range(10))
def test_extraction_respects_region_layout(seed, tmp_path):
    rng = np.random.default_rng(seed)
    spec = PlotSpec(
        series=(("circle", int(rng.integers(3, 8))), ("triangle", int(rng.integers(3, 8)))),
        fused_pairs=int(rng.integers(0, 3)),
        connect_points=bool(rng.random() < 0.5),
        seed=seed,
    )
    image, truth = gen_plot_image(spec)
    path = write_pgm(image, tmp_path / "plot.pgm")
    result = PlotExtractor(default_library()).extract(path)

    assert result.regions is not None
    boxes = result.regions.boxes()
    for n, a in enumerate(boxes):
        for b in boxes[n + 1:]:
            assert not a.intersects(b)
    for point in result.data_points:
        assert result.regions.plotting_region.contains(*point.centroid)
    for box in result.text_boxes:
        assert any(region.contains(box.bbox.top, box.bbox.left) for region in boxes)
