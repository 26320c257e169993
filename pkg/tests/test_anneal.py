import numpy as np
import pytest

from anneal.annealer import (
    AnnealConfig,
    DataPointAnnealer,
    Placement,
    anneal,
    cost,
    grammian_trace,
    render,
)
from anneal.matching import match_placements
from conftest import INK_SEARCH
from errors import ConfigError, DimensionMismatch, EmptyTarget, NoTemplates, OutOfBounds
from plotseg.templates import make_template
from raster.images import BinaryImage


def bits_2x2(n):
    return np.array([[n & 1, n >> 1 & 1], [n >> 2 & 1, n >> 3 & 1]], dtype=bool)


def diamond_only():
    return [make_template("diamond")]


class TestCost:
    def test_pixel_template_counts_mismatches(self, pixel_template):
        for b in range(16):
            target = BinaryImage(bits_2x2(b))
            for c in range(16):
                placements = [Placement("px", int(i), int(j)) for i, j in np.argwhere(bits_2x2(c))]
                assert cost(target, placements, [pixel_template]) == bin(b ^ c).count("1")

    def test_trace_matches_matrix_product(self, rng):
        for _ in range(1000):
            b = rng.random((32, 32)) < 0.5
            c = rng.random((32, 32)) < 0.5
            d = b.astype(int) - c.astype(int)
            assert grammian_trace(b, c) == int(np.trace(d.T @ d))

    def test_identical_is_zero(self, diamond_target):
        image, truth = diamond_target
        assert cost(image, truth, diamond_only()) == 0

    def test_filled_square_against_nothing(self, pixel_template):
        assert cost(BinaryImage(np.ones((3, 3), dtype=bool)), [], [pixel_template]) == 9

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            grammian_trace(np.zeros((3, 3)), np.zeros((3, 4)))


class TestRender:
    def test_overlapping_placements_are_ored(self):
        square = make_template("square", 3)
        img = render([Placement("square", 0, 0), Placement("square", 1, 1)], [square], 5, 5)
        assert img.count() == 9 + 9 - 4

    def test_offset_is_mask_top_left(self):
        triangle = make_template("triangle", 5)
        img = render([Placement("triangle", 3, 4)], [triangle], 12, 12)
        assert np.array_equal(img.data[3:8, 4:9], triangle.mask.data)
        assert img.count() == triangle.area

    def test_weight_zero_is_not_drawn(self):
        square = make_template("square", 3)
        assert render([Placement("square", 0, 0, weight=0)], [square], 4, 4).count() == 0

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            render([Placement("diamond", 85, 0)], diamond_only(), 90, 90)

    def test_unknown_shape(self):
        with pytest.raises(NoTemplates):
            render([Placement("star", 0, 0)], diamond_only(), 20, 20)

    def test_bad_weight(self):
        with pytest.raises(ValueError):
            Placement("diamond", 0, 0, weight=2)


class TestAnneal:
    def test_single_marker_is_recovered(self, diamond_target):
        image, truth = diamond_target
        result = anneal(image, diamond_only(), AnnealConfig(seed=7, **INK_SEARCH))
        assert result.final_cost == 0
        assert result.converged
        assert result.placements == truth

    def test_recovered_among_two_shapes(self, diamond_target):
        from synth.overlap import overlap_templates

        image, truth = diamond_target
        result = anneal(image, overlap_templates(), AnnealConfig(seed=3, **INK_SEARCH))
        assert match_placements(result, truth, tol=2).recall == 1.0

    def test_truth_is_a_fixed_point(self, diamond_target):
        image, truth = diamond_target
        result = anneal(image, diamond_only(), AnnealConfig(), initial=truth)
        assert result.final_cost == 0
        assert result.iterations_used == 0
        assert result.placements == truth

    def test_deterministic(self, diamond_target):
        from synth.overlap import overlap_templates

        image, _ = diamond_target
        config = AnnealConfig(max_iterations=2000, seed=11)
        a = anneal(image, overlap_templates(), config)
        b = anneal(image, overlap_templates(), config)
        assert a.to_dict() == b.to_dict()

    def test_zero_temperature_never_climbs(self, diamond_target):
        from synth.overlap import overlap_templates

        image, _ = diamond_target
        config = AnnealConfig(
            max_iterations=2000,
            initial_temperature=0.0,
            record_trace=True,
            alpha=5000,
            restart=False,
            seed=5,
        )
        trace = anneal(image, overlap_templates(), config).trace
        assert trace is not None
        assert all(b <= a for a, b in zip(trace, trace[1:]))

    def test_zero_budget_fits_nothing(self, diamond_target):
        image, _ = diamond_target
        result = anneal(image, diamond_only(), AnnealConfig(max_iterations=0))
        assert result.placements == []
        assert result.final_cost == image.count()
        assert result.iterations_used == 0

    def test_far_start_triggers_restart(self, diamond_target):
        image, _ = diamond_target
        config = AnnealConfig(max_iterations=1, jump_probability=0.0)
        result = anneal(image, diamond_only(), config, initial=[Placement("diamond", 0, 0)])
        assert result.restarted
        assert not result.converged

    def test_no_restart_when_disabled(self, diamond_target):
        image, _ = diamond_target
        config = AnnealConfig(max_iterations=1, jump_probability=0.0, restart=False)
        result = anneal(image, diamond_only(), config, initial=[Placement("diamond", 0, 0)])
        assert not result.restarted

    def test_final_cost_matches_placements(self, diamond_target):
        from synth.overlap import overlap_templates

        image, _ = diamond_target
        result = anneal(image, overlap_templates(), AnnealConfig(max_iterations=500, seed=2))
        assert result.final_cost == cost(image, result.placements, overlap_templates())

    def test_duplicates_are_removed(self, diamond_target):
        image, truth = diamond_target
        annealer = DataPointAnnealer(image, diamond_only(), AnnealConfig())
        annealer._load(truth + [Placement("diamond", 12, 40)])
        assert annealer.remove_duplicates() == 1
        assert annealer.placements() == truth
        assert annealer.energy == 0


class TestDefaultSearch:
    def test_defaults(self):
        config = AnnealConfig()
        assert config.init == "uniform"
        assert config.jump_probability == 0.0

    def test_initial_offsets_are_seeded_uniform(self, diamond_target):
        image, _ = diamond_target
        spawned = DataPointAnnealer(image, diamond_only(), AnnealConfig(seed=3))._spawn()
        rng = np.random.default_rng(3)
        expected = []
        for _ in range(4):
            i = int(rng.integers(0, 80))
            j = int(rng.integers(0, 80))
            expected.append(Placement("diamond", i, j))
        assert spawned == expected

    def test_moves_are_one_pixel_per_axis(self, diamond_target):
        image, _ = diamond_target
        annealer = DataPointAnnealer(image, diamond_only(), AnnealConfig(seed=9))
        annealer._load([Placement("diamond", 40, 10), Placement("diamond", 70, 70)])
        annealer.temperature = 50.0
        for _ in range(500):
            before = annealer.offsets.copy()
            annealer.step()
            assert np.abs(annealer.offsets - before).max() <= 1


class TestAnnealErrors:
    def test_empty_target(self):
        with pytest.raises(EmptyTarget):
            anneal(BinaryImage.zeros(20, 20), diamond_only())

    def test_no_templates(self, diamond_target):
        with pytest.raises(NoTemplates):
            anneal(diamond_target[0], [])

    def test_initial_out_of_bounds(self, diamond_target):
        with pytest.raises(OutOfBounds):
            anneal(diamond_target[0], diamond_only(), initial=[Placement("diamond", 80, 80)])

    def test_nothing_fits(self):
        with pytest.raises(OutOfBounds):
            anneal(BinaryImage(np.ones((5, 5), dtype=bool)), diamond_only())

    @pytest.mark.parametrize("e", [0.0, 1.0, 1.5])
    def test_cooling_fraction_range(self, e):
        with pytest.raises(ConfigError):
            AnnealConfig(temp_constant_e=e)

    def test_periods_must_be_positive(self):
        with pytest.raises(ConfigError):
            AnnealConfig(beta=0)


class TestMatching:
    def test_exact(self):
        truth = [Placement("diamond", 10, 10), Placement("triangle", 30, 5)]
        report = match_placements(list(truth), truth)
        assert report.recall == 1.0
        assert report.spurious == [] and report.missed == []

    def test_nothing_found(self):
        report = match_placements([], [Placement("diamond", 10, 10)])
        assert report.recall == 0.0
        assert report.per_shape == {"diamond": (1, 0)}

    def test_each_found_matches_once(self):
        truth = [Placement("diamond", 10, 10), Placement("diamond", 11, 11)]
        report = match_placements([Placement("diamond", 10, 11)], truth)
        assert report.recall == 0.5
        assert len(report.missed) == 1

    def test_tolerance_is_chebyshev(self):
        truth = [Placement("diamond", 10, 10)]
        assert match_placements([Placement("diamond", 12, 8)], truth, tol=2).recall == 1.0
        assert match_placements([Placement("diamond", 13, 10)], truth, tol=2).recall == 0.0

    def test_shape_must_agree(self):
        report = match_placements([Placement("triangle", 10, 10)], [Placement("diamond", 10, 10)])
        assert report.recall == 0.0
        assert len(report.spurious) == 1

    def test_empty_truth(self):
        assert match_placements([Placement("diamond", 1, 1)], []).recall == 1.0

    def test_negative_tolerance(self):
        with pytest.raises(ValueError):
            match_placements([], [], tol=-1)
