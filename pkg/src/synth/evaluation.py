"""Disambiguation recall over seeded corpora of overlap images."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from anneal.annealer import AnnealConfig, Templates, anneal
from anneal.matching import MatchReport, match_placements
from synth.overlap import OverlapSpec, gen_overlap_image, overlap_templates

logger = logging.getLogger(__name__)


@dataclass
class RecallTable:
    """Per-shape totals and correct counts, in the order shapes were first seen."""

    counts: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    images: int = 0

    def add(self, report: MatchReport):
        self.images += 1
        for shape_id, (total, correct) in report.per_shape.items():
            t, c = self.counts.get(shape_id, (0, 0))
            self.counts[shape_id] = (t + total, c + correct)

    def recall(self, shape_id: str) -> float:
        total, correct = self.counts.get(shape_id, (0, 0))
        return correct / total if total else 1.0

    @property
    def total(self) -> int:
        return sum(t for t, _ in self.counts.values())

    @property
    def correct(self) -> int:
        return sum(c for _, c in self.counts.values())

    @property
    def aggregate_recall(self) -> float:
        return self.correct / self.total if self.total else 1.0

    def to_dict(self) -> Dict:
        return {
            "images": self.images,
            "shapes": [
                {"shape": s, "total": t, "correct": c, "recall": self.recall(s)}
                for s, (t, c) in self.counts.items()
            ],
            "aggregate_recall": self.aggregate_recall,
        }

    def format_text(self) -> str:
        rows = [("Shape", "Total", "# Correct", "% Recall")]
        rows += [(s, str(t), str(c), f"{100 * self.recall(s):.1f}") for s, (t, c) in self.counts.items()]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        return "\n".join("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip() for r in rows)


def eval_disambiguation(
    n_images: int,
    spec_template: OverlapSpec = OverlapSpec(),
    config: AnnealConfig = AnnealConfig(),
    tol: int = 2,
    templates: Optional[Templates] = None,
    workers: int = 1,
) -> RecallTable:
    """
    Generate, anneal and score ``n_images`` overlap images.

    Image ``k`` uses generation seed ``spec_template.seed + k`` and annealing
    seed ``config.seed + k``; the table is the same for any ``workers``.
    """
    if n_images < 1:
        raise ValueError(f"n_images must be >= 1, got {n_images}")
    templates = templates if templates is not None else overlap_templates()

    def run_image(k: int) -> MatchReport:
        image, truth = gen_overlap_image(spec_template.with_seed(spec_template.seed + k), templates)
        result = anneal(image, templates, replace(config, seed=config.seed + k))
        report = match_placements(result, truth, tol)
        logger.debug(f"Image {k}: cost {result.final_cost}, recall {report.recall:.3f}")
        return report

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports: List[MatchReport] = list(pool.map(run_image, range(n_images)))
    else:
        reports = [run_image(k) for k in range(n_images)]

    table = RecallTable()
    for report in reports:
        table.add(report)
    logger.info(f"Disambiguation over {n_images} images: aggregate recall {100 * table.aggregate_recall:.1f}%")
    return table
