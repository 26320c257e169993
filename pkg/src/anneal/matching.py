"""Score annealed placements against ground truth."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

from anneal.annealer import AnnealResult, Placement


@dataclass
class MatchReport:
    """
    Outcome of one-to-one matching.

    Attributes
    ----------
    per_shape : dict
        ``shape_id -> (total, correct)`` over truth placements.
    matched : list of (truth, result) pairs
    missed : list of Placement
        Truth placements with no partner.
    spurious : list of Placement
        Result placements left unmatched.
    """

    per_shape: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    matched: List[Tuple[Placement, Placement]] = field(default_factory=list)
    missed: List[Placement] = field(default_factory=list)
    spurious: List[Placement] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(t for t, _ in self.per_shape.values())

    @property
    def correct(self) -> int:
        return sum(c for _, c in self.per_shape.values())

    @property
    def recall(self) -> float:
        return self.correct / self.total if self.total else 1.0

    def shape_recall(self, shape_id: str) -> float:
        total, correct = self.per_shape.get(shape_id, (0, 0))
        return correct / total if total else 1.0

    def to_dict(self) -> Dict:
        return {
            "recall": self.recall,
            "per_shape": {
                sid: {"total": t, "correct": c, "recall": self.shape_recall(sid)}
                for sid, (t, c) in sorted(self.per_shape.items())
            },
            "matched": [{"truth": t.to_dict(), "found": f.to_dict()} for t, f in self.matched],
            "missed": [p.to_dict() for p in self.missed],
            "spurious": [p.to_dict() for p in self.spurious],
        }


def chebyshev(a: Placement, b: Placement) -> int:
    return max(abs(a.i - b.i), abs(a.j - b.j))


def match_placements(
    result: Union[AnnealResult, Sequence[Placement]],
    truth: Sequence[Placement],
    tol: int = 2,
) -> MatchReport:
    """
    Greedy one-to-one matching of truth to found placements.

    Truth placements are visited in order; each takes the nearest unmatched
    found placement of the same shape within ``tol`` (Chebyshev distance on
    offsets), lowest index first on ties.
    """
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    found = list(result.placements if isinstance(result, AnnealResult) else result)
    taken = [False] * len(found)

    report = MatchReport()
    counts: Dict[str, List[int]] = {}
    for t in truth:
        tally = counts.setdefault(t.shape_id, [0, 0])
        tally[0] += 1
        best = None
        for n, f in enumerate(found):
            if taken[n] or f.shape_id != t.shape_id:
                continue
            d = chebyshev(t, f)
            if d <= tol and (best is None or d < best[0]):
                best = (d, n)
        if best is None:
            report.missed.append(t)
            continue
        taken[best[1]] = True
        tally[1] += 1
        report.matched.append((t, found[best[1]]))

    report.per_shape = {sid: (t, c) for sid, (t, c) in counts.items()}
    report.spurious = [f for f, used in zip(found, taken) if not used]
    return report
