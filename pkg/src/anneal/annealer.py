"""
Simulated-annealing disambiguation of overlapping data points.

A blob of fused markers (the target ``B``) is explained by a set of template
placements whose OR-rendering ``C`` should reproduce it. The energy of a
configuration is the Grammian trace ``Tr[(B - C)^T (B - C)]``, which for binary
images is the number of mismatched pixels.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ConfigError, DimensionMismatch, EmptyTarget, NoTemplates, OutOfBounds
from plotseg.templates import ShapeTemplate
from raster.images import BinaryImage

logger = logging.getLogger(__name__)

Templates = Union[Sequence[ShapeTemplate], Mapping[str, ShapeTemplate]]

RESTART_FRACTION = 0.1
INIT_MODES = ("ink", "uniform")


@dataclass(frozen=True)
class Placement:
    """
    One template instance: shape, top-left offset ``(i, j)`` and weight.

    A weight of 0 marks a placement removed as a duplicate.
    """

    shape_id: str
    i: int
    j: int
    weight: int = 1

    def __post_init__(self):
        if self.weight not in (0, 1):
            raise ValueError(f"weight must be 0 or 1, got {self.weight}")

    @property
    def offset(self) -> Tuple[int, int]:
        return self.i, self.j

    def centroid(self, template: ShapeTemplate) -> Tuple[float, float]:
        """True centroid of the placed glyph in target coordinates."""
        row, col = template.centroid
        return self.i + row, self.j + col

    def shifted(self, rows: int, cols: int) -> "Placement":
        return replace(self, i=self.i + rows, j=self.j + cols)

    def to_dict(self) -> Dict:
        return {"shape": self.shape_id, "i": self.i, "j": self.j}

    @classmethod
    def from_dict(cls, record: Dict) -> "Placement":
        return cls(str(record["shape"]), int(record["i"]), int(record["j"]))


@dataclass(frozen=True)
class AnnealConfig:
    """
    Annealing schedule.

    Attributes
    ----------
    max_iterations : int
        Move proposals per run.
    temp_constant_e : float
        Cooling fraction; every ``beta`` steps ``T <- T * (1 - e)``.
    alpha, beta, gamma : int
        Periods of the duplicate sweep, the cooling step and the type swap.
    epsilon : int
        Stop as soon as the cost reaches this value.
    initial_candidates_per_shape : int
        Random placements spawned per template.
    seed : int
    duplicate_distance : float
        Same-shape placements this close (Euclidean, pixels) are duplicates.
    initial_temperature : float, optional
        Starting temperature; ``None`` uses the initial cost.
    restart : bool
        Allow one reseeded restart when a run ends far from the target.
    record_trace : bool
        Keep the cost after every accepted proposal.
    init : str
        ``"uniform"`` (default) draws offsets uniformly within bounds,
        ``"ink"`` centres initial footprints on random foreground pixels.
    jump_probability : float
        Chance that a proposal relocates a placement onto uncovered ink
        instead of shifting it by one pixel. 0 keeps every move to one
        pixel per axis.
    """

    max_iterations: int = 10000
    temp_constant_e: float = 0.4
    alpha: int = 200
    beta: int = 100
    gamma: int = 150
    epsilon: int = 0
    initial_candidates_per_shape: int = 4
    seed: int = 42
    duplicate_distance: float = 2.0
    initial_temperature: Optional[float] = None
    restart: bool = True
    record_trace: bool = False
    init: str = "uniform"
    jump_probability: float = 0.0

    def __post_init__(self):
        if not 0 < self.temp_constant_e < 1:
            raise ConfigError(f"temp_constant_e must lie in (0, 1), got {self.temp_constant_e}")
        if min(self.alpha, self.beta, self.gamma) < 1:
            raise ConfigError("alpha, beta and gamma must all be >= 1")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.max_iterations < 0:
            raise ConfigError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.initial_candidates_per_shape < 1:
            raise ConfigError("initial_candidates_per_shape must be >= 1")
        if self.duplicate_distance < 0:
            raise ConfigError(f"duplicate_distance must be >= 0, got {self.duplicate_distance}")
        if self.initial_temperature is not None and self.initial_temperature < 0:
            raise ConfigError("initial_temperature must be >= 0")
        if self.init not in INIT_MODES:
            raise ConfigError(f"init must be one of {INIT_MODES}, got '{self.init}'")
        if not 0 <= self.jump_probability <= 1:
            raise ConfigError(f"jump_probability must lie in [0, 1], got {self.jump_probability}")


@dataclass
class AnnealResult:
    placements: List[Placement]
    final_cost: int
    iterations_used: int
    converged: bool
    restarted: bool = False
    seed: int = 0
    trace: Optional[List[int]] = field(default=None, repr=False)

    def to_dict(self) -> Dict:
        return {
            "placements": [p.to_dict() for p in self.placements],
            "final_cost": self.final_cost,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "restarted": self.restarted,
            "seed": self.seed,
        }


def template_map(templates: Templates) -> Dict[str, ShapeTemplate]:
    if isinstance(templates, Mapping):
        return dict(templates)
    return {t.shape_id: t for t in templates}


def _lookup(index: Mapping[str, ShapeTemplate], shape_id: str) -> ShapeTemplate:
    try:
        return index[shape_id]
    except KeyError:
        raise NoTemplates(f"no template named '{shape_id}'") from None


def check_bounds(placement: Placement, template: ShapeTemplate, height: int, width: int):
    if not (0 <= placement.i <= height - template.height and 0 <= placement.j <= width - template.width):
        raise OutOfBounds(
            f"{placement.shape_id} at ({placement.i}, {placement.j}) does not fit a {height}x{width} canvas"
        )


def render(placements: Sequence[Placement], templates: Templates, height: int, width: int) -> BinaryImage:
    """OR every weight-1 placement's mask into an empty ``height x width`` canvas."""
    index = template_map(templates)
    canvas = np.zeros((height, width), dtype=bool)
    for p in placements:
        template = _lookup(index, p.shape_id)
        check_bounds(p, template, height, width)
        if p.weight:
            canvas[p.i:p.i + template.height, p.j:p.j + template.width] |= template.mask.data
    return BinaryImage(canvas)


def grammian_trace(target: np.ndarray, candidate: np.ndarray) -> int:
    """``Tr[(B - C)^T (B - C)]``, summed elementwise instead of forming the product."""
    if target.shape != candidate.shape:
        raise DimensionMismatch(f"target is {target.shape}, candidate is {candidate.shape}")
    diff = target.astype(np.int64) - candidate.astype(np.int64)
    return int(np.einsum("ij,ij->", diff, diff))


def cost(target: BinaryImage, placements: Sequence[Placement], templates: Templates) -> int:
    rendered = render(placements, templates, target.height, target.width)
    return grammian_trace(target.data, rendered.data)


class DataPointAnnealer:
    """
    One annealing run over a fixed target.

    The canvas is kept as per-pixel coverage counts so that moves, swaps and
    removals are costed on the touched window only.

    Parameters
    ----------
    target : BinaryImage
    templates : sequence or mapping of ShapeTemplate
    config : AnnealConfig

    Attributes
    ----------
    temperature : float
    energy : int
        Mismatch count of the current configuration.
    trace : list of int
        Costs after accepted proposals, when ``config.record_trace`` is set.
    """

    def __init__(self, target: BinaryImage, templates: Templates, config: AnnealConfig):
        self.target = target.data
        self.height, self.width = self.target.shape
        self.templates = template_map(templates)
        if not self.templates:
            raise NoTemplates("annealing needs at least one template")
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.masks = {sid: t.mask.data.astype(np.int32) for sid, t in self.templates.items()}

        self.shape_ids: List[str] = []
        self.offsets = np.zeros((0, 2), dtype=np.int64)
        self.active = np.zeros(0, dtype=bool)
        self.coverage = np.zeros(self.target.shape, dtype=np.int32)
        self.energy = 0
        self.temperature = 0.0
        self.trace: List[int] = []

    # -- state --------------------------------------------------------------

    def _bounds(self, shape_id: str) -> Tuple[int, int]:
        t = self.templates[shape_id]
        return self.height - t.height, self.width - t.width

    def _fits(self, shape_id: str) -> bool:
        rows, cols = self._bounds(shape_id)
        return rows >= 0 and cols >= 0

    def _on_pixel(self, shape_id: str, pixels: np.ndarray) -> Tuple[int, int]:
        """Offset centring ``shape_id`` on a random pixel of ``pixels``, clamped."""
        row, col = pixels[int(self.rng.integers(len(pixels)))]
        h, w = self.masks[shape_id].shape
        return self._clamp(shape_id, int(row) - h // 2, int(col) - w // 2)

    def _spawn(self) -> List[Placement]:
        ink = np.argwhere(self.target)
        spawned = []
        for shape_id in self.templates:
            if not self._fits(shape_id):
                logger.debug(f"Template '{shape_id}' does not fit a {self.height}x{self.width} target")
                continue
            max_i, max_j = self._bounds(shape_id)
            for _ in range(self.config.initial_candidates_per_shape):
                if self.config.init == "ink" and len(ink):
                    i, j = self._on_pixel(shape_id, ink)
                else:
                    i = int(self.rng.integers(0, max_i + 1))
                    j = int(self.rng.integers(0, max_j + 1))
                spawned.append(Placement(shape_id, i, j))
        if not spawned:
            raise OutOfBounds(f"no template fits a {self.height}x{self.width} target")
        return spawned

    def _load(self, placements: Sequence[Placement]):
        for p in placements:
            check_bounds(p, _lookup(self.templates, p.shape_id), self.height, self.width)
        self.shape_ids = [p.shape_id for p in placements]
        self.offsets = np.array([[p.i, p.j] for p in placements], dtype=np.int64).reshape(-1, 2)
        self.active = np.array([p.weight == 1 for p in placements], dtype=bool)
        self._rebuild()

    def _rebuild(self):
        self.coverage[...] = 0
        for k in np.flatnonzero(self.active):
            self._stamp(k, self.offsets[k], 1)
        self.energy = int(np.count_nonzero((self.coverage > 0) != self.target))

    def _stamp(self, k: int, offset, sign: int):
        mask = self.masks[self.shape_ids[k]]
        i, j = int(offset[0]), int(offset[1])
        self.coverage[i:i + mask.shape[0], j:j + mask.shape[1]] += sign * mask

    def _mismatch(self, top: int, left: int, bottom: int, right: int) -> int:
        window = (slice(top, bottom), slice(left, right))
        return int(np.count_nonzero((self.coverage[window] > 0) != self.target[window]))

    def _window(self, ks, offsets) -> Tuple[int, int, int, int]:
        top = left = None
        bottom = right = 0
        for k, (i, j) in zip(ks, offsets):
            h, w = self.masks[self.shape_ids[k]].shape
            top = i if top is None else min(top, i)
            left = j if left is None else min(left, j)
            bottom, right = max(bottom, i + h), max(right, j + w)
        return int(top), int(left), int(bottom), int(right)

    def _relocate(self, moves: Dict[int, Tuple[int, int]]) -> int:
        """Move placements to new offsets, returning the energy change."""
        ks = list(moves)
        window = self._window(ks + ks, [tuple(self.offsets[k]) for k in ks] + [moves[k] for k in ks])
        before = self._mismatch(*window)
        for k in ks:
            self._stamp(k, self.offsets[k], -1)
        for k in ks:
            self.offsets[k] = moves[k]
            self._stamp(k, self.offsets[k], 1)
        delta = self._mismatch(*window) - before
        self.energy += delta
        return delta

    def _set_active(self, k: int, on: bool) -> int:
        window = self._window([k], [tuple(self.offsets[k])])
        before = self._mismatch(*window)
        self._stamp(k, self.offsets[k], 1 if on else -1)
        self.active[k] = on
        delta = self._mismatch(*window) - before
        self.energy += delta
        return delta

    def placements(self, only_active: bool = True) -> List[Placement]:
        return [
            Placement(sid, int(off[0]), int(off[1]), int(on))
            for sid, off, on in zip(self.shape_ids, self.offsets, self.active)
            if on or not only_active
        ]

    # -- proposals ----------------------------------------------------------

    def _accept(self, delta: int) -> bool:
        if delta <= 0:
            return True
        if self.temperature <= 0:
            return False
        return self.rng.random() < math.exp(-delta / self.temperature)

    def _clamp(self, shape_id: str, i: int, j: int) -> Tuple[int, int]:
        max_i, max_j = self._bounds(shape_id)
        return min(max(i, 0), max_i), min(max(j, 0), max_j)

    def _propose(self, moves: Dict[int, Tuple[int, int]]):
        previous = {k: tuple(int(v) for v in self.offsets[k]) for k in moves}
        delta = self._relocate(moves)
        if self._accept(delta):
            if self.config.record_trace:
                self.trace.append(self.energy)
        else:
            self._relocate(previous)

    def step(self):
        """
        Perturb one active placement.

        Usually the placement shifts by at most one pixel per axis; with
        ``jump_probability`` it is instead re-centred on ink no placement
        covers yet.
        """
        live = np.flatnonzero(self.active)
        if live.size == 0:
            return
        k = int(live[self.rng.integers(live.size)])
        if self.config.jump_probability and self.rng.random() < self.config.jump_probability:
            uncovered = np.argwhere(self.target & (self.coverage == 0))
            if len(uncovered):
                self._propose({k: self._on_pixel(self.shape_ids[k], uncovered)})
            return
        u = self.rng.random(2) * 2 - 1
        # round-half-away-from-zero of a value in (-1, 1)
        di, dj = (int(np.sign(v)) if abs(v) >= 0.5 else 0 for v in u)
        i, j = self.offsets[k]
        target = self._clamp(self.shape_ids[k], int(i) + di, int(j) + dj)
        if target != (int(i), int(j)):
            self._propose({k: target})

    def swap_types(self):
        """Exchange the offsets of two live placements of different shapes."""
        live = np.flatnonzero(self.active)
        pairs = [
            (int(a), int(b))
            for n, a in enumerate(live)
            for b in live[n + 1:]
            if self.shape_ids[a] != self.shape_ids[b]
        ]
        if not pairs:
            return
        a, b = pairs[int(self.rng.integers(len(pairs)))]
        ia, ja = self.offsets[a]
        ib, jb = self.offsets[b]
        self._propose({
            a: self._clamp(self.shape_ids[a], int(ib), int(jb)),
            b: self._clamp(self.shape_ids[b], int(ia), int(ja)),
        })

    def remove_duplicates(self) -> int:
        """Zero the weight of the later of any two coinciding same-shape placements."""
        removed = 0
        live = list(np.flatnonzero(self.active))
        for n, a in enumerate(live):
            if not self.active[a]:
                continue
            for b in live[n + 1:]:
                if not self.active[b] or self.shape_ids[a] != self.shape_ids[b]:
                    continue
                if np.hypot(*(self.offsets[a] - self.offsets[b])) <= self.config.duplicate_distance:
                    self._set_active(int(b), False)
                    removed += 1
        if removed:
            logger.debug(f"Removed {removed} duplicate placements, energy {self.energy}")
        return removed

    def prune(self) -> int:
        """Drop placements whose removal does not raise the cost."""
        removed = 0
        for k in np.flatnonzero(self.active):
            if self._set_active(int(k), False) > 0:
                self._set_active(int(k), True)
            else:
                removed += 1
        return removed

    # -- driver -------------------------------------------------------------

    def run(self, initial: Optional[Sequence[Placement]] = None) -> AnnealResult:
        config = self.config
        self._load(list(initial) if initial is not None else self._spawn())
        self.temperature = float(self.energy if config.initial_temperature is None else config.initial_temperature)
        logger.debug(f"Annealing {len(self.shape_ids)} candidates, E0={self.energy}, T0={self.temperature}")

        best_energy = self.energy
        best_state = (self.offsets.copy(), self.active.copy())
        iterations = 0
        while self.energy > config.epsilon and iterations < config.max_iterations:
            iterations += 1
            self.step()
            if iterations % config.alpha == 0:
                self.remove_duplicates()
            if iterations % config.beta == 0:
                self.temperature *= 1 - config.temp_constant_e
            if iterations % config.gamma == 0:
                self.swap_types()
            if self.energy < best_energy:
                best_energy = self.energy
                best_state = (self.offsets.copy(), self.active.copy())

        self.offsets, self.active = best_state
        self._rebuild()
        pruned = self.prune()
        result = AnnealResult(
            placements=self.placements(),
            final_cost=self.energy,
            iterations_used=iterations,
            converged=self.energy <= config.epsilon,
            seed=config.seed,
            trace=list(self.trace) if config.record_trace else None,
        )
        logger.debug(
            f"Anneal seed={config.seed}: cost {result.final_cost} after {iterations} iterations, "
            f"{len(result.placements)} placements ({pruned} pruned)"
        )
        return result


def anneal(
    target: BinaryImage,
    templates: Templates,
    config: AnnealConfig = AnnealConfig(),
    initial: Optional[Sequence[Placement]] = None,
) -> AnnealResult:
    """
    Explain ``target`` as a union of template placements.

    Runs :class:`DataPointAnnealer` once; when the run neither converged nor
    got within a tenth of the target's foreground, it is repeated once with
    ``seed + 1`` and the lower-cost result is kept.

    A zero iteration budget fits nothing and returns no placements.

    Raises
    ------
    EmptyTarget
        ``target`` has no foreground.
    NoTemplates
        ``templates`` is empty.
    OutOfBounds
        No template fits the target, or an ``initial`` placement is out of bounds.
    """
    if not template_map(templates):
        raise NoTemplates("annealing needs at least one template")
    foreground = target.count()
    if foreground == 0:
        raise EmptyTarget("target image has no foreground")
    if config.max_iterations == 0 and initial is None:
        return AnnealResult([], foreground, 0, foreground <= config.epsilon, seed=config.seed)

    result = DataPointAnnealer(target, templates, config).run(initial)
    if config.restart and not result.converged and result.final_cost > RESTART_FRACTION * foreground:
        logger.info(f"Anneal ended at cost {result.final_cost}/{foreground}, restarting with seed {config.seed + 1}")
        second = DataPointAnnealer(target, templates, replace(config, seed=config.seed + 1)).run(initial)
        if second.final_cost < result.final_cost:
            result = second
        result.restarted = True
    return result
