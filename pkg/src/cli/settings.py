"""
Run configuration: JSON config file, CLI overrides and template lookup.

A config file may hold three optional sections::

    {
      "features": {"block_size": 8, "bins": 16, ...},
      "segmentation": {"guard_band": 2, "match_threshold": 0.85, ...},
      "anneal": {"max_iterations": 10000, "temp_constant_e": 0.4, ...}
    }

Unknown sections or keys are rejected.
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from anneal.annealer import AnnealConfig
from errors import ConfigError
from features.caption import load_lexicon
from features.vector import FeatureConfig
from plotseg.regions import SegmentConfig
from plotseg.templates import ShapeTemplate, default_library, load_template_dir

logger = logging.getLogger(__name__)

TEMPLATES_ENV = "PLOTMINER_TEMPLATES"
DEFAULT_SEED = 42

SECTIONS = {
    "features": FeatureConfig,
    "segmentation": SegmentConfig,
    "anneal": AnnealConfig,
}


@dataclass(frozen=True)
class Settings:
    features: FeatureConfig = field(default_factory=FeatureConfig)
    segmentation: SegmentConfig = field(default_factory=SegmentConfig)
    anneal: AnnealConfig = field(default_factory=AnnealConfig)

    def to_dict(self) -> Dict:
        return {
            name: {f.name: getattr(getattr(self, name), f.name) for f in fields(getattr(self, name))}
            for name in SECTIONS
        }


def _build(section: str, values: Dict):
    cls = SECTIONS[section]
    if not isinstance(values, dict):
        raise ConfigError(f"config section '{section}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {unknown}")
    if section == "features" and "lexicon" in values:
        values = dict(values, lexicon=tuple(values["lexicon"]))
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"invalid '{section}' settings: {e}") from None


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """
    Read a JSON config file; ``None`` yields all defaults.

    Raises
    ------
    ConfigError
        Unreadable or invalid JSON, unknown sections or keys, or values the
        config classes reject.
    """
    if path is None:
        return Settings()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{path}: unknown config sections {unknown}")
    settings = Settings(**{name: _build(name, values) for name, values in raw.items()})
    logger.debug(f"Loaded settings from {path}")
    return settings


def apply_overrides(
    settings: Settings,
    seed: Optional[int] = None,
    iters: Optional[int] = None,
    temp_const: Optional[float] = None,
    lexicon_path: Optional[Union[str, Path]] = None,
) -> Settings:
    """Apply command-line flags on top of file settings."""
    anneal = settings.anneal
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if iters is not None:
        changes["max_iterations"] = iters
    if temp_const is not None:
        changes["temp_constant_e"] = temp_const
    if changes:
        anneal = replace(anneal, **changes)
    features = settings.features
    if lexicon_path is not None:
        words = load_lexicon(lexicon_path)
        if not words:
            raise ConfigError(f"lexicon {lexicon_path} is empty")
        features = replace(features, lexicon=tuple(words))
    return replace(settings, anneal=anneal, features=features)


def resolve_templates(templates_dir: Optional[Union[str, Path]] = None) -> List[ShapeTemplate]:
    """``--templates DIR``, then ``$PLOTMINER_TEMPLATES``, then the built-in library."""
    directory = templates_dir or os.environ.get(TEMPLATES_ENV)
    if directory:
        return load_template_dir(directory)
    return default_library()


def resolve_seed(seed: Optional[int]) -> int:
    return DEFAULT_SEED if seed is None else int(seed)


def caption_pairs(images: Sequence[Path], captions: Optional[Sequence[Union[str, Path]]]) -> Dict[str, Path]:
    """Pair explicit caption files with images by shared stem."""
    if not captions:
        return {}
    by_stem = {}
    for path in map(Path, captions):
        stem = path.name.split(".")[0]
        by_stem[stem] = path
    return {str(img): by_stem[img.stem] for img in images if img.stem in by_stem}
