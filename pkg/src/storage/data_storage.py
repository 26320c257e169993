"""
JSON persistence for corpora, truth sidecars and command output.

Batch results are JSON lines written one record at a time and flushed, so a
run interrupted half-way still leaves every finished record on disk.
Canonical serialisation (sorted keys, floats rounded to six decimals) keeps outputs
byte-stable across runs.
"""

import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Dict, Iterator, List, Optional, TextIO, Union

import numpy as np

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRUTH_SUFFIX = ".truth.json"
CAPTION_SUFFIX = ".caption.txt"


def _canonical(value):
    """Recursively convert numpy scalars/arrays and fix float precision."""
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_canonical(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"cannot serialise non-finite float {value}")
        return round(value, 6) + 0.0
    return value


def dumps_canonical(record, indent: Optional[int] = None) -> str:
    """
    Serialise with sorted keys and every float rounded to six decimals.

    Re-reading the text and serialising it again yields identical bytes.
    """
    return json.dumps(_canonical(record), sort_keys=True, indent=indent)


def write_json(record, path: PathLike, indent: Optional[int] = 2) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_canonical(record, indent=indent) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike):
    with open(path) as handle:
        return json.load(handle)


class JsonLinesWriter:
    """
    Write one canonical JSON record per line.

    Parameters
    ----------
    path : str or Path, optional
        Target file; ``None`` writes to stdout.
    append : bool, optional
        Append to an existing file instead of truncating it.

    Attributes
    ----------
    records_written : int
    """

    def __init__(self, path: Optional[PathLike] = None, append: bool = False):
        self.path = Path(path) if path is not None else None
        self.records_written = 0
        self.handle: Optional[TextIO] = None
        if self.path is None:
            self.handle = sys.stdout
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.handle = open(self.path, "a" if append else "w")
            logger.debug(f"Opened JSON lines file: {self.path}")

    def write(self, record: Dict):
        self.handle.write(dumps_canonical(record) + "\n")
        self.handle.flush()
        self.records_written += 1

    def close(self):
        if self.handle is not None and self.path is not None:
            self.handle.close()
            logger.info(f"Closed {self.path} after {self.records_written} records")
        self.handle = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_json_lines(path: PathLike) -> Iterator[Dict]:
    """Yield records from a JSON-lines file, skipping blank lines."""
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{number}: invalid JSON ({exc.msg})") from None


def sidecar_path(image_path: PathLike, suffix: str) -> Path:
    """``plots/a.pgm`` + ``.truth.json`` -> ``plots/a.truth.json``."""
    image_path = Path(image_path)
    return image_path.with_name(image_path.stem + suffix)


def read_caption(image_path: PathLike) -> Optional[str]:
    """Caption sidecar text for an image, or ``None`` when absent."""
    path = sidecar_path(image_path, CAPTION_SUFFIX)
    if not path.exists():
        return None
    return path.read_text()


def write_caption(image_path: PathLike, caption: str) -> Path:
    path = sidecar_path(image_path, CAPTION_SUFFIX)
    path.write_text(caption)
    return path


def read_truth(image_path: PathLike) -> Optional[Dict]:
    path = sidecar_path(image_path, TRUTH_SUFFIX)
    if not path.exists():
        return None
    return read_json(path)


def write_truth(image_path: PathLike, truth: Dict) -> Path:
    return write_json(truth, sidecar_path(image_path, TRUTH_SUFFIX))


def ensure_dir(path: PathLike) -> Path:
    os.makedirs(path, exist_ok=True)
    return Path(path)


def list_images(paths: List[PathLike]) -> List[Path]:
    """Expand directories to their ``.pgm``/``.png`` files, keeping argument order."""
    found: List[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in (".pgm", ".png")))
        else:
            found.append(p)
    return found
