"""
Line-oriented text persistence for :class:`SvmModel`.

File layout::

    svmlinear v1
    dim N
    c <val>
    bias <val>
    scale_min <N vals>
    scale_range <N vals>
    w <N vals>

Reals are written with 17 significant digits so a round trip is bit-exact.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from errors import MalformedModelFile, ModelIoError
from svm.linear_svm import SvmModel

logger = logging.getLogger(__name__)

HEADER = "svmlinear v1"
VECTOR_KEYS = ("scale_min", "scale_range", "w")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def save_model(model: SvmModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    lines = [
        HEADER,
        f"dim {model.dim}",
        f"c {_fmt(model.c_param)}",
        f"bias {_fmt(model.bias)}",
        "scale_min " + " ".join(_fmt(v) for v in model.scale_min),
        "scale_range " + " ".join(_fmt(v) for v in model.scale_range),
        "w " + " ".join(_fmt(v) for v in model.weights),
    ]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    except OSError as e:
        raise ModelIoError(f"cannot write model to {path}: {e}")
    logger.info(f"Saved {model.dim}-dim model to {path}")
    return path


def _parse_floats(key: str, tokens: List[str], path: Path) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MalformedModelFile(f"{path}: non-numeric value in '{key}' line")


def load_model(path: Union[str, Path]) -> SvmModel:
    """
    Read a model written by :func:`save_model`.

    Raises
    ------
    ModelIoError
        The file cannot be read.
    MalformedModelFile
        The header, a required line, or a vector length is wrong.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise ModelIoError(f"cannot read model {path}: {e}")

    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != HEADER:
        raise MalformedModelFile(f"{path}: missing '{HEADER}' header")

    fields: Dict[str, List[str]] = {}
    for line in lines[1:]:
        key, *tokens = line.split()
        if key in fields:
            raise MalformedModelFile(f"{path}: duplicate '{key}' line")
        fields[key] = tokens

    for key in ("dim", "c", "bias") + VECTOR_KEYS:
        if key not in fields:
            raise MalformedModelFile(f"{path}: missing '{key}' line")
    for key in ("dim", "c", "bias"):
        if len(fields[key]) != 1:
            raise MalformedModelFile(f"{path}: '{key}' takes exactly one value")

    try:
        dim = int(fields["dim"][0])
    except ValueError:
        raise MalformedModelFile(f"{path}: dimension is not an integer")
    c_param = _parse_floats("c", fields["c"], path)[0]
    bias = _parse_floats("bias", fields["bias"], path)[0]
    vectors = {}
    for key in VECTOR_KEYS:
        values = _parse_floats(key, fields[key], path)
        if len(values) != dim:
            raise MalformedModelFile(f"{path}: '{key}' has {len(values)} values, header declares {dim}")
        vectors[key] = np.array(values)

    try:
        return SvmModel(
            weights=vectors["w"],
            bias=bias,
            c_param=c_param,
            scale_min=vectors["scale_min"],
            scale_range=vectors["scale_range"],
        )
    except ValueError as e:
        raise MalformedModelFile(f"{path}: {e}")
