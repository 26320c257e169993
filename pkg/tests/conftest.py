import logging
import logging.handlers

import numpy as np
import pytest

from anneal.annealer import Placement, render
from plotseg.templates import ShapeTemplate
from raster.images import BinaryImage
from synth.overlap import overlap_templates

COMMAND_HANDLERS = (logging.StreamHandler, logging.handlers.RotatingFileHandler)
INK_SEARCH = {"init": "ink", "jump_probability": 0.1}


@pytest.fixture(autouse=True)
def isolated_logging(monkeypatch):
    """Commands reconfigure the root logger; drop the handlers they add."""
    monkeypatch.delenv("PLOTMINER_TEMPLATES", raising=False)
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers[:]:
        if type(handler) in COMMAND_HANDLERS and handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pixel_template():
    return ShapeTemplate("px", BinaryImage(np.ones((1, 1), dtype=bool)))


@pytest.fixture
def diamond_target():
    """One 11-px diamond at offset (11, 39) on a 90x90 canvas."""
    truth = [Placement("diamond", 11, 39)]
    return render(truth, overlap_templates(), 90, 90), truth


def frame(height, width, row=None, col=None):
    """Binary canvas with an optional fully inked row and column."""
    data = np.zeros((height, width), dtype=bool)
    if row is not None:
        data[row, :] = True
    if col is not None:
        data[:, col] = True
    return BinaryImage(data)
