"""Exception hierarchy for the plotminer pipeline.

Library code raises these; only the command layer decides whether a failure
stops the run or is recorded per file.
"""

from pathlib import Path
from typing import Optional, Union


class PlotMinerError(Exception):
    """Base class for every error raised by plotminer."""


# Raster ---------------------------------------------------------------------

class RasterError(PlotMinerError):
    """Image decoding or binarization failure, optionally naming a file."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None):
        self.path = str(path) if path is not None else None
        if self.path:
            message = f"{self.path}: {message}"
        super().__init__(message)


class UnreadableFile(RasterError):
    pass


class UnsupportedFormat(RasterError):
    pass


class CorruptHeader(RasterError):
    pass


class DegenerateImage(RasterError):
    pass


# Features -------------------------------------------------------------------

class FeatureError(PlotMinerError, ValueError):
    """Invalid feature-extraction parameters."""


class BlockTooLarge(FeatureError):
    pass


class EmptyFeatureSet(FeatureError):
    pass


# Classifier -----------------------------------------------------------------

class SvmError(PlotMinerError):
    pass


class DimensionMismatch(PlotMinerError, ValueError):
    """Two arrays that must agree in shape do not."""


class SingleClassData(SvmError, ValueError):
    pass


class TooFewSamples(SvmError, ValueError):
    pass


class ModelIoError(SvmError):
    pass


class MalformedModelFile(SvmError):
    pass


# Segmentation ---------------------------------------------------------------

class SegmentationError(PlotMinerError):
    pass


class AxesNotFound(SegmentationError):
    pass


class DegenerateRegion(SegmentationError):
    pass


# Annealing ------------------------------------------------------------------

class AnnealError(PlotMinerError):
    pass


class OutOfBounds(AnnealError, ValueError):
    pass


class NoTemplates(AnnealError, ValueError):
    pass


class EmptyTarget(AnnealError, ValueError):
    pass


# Synthesis / configuration --------------------------------------------------

class InfeasibleSpec(PlotMinerError):
    pass


class ConfigError(PlotMinerError, ValueError):
    pass
