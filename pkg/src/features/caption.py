"""Caption-text (CT) features: keyword presence booleans."""

import logging
import re
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_LEXICON = ("distribution", "slope", "axes", "plot", "range")

_PUNCTUATION = re.compile(r"[^\w\s]")


def tokenize(caption: str) -> List[str]:
    """Lowercase, turn punctuation into spaces and split on whitespace."""
    return _PUNCTUATION.sub(" ", (caption or "").lower()).split()


def _forms(word: str) -> set:
    # "plot" also matches "plots"; a plural entry such as "ranges" also matches
    # "range"; words already ending in "es" ("axes") match only themselves.
    word = word.lower()
    forms = {word, word + "s"}
    if word.endswith("s") and not word.endswith("es") and len(word) > 1:
        forms.add(word[:-1])
    return forms


def caption_features(caption: str, lexicon: Sequence[str] = DEFAULT_LEXICON) -> np.ndarray:
    """
    Keyword presence vector for a figure caption.

    Parameters
    ----------
    caption : str
        Caption text, possibly empty.
    lexicon : sequence of str
        Ordered keywords; output position ``i`` reports ``lexicon[i]``.

    Returns
    -------
    numpy.ndarray
        Boolean vector of length ``len(lexicon)``.
    """
    tokens = set(tokenize(caption))
    return np.array([bool(_forms(word) & tokens) for word in lexicon], dtype=bool)


def load_lexicon(path: Union[str, Path]) -> List[str]:
    """Read a newline-separated keyword file; blank lines and ``#`` comments are skipped."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line.lower())
    logger.debug(f"Loaded {len(words)} lexicon words from {path}")
    return words
