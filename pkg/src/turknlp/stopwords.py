"""Static and frequency-driven stopword removal.

The dynamic detector ranks distinct words by descending frequency, finds the
curve's breaking point as the index farthest from the chord between the first
and last points (after min-max normalization of both axes), and treats every
word strictly above that frequency as a stopword.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import InputError
from .normalization import lower_case


@dataclass(frozen=True)
class StopwordLexicon:
    words: frozenset

    def __post_init__(self):
        for w in self.words:
            if not w:
                raise InputError("stopword lexicon contains an empty entry")
            if w != lower_case(w):
                raise InputError(f"stopword lexicon entry not lowercase: {w!r}")


def load_stopwords(source: Union[str, Path, Iterable[str]]) -> StopwordLexicon:
    """Read a one-word-per-line UTF-8 stopword list."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as f:
                lines = f.readlines()
        except OSError as exc:
            raise InputError(f"cannot read stopword lexicon: {exc}") from exc
    else:
        lines = list(source)
    words = {line.strip() for line in lines}
    words.discard("")
    return StopwordLexicon(words=frozenset(words))


def default_stopwords() -> StopwordLexicon:
    return load_stopwords(Path(__file__).parent / "resources" / "stopwords_tr.txt")


def remove_static(tokens: list, lexicon: StopwordLexicon) -> list:
    return [t for t in tokens if lower_case(t) not in lexicon.words]


def _breaking_point(freqs: np.ndarray) -> int:
    """Index of max perpendicular distance to the chord; first index on ties."""
    n = len(freqs)
    x = np.arange(n, dtype=float) / (n - 1)
    y = (freqs - freqs.min()) / (freqs.max() - freqs.min())
    # chord runs from (x[0], y[0]) to (x[-1], y[-1]); distance is proportional
    # to the cross product magnitude, the constant chord length divides out
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    dist = np.abs(dx * (y[0] - y) - (x[0] - x) * dy)
    return int(np.argmax(dist))


def detect_dynamic_stopwords(tokens: list, fold_case: bool = True) -> set:
    """Corpus-driven stopword set; language-agnostic apart from optional case folding."""
    if not tokens:
        raise InputError("dynamic stopword detection needs a non-empty token list")
    words = [lower_case(t) for t in tokens] if fold_case else list(tokens)
    counts = Counter(words)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    freqs = np.array([c for _, c in ordered], dtype=float)
    if len(np.unique(freqs)) < 3:
        return set()
    threshold = freqs[_breaking_point(freqs)]
    return {w for w, c in counts.items() if c > threshold}


def remove_dynamic(tokens: list, fold_case: bool = True) -> list:
    if not tokens:
        raise InputError("dynamic stopword removal needs a non-empty token list")
    stop = detect_dynamic_stopwords(tokens, fold_case=fold_case)
    if fold_case:
        return [t for t in tokens if lower_case(t) not in stop]
    return [t for t in tokens if t not in stop]
