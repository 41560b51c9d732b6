"""Context-pattern deasciification: restore ç/ğ/ı/ö/ş/ü in ASCII-typed Turkish.

Each occurrence of a candidate letter is judged by weighted context patterns.
A pattern is the case- and accent-folded window around the letter with '_'
standing for the letter itself. At apply time the longest matching window
length wins; the summed weight at that length must be positive to convert.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

from .errors import InputError, ParseError
from .normalization import lower_case, remove_accent_marks

DEFAULT_RADIUS = 5

# Plain ASCII letter -> accented replacement. 'I' maps to dotted capital İ;
# a dotless 'I' that should stay (IŞIK) must win through negative evidence.
_REPLACEMENT = {
    "c": "ç", "g": "ğ", "i": "ı", "o": "ö", "s": "ş", "u": "ü",
    "C": "Ç", "G": "Ğ", "I": "İ", "O": "Ö", "S": "Ş", "U": "Ü",
}

# Training labels: accented occurrences vote +1 for conversion, plain ones -1.
# The i family votes on dottedness instead: ASCII 'i' is dotted while ASCII
# 'I' is dotless, so "convert" points in opposite directions for the two
# cases and the trained 'I' map is the negation of the 'i' map.
_TRAIN_LABEL = {
    "ç": ("c", 1), "c": ("c", -1), "Ç": ("c", 1), "C": ("c", -1),
    "ğ": ("g", 1), "g": ("g", -1), "Ğ": ("g", 1), "G": ("g", -1),
    "ı": ("i", 1), "i": ("i", -1), "İ": ("i", -1), "I": ("i", 1),
    "ö": ("o", 1), "o": ("o", -1), "Ö": ("o", 1), "O": ("o", -1),
    "ş": ("s", 1), "s": ("s", -1), "Ş": ("s", 1), "S": ("s", -1),
    "ü": ("u", 1), "u": ("u", -1), "Ü": ("u", 1), "U": ("u", -1),
}


@dataclass(frozen=True)
class DeasciiPatternTable:
    """Per candidate letter: context-pattern string -> signed weight."""

    patterns: Dict[str, Dict[str, float]]
    radius: int = DEFAULT_RADIUS

    def patterns_for(self, letter: str) -> Dict[str, float]:
        got = self.patterns.get(letter)
        if got is None:
            got = self.patterns.get(letter.lower(), {})
        return got


def _fold(text: str) -> str:
    """Case- and accent-fold, with a space sentinel at both ends.

    Any whitespace becomes a plain space so patterns stay single-line; the
    sentinels let word-final patterns match at string boundaries. Position i
    of the original text is position i+1 of the folded text.
    """
    folded = remove_accent_marks(lower_case(text))
    return " " + "".join(" " if c.isspace() else c for c in folded) + " "


def _windows(folded: str, pos: int, radius: int) -> Iterable[Tuple[int, str]]:
    """All (length, pattern) windows around pos, '_' at the letter slot."""
    left_max = min(radius, pos)
    right_max = min(radius, len(folded) - pos - 1)
    for l in range(left_max + 1):
        left = folded[pos - l:pos]
        for r in range(right_max + 1):
            yield l + r, left + "_" + folded[pos + 1:pos + 1 + r]


def deasciify(text: str, table: DeasciiPatternTable) -> str:
    out = []
    folded = _fold(text)
    for pos, ch in enumerate(text):
        repl = _REPLACEMENT.get(ch)
        if repl is None:
            out.append(ch)
            continue
        weights = table.patterns_for(ch)
        if not weights:
            out.append(ch)
            continue
        best_len = -1
        score = 0.0
        for length, pattern in _windows(folded, pos + 1, table.radius):
            w = weights.get(pattern)
            if w is None:
                continue
            if length > best_len:
                best_len = length
                score = w
            elif length == best_len:
                score += w
        out.append(repl if score > 0 else ch)
    return "".join(out)


def train_deascii_table(corpus: str, radius: int = DEFAULT_RADIUS,
                        prune_below: float = 1.0) -> DeasciiPatternTable:
    """Count pattern co-occurrences in correctly accented text.

    Keys are lowercase (plus an explicit 'I' map, see _TRAIN_LABEL);
    apply-time lookup folds the letter case. Patterns with |weight| below
    prune_below are dropped to keep the table compact.
    """
    if not corpus.strip():
        raise InputError("deasciifier training corpus is empty")
    counts = {letter: defaultdict(float) for letter in "cgiosu"}
    folded = _fold(corpus)
    for pos, ch in enumerate(corpus):
        labeled = _TRAIN_LABEL.get(ch)
        if labeled is None:
            continue
        letter, vote = labeled
        bucket = counts[letter]
        for _, pattern in _windows(folded, pos + 1, radius):
            bucket[pattern] += vote
    patterns = {}
    for letter, bucket in counts.items():
        kept = {p: w for p, w in bucket.items() if abs(w) >= prune_below and w != 0.0}
        if kept:
            patterns[letter] = kept
    if "i" in patterns:
        patterns["I"] = {p: -w for p, w in patterns["i"].items()}
    return DeasciiPatternTable(patterns=patterns, radius=radius)


def save_deascii_table(table: DeasciiPatternTable, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# radius {table.radius}\n")
        for letter in sorted(table.patterns):
            for pattern, weight in sorted(table.patterns[letter].items()):
                f.write(f"{letter}\t{pattern}\t{weight:g}\n")


def load_deascii_table(source: Union[str, Path]) -> DeasciiPatternTable:
    try:
        with open(source, encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        raise InputError(f"cannot read deascii pattern table: {exc}") from exc
    radius = DEFAULT_RADIUS
    patterns: Dict[str, Dict[str, float]] = defaultdict(dict)
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "radius":
                radius = int(parts[1])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected letter<TAB>pattern<TAB>weight: {line!r}", lineno)
        letter, pattern, weight_text = parts
        if letter not in _REPLACEMENT:
            raise ParseError(f"unknown candidate letter {letter!r}", lineno)
        if "_" not in pattern:
            raise ParseError(f"pattern lacks the '_' letter slot: {pattern!r}", lineno)
        try:
            weight = float(weight_text)
        except ValueError as exc:
            raise ParseError(f"bad weight {weight_text!r}", lineno) from exc
        patterns[letter][pattern] = weight
    return DeasciiPatternTable(patterns=dict(patterns), radius=radius)


def default_deascii_table() -> DeasciiPatternTable:
    return load_deascii_table(Path(__file__).parent / "resources" / "deascii_patterns_tr.txt")
