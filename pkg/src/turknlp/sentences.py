"""Sentence boundary detection with a non-breaking prefix lexicon.

A period splits unless it sits between digits, follows a lexicon prefix, or is
followed by a lowercase continuation. '!', '?' and ellipses split unless the
continuation is lowercase. Closing quotes and brackets stay attached to the
sentence they terminate.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

from .errors import InputError, ParseError

TERMINATORS = ".!?…"
_CLOSERS = "\"'»”’)]}"

NUMERIC_ONLY_MARKER = "#NUMERIC_ONLY#"


@dataclass(frozen=True)
class AbbreviationLexicon:
    """Non-breaking prefixes, stored without their trailing period."""

    entries: frozenset
    numeric_only: frozenset

    def __post_init__(self):
        for entry in self.entries:
            if not entry or entry != entry.strip() or any(c.isspace() for c in entry):
                raise InputError(f"abbreviation contains whitespace or is empty: {entry!r}")
            if entry.endswith("."):
                raise InputError(f"abbreviation must be stored without trailing period: {entry!r}")
        unknown = self.numeric_only - self.entries
        if unknown:
            raise InputError(f"numeric-only flags for unknown entries: {sorted(unknown)}")


def load_abbreviations(source: Union[str, Path, Iterable[str]]) -> AbbreviationLexicon:
    """Parse a prefix-per-line stream; '#' lines are comments, entries may carry
    a trailing #NUMERIC_ONLY# marker."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as f:
                lines = f.readlines()
        except OSError as exc:
            raise InputError(f"cannot read abbreviation lexicon: {exc}") from exc
    else:
        lines = list(source)

    entries = set()
    numeric_only = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        prefix = parts[0].rstrip(".")
        if not prefix:
            raise ParseError(f"empty abbreviation entry: {raw!r}", lineno)
        if len(parts) == 1:
            flag = False
        elif len(parts) == 2 and parts[1] == NUMERIC_ONLY_MARKER:
            flag = True
        else:
            raise ParseError(f"malformed abbreviation line: {raw!r}", lineno)
        entries.add(prefix)
        if flag:
            numeric_only.add(prefix)
    return AbbreviationLexicon(entries=frozenset(entries), numeric_only=frozenset(numeric_only))


def default_lexicon() -> AbbreviationLexicon:
    """The Turkish abbreviation lexicon shipped with the package."""
    return load_abbreviations(Path(__file__).parent / "resources" / "abbreviations_tr.txt")


def _previous_token(text: str, end: int) -> str:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start:end]
    # Opening quotes or brackets glued to the token are not part of the prefix.
    return token.lstrip("\"'«“‘([{")


def _next_solid_char(text: str, start: int) -> str:
    for ch in text[start:]:
        if not ch.isspace():
            return ch
    return ""


def _is_boundary(text: str, run_start: int, run_end: int, after: int,
                 lexicon: AbbreviationLexicon) -> bool:
    nxt = _next_solid_char(text, after)
    if nxt and nxt.islower():
        return False
    if run_end == run_start and text[run_start] == ".":
        i = run_start
        if 0 < i < len(text) - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
            return False
        prev = _previous_token(text, i)
        if prev in lexicon.entries:
            if prev in lexicon.numeric_only:
                return not (nxt != "" and nxt.isdigit())
            return False
    return True


def split_sentences(text: str, lexicon: AbbreviationLexicon) -> list:
    """Split text into sentences; inner whitespace runs collapse to single spaces."""
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in TERMINATORS:
            i += 1
            continue
        run_start = i
        while i + 1 < n and text[i + 1] in TERMINATORS:
            i += 1
        run_end = i
        after = i + 1
        while after < n and text[after] in _CLOSERS:
            after += 1
        if _is_boundary(text, run_start, run_end, after, lexicon):
            chunk = " ".join(text[start:after].split())
            if chunk:
                sentences.append(chunk)
            start = after
        i = after
    tail = " ".join(text[start:].split())
    if tail:
        sentences.append(tail)
    return sentences
