"""Context-aware spelling correction with a stupid-backoff word LM.

Out-of-dictionary words are replaced by the dictionary candidate within a
small edit distance that best fits the surrounding words. Fit is the sum of
log backoff scores of the three conditional positions the word takes part in.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

from .errors import InputError, ParseError

DEFAULT_ALPHA = 0.4

_ALPHABET = "abcçdefgğhıijklmnoöpqrsştuüvwxyz"


@dataclass(frozen=True)
class FrequencyDictionary:
    counts: Dict[str, int]
    total: int

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise InputError("frequency dictionary total does not match counts")
        if any(c <= 0 for c in self.counts.values()):
            raise InputError("frequency dictionary holds a non-positive count")

    def __contains__(self, word: str) -> bool:
        return word in self.counts

    @staticmethod
    def from_counts(counts: Dict[str, int]) -> "FrequencyDictionary":
        kept = {w: c for w, c in counts.items() if c > 0}
        return FrequencyDictionary(counts=kept, total=sum(kept.values()))


def load_frequency_dictionary(source: Union[str, Path]) -> FrequencyDictionary:
    try:
        with open(source, encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        raise InputError(f"cannot read frequency dictionary: {exc}") from exc
    counts: Dict[str, int] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected word<TAB>count: {line!r}", lineno)
        word, count_text = parts
        try:
            count = int(count_text)
        except ValueError as exc:
            raise ParseError(f"bad count {count_text!r}", lineno) from exc
        if count <= 0:
            raise ParseError(f"count must be positive: {line!r}", lineno)
        if word in counts:
            raise ParseError(f"duplicate word {word!r}", lineno)
        counts[word] = count
    return FrequencyDictionary.from_counts(counts)


def save_frequency_dictionary(dictionary: FrequencyDictionary, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for word in sorted(dictionary.counts):
            f.write(f"{word}\t{dictionary.counts[word]}\n")


@dataclass(frozen=True)
class SpellingModel:
    dictionary: FrequencyDictionary
    trigram_counts: Dict[Tuple[str, str, str], int]
    bigram_counts: Dict[Tuple[str, str], int]
    unigram_counts: Dict[str, int]
    backoff_alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 < self.backoff_alpha < 1.0:
            raise InputError("backoff alpha must lie in (0, 1)")

    @staticmethod
    def from_dictionary(dictionary: FrequencyDictionary,
                        backoff_alpha: float = DEFAULT_ALPHA) -> "SpellingModel":
        """Context-free model: scoring falls straight through to unigrams."""
        return SpellingModel(dictionary=dictionary, trigram_counts={}, bigram_counts={},
                             unigram_counts=dict(dictionary.counts),
                             backoff_alpha=backoff_alpha)

    def score(self, w1: Optional[str], w2: Optional[str], w3: str) -> float:
        """Stupid-backoff score of w3 after (w1, w2); None context never matches."""
        alpha = self.backoff_alpha
        total = max(1, sum(self.unigram_counts.values()))
        if w1 is not None and w2 is not None:
            c3 = self.trigram_counts.get((w1, w2, w3), 0)
            if c3 > 0:
                return c3 / self.bigram_counts[(w1, w2)]
        if w2 is not None:
            c2 = self.bigram_counts.get((w2, w3), 0)
            if c2 > 0:
                return alpha * c2 / self.unigram_counts[w2]
        c1 = self.unigram_counts.get(w3, 0)
        if c1 > 0:
            return alpha * alpha * c1 / total
        return alpha * alpha / total

    def log_score(self, w1: Optional[str], w2: Optional[str], w3: str) -> float:
        return math.log(self.score(w1, w2, w3))


def build_spelling_model(corpus: Iterable[str],
                         backoff_alpha: float = DEFAULT_ALPHA) -> SpellingModel:
    tokens = list(corpus)
    if not tokens:
        raise InputError("spelling model needs a non-empty corpus")
    unigrams = Counter(tokens)
    bigrams = Counter(zip(tokens, tokens[1:]))
    trigrams = Counter(zip(tokens, tokens[1:], tokens[2:]))
    return SpellingModel(dictionary=FrequencyDictionary.from_counts(dict(unigrams)),
                         trigram_counts=dict(trigrams), bigram_counts=dict(bigrams),
                         unigram_counts=dict(unigrams), backoff_alpha=backoff_alpha)


def _edits1(word: str) -> set:
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    deletes = {L + R[1:] for L, R in splits if R}
    transposes = {L + R[1] + R[0] + R[2:] for L, R in splits if len(R) > 1}
    replaces = {L + c + R[1:] for L, R in splits if R for c in _ALPHABET}
    inserts = {L + c + R for L, R in splits for c in _ALPHABET}
    return deletes | transposes | replaces | inserts


def candidates(word: str, dictionary: FrequencyDictionary, max_edit: int) -> set:
    """Dictionary words within max_edit Damerau-Levenshtein edits of word."""
    if max_edit not in (1, 2):
        raise InputError("max_edit must be 1 or 2")
    found = set()
    if word in dictionary:
        found.add(word)
    e1 = _edits1(word)
    found |= {w for w in e1 if w in dictionary}
    if max_edit == 2:
        for e in e1:
            found |= {w for w in _edits1(e) if w in dictionary}
    return found


def _position_score(model: SpellingModel, words: list, i: int, cand: str) -> float:
    """Sum of log backoff scores of the trigram windows that include slot i."""
    def at(j: int) -> Optional[str]:
        if j == i:
            return cand
        if 0 <= j < len(words):
            return words[j]
        return None
    score = model.log_score(at(i - 2), at(i - 1), cand)
    if i + 1 < len(words):
        score += model.log_score(at(i - 1), cand, at(i + 1))
    if i + 2 < len(words):
        score += model.log_score(cand, at(i + 1), at(i + 2))
    return score


def correct_spelling(sentence: list, model: SpellingModel, max_edit: int = 1,
                     margin: Optional[float] = None) -> list:
    """Replace misspelled words; length preserved, corrections chosen greedily
    left to right with already-corrected words as left context."""
    if max_edit not in (1, 2):
        raise InputError("max_edit must be 1 or 2")
    out = list(sentence)
    for i, word in enumerate(out):
        in_dict = word in model.dictionary
        if in_dict and margin is None:
            continue
        cands = candidates(word, model.dictionary, max_edit)
        cands.add(word)
        if len(cands) == 1:
            continue

        def key(cand: str):
            # score first; ties go to dictionary words, then higher counts
            return (_position_score(model, out, i, cand),
                    1 if cand in model.dictionary else 0,
                    model.dictionary.counts.get(cand, 0))

        base = key(word)
        best_word, best_key = word, base
        for cand in sorted(cands):
            if cand == word:
                continue
            k = key(cand)
            if in_dict and margin is not None and k[0] < base[0] + math.log(margin):
                continue
            if k > best_key or (k == best_key and best_word != word and cand < best_word):
                best_word, best_key = cand, k
        out[i] = best_word
    return out
