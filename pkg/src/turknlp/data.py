"""Dataset readers (CoNLL-U, IO-scheme entities, sentiment TSV), a
deterministic stratified split, and the evaluation metrics."""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, DataError, InputError, ParseError
from .tasks import NER_TAGS, DepArc

Source = Union[str, Path, Iterable[str]]


def _lines(source: Source) -> List[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return fh.read().splitlines()
    return [line.rstrip("\n") for line in source]


@dataclass(frozen=True)
class ConlluSentence:
    forms: Tuple[str, ...]
    upos: Tuple[str, ...]
    heads: Tuple[int, ...]
    deprels: Tuple[str, ...]

    def __post_init__(self):
        n = len(self.forms)
        if not (n == len(self.upos) == len(self.heads) == len(self.deprels)):
            raise DataError("sentence columns must align")
        for head in self.heads:
            if not 0 <= head <= n:
                raise DataError(f"head {head} out of range for {n} words")


def read_conllu(source: Source) -> List[ConlluSentence]:
    """Keeps FORM, UPOS, HEAD and the base DEPREL; multiword ranges and
    empty nodes are skipped."""
    sentences: List[ConlluSentence] = []
    forms, upos, heads, deprels = [], [], [], []

    def flush():
        if forms:
            sentences.append(ConlluSentence(tuple(forms), tuple(upos),
                                            tuple(heads), tuple(deprels)))
            forms.clear(), upos.clear(), heads.clear(), deprels.clear()

    for lineno, line in enumerate(_lines(source), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 columns, got {len(cols)}",
                             line=lineno)
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            head = int(cols[6])
        except ValueError:
            raise ParseError(f"non-integer head {cols[6]!r}",
                             line=lineno) from None
        forms.append(cols[1])
        upos.append(cols[3])
        heads.append(head)
        deprels.append(cols[7].split(":", 1)[0])
    flush()
    return sentences


def read_ner_io(source: Source) -> List[Tuple[List[str], List[str]]]:
    """"token<TAB>tag" lines, blank-line separated sentences, IO tags only."""
    sentences: List[Tuple[List[str], List[str]]] = []
    words: List[str] = []
    tags: List[str] = []
    for lineno, line in enumerate(_lines(source), start=1):
        if not line.strip():
            if words:
                sentences.append((words, tags))
                words, tags = [], []
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise ParseError("expected token<TAB>tag", line=lineno)
        if parts[1] not in NER_TAGS:
            raise DataError(f"line {lineno}: unknown entity tag {parts[1]!r}")
        words.append(parts[0])
        tags.append(parts[1])
    if words:
        sentences.append((words, tags))
    return sentences


def read_sentiment_tsv(source: Source) -> List[Tuple[str, int]]:
    """"label<TAB>text" lines with label 0 or 1."""
    out: List[Tuple[str, int]] = []
    for lineno, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2 or parts[0] not in ("0", "1") or not parts[1].strip():
            raise DataError(f"line {lineno}: expected 0|1<TAB>text")
        out.append((parts[1], int(parts[0])))
    return out


_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> Tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _shuffled(indices: List[int], state: int) -> Tuple[List[int], int]:
    # Fisher-Yates driven by the splitmix64 stream
    out = list(indices)
    for i in range(len(out) - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out, state


def stratified_split(items: Sequence, labels: Sequence, test_fraction: float,
                     seed: int) -> Tuple[List[int], List[int]]:
    """Per-class seeded shuffle, round(class size x fraction) items to test.

    The shuffle is a Fisher-Yates pass over a splitmix64 stream, consumed
    class by class in sorted label order, so one (inputs, seed) pair always
    produces the same split. Both index lists come back sorted.
    """
    if len(items) != len(labels):
        raise InputError("items and labels must align")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must lie in (0, 1)")
    by_class = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    state = seed & _MASK64
    test: List[int] = []
    for label in sorted(by_class):
        members = by_class[label]
        if len(members) < 2:
            raise DataError(f"class {label!r} has a single member; "
                            f"cannot stratify")
        shuffled, state = _shuffled(members, state)
        take = int(len(members) * test_fraction + 0.5)  # round half up
        test.extend(shuffled[:take])
    test_set = set(test)
    train = [i for i in range(len(items)) if i not in test_set]
    return train, sorted(test)


def accuracy(gold: Sequence, pred: Sequence) -> float:
    if len(gold) != len(pred):
        raise InputError("gold and pred must align")
    if not gold:
        raise InputError("nothing to score")
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


def f1_macro(gold: Sequence, pred: Sequence) -> float:
    """Unweighted mean F1 over the classes seen in gold or pred; a class
    with a zero denominator contributes 0."""
    if len(gold) != len(pred):
        raise InputError("gold and pred must align")
    if not gold:
        raise InputError("nothing to score")
    classes = set(gold) | set(pred)
    total = 0.0
    for c in classes:
        tp = sum(g == c and p == c for g, p in zip(gold, pred))
        fp = sum(g != c and p == c for g, p in zip(gold, pred))
        fn = sum(g == c and p != c for g, p in zip(gold, pred))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        total += 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return total / len(classes)


def las_uas(gold: Sequence[Sequence[DepArc]],
            pred: Sequence[Sequence[DepArc]]) -> Tuple[float, float]:
    """(labelled, unlabelled) attachment scores over all words."""
    if len(gold) != len(pred) or any(len(g) != len(p)
                                     for g, p in zip(gold, pred)):
        raise InputError("gold and pred sentences must align")
    total = sum(len(g) for g in gold)
    if total == 0:
        raise InputError("nothing to score")
    heads_right = 0
    both_right = 0
    for gsent, psent in zip(gold, pred):
        for g, p in zip(gsent, psent):
            if g.head == p.head:
                heads_right += 1
                if g.label == p.label:
                    both_right += 1
    return both_right / total, heads_right / total


def word_error_rate(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Word-level edit distance (unit costs) over the reference length."""
    if not reference:
        raise InputError("reference must be non-empty")
    n, m = len(reference), len(hypothesis)
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            sub = prev[j - 1] + (reference[i - 1] != hypothesis[j - 1])
            cur[j] = min(sub, prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[m] / n
