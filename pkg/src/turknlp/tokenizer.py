"""Trainable unigram-LM subword tokenizer.

Training seeds the vocabulary with frequent substrings plus every observed
character, then alternates EM over the segmentation lattice with pruning of
low-value pieces until the target size is reached. Encoding is Viterbi
search for the highest-scoring segmentation.
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Tuple, Union

from .errors import ConfigError, InputError, ParseError

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<bos>", "<eos>"
SPECIAL_PIECES = (PAD, UNK, BOS, EOS)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3

MAX_PIECE_LEN = 8
# fallback log score for a character outside the vocabulary, relative to the
# worst real piece so UNK never beats a genuine segmentation
UNK_PENALTY = 20.0

DEFAULT_TARGET_SIZE = 2000
DEFAULT_SEED_SIZE = 20000
DEFAULT_SHRINK = 0.75
EM_SUBITERS = 2


@dataclass(frozen=True)
class UnigramVocab:
    """Immutable piece inventory: log-probabilities plus dense ids."""

    pieces: Dict[str, float]
    piece_ids: Dict[str, int]
    id_pieces: Tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.id_pieces)

    def piece_of(self, piece_id: int) -> str:
        if not 0 <= piece_id < len(self.id_pieces):
            raise InputError(f"piece id {piece_id} outside 0..{len(self.id_pieces) - 1}")
        return self.id_pieces[piece_id]

    def min_logprob(self) -> float:
        return min(self.pieces.values())


def make_vocab(logprobs: Mapping[str, float]) -> UnigramVocab:
    """Assign ids after the specials, highest-probability piece first."""
    if not logprobs:
        raise InputError("empty piece inventory")
    for piece, lp in logprobs.items():
        if not piece or piece in SPECIAL_PIECES:
            raise InputError(f"invalid piece {piece!r}")
        if len(piece) > MAX_PIECE_LEN:
            # encoding lattices never consider longer spans, the piece would be dead
            raise InputError(f"piece {piece!r} longer than {MAX_PIECE_LEN} characters")
        if lp > 1e-9:
            raise InputError(f"piece {piece!r} has positive log-probability {lp}")
    ordered = sorted(logprobs, key=lambda p: (-logprobs[p], p))
    id_pieces = SPECIAL_PIECES + tuple(ordered)
    piece_ids = {p: i + len(SPECIAL_PIECES) for i, p in enumerate(ordered)}
    return UnigramVocab(pieces=dict(logprobs), piece_ids=piece_ids, id_pieces=id_pieces)


def _normalize(counts: Mapping[str, float]) -> Dict[str, float]:
    # floor keeps a piece whose posterior underflowed representable; pruning
    # disposes of it on the next round
    total = sum(counts.values())
    return {p: math.log(max(c, 1e-300) / total) for p, c in counts.items()}


def _as_word_freqs(corpus: Union[Mapping[str, int], Iterable[str]]) -> Dict[str, int]:
    if isinstance(corpus, Mapping):
        freqs = {w: int(f) for w, f in corpus.items() if f > 0 and w}
    else:
        freqs = dict(Counter(w for w in corpus if w))
    if not freqs:
        raise InputError("tokenizer training corpus is empty")
    return freqs


def _logsumexp2(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a > b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _word_lattice_llik(word: str, pieces: Mapping[str, float]) -> Tuple[List[float], float]:
    """Forward log-sums; returns (alpha, total log-likelihood of the word)."""
    n = len(word)
    alpha = [-math.inf] * (n + 1)
    alpha[0] = 0.0
    for j in range(1, n + 1):
        for i in range(max(0, j - MAX_PIECE_LEN), j):
            lp = pieces.get(word[i:j])
            if lp is not None:
                alpha[j] = _logsumexp2(alpha[j], alpha[i] + lp)
    return alpha, alpha[n]


def em_step(pieces: Mapping[str, float],
            word_freqs: Mapping[str, int]) -> Tuple[Dict[str, float], float]:
    """One EM iteration at fixed vocabulary.

    Returns (updated log-probabilities, corpus log-likelihood under the INPUT
    probabilities). The likelihood is non-decreasing across repeated calls.
    """
    expected = dict.fromkeys(pieces, 0.0)
    corpus_ll = 0.0
    for word, freq in word_freqs.items():
        n = len(word)
        alpha, total = _word_lattice_llik(word, pieces)
        if total == -math.inf:
            raise InputError(f"word {word!r} cannot be segmented with current pieces")
        corpus_ll += freq * total
        beta = [-math.inf] * (n + 1)
        beta[n] = 0.0
        for i in range(n - 1, -1, -1):
            for j in range(i + 1, min(n, i + MAX_PIECE_LEN) + 1):
                lp = pieces.get(word[i:j])
                if lp is not None:
                    beta[i] = _logsumexp2(beta[i], lp + beta[j])
        for i in range(n):
            if alpha[i] == -math.inf:
                continue
            for j in range(i + 1, min(n, i + MAX_PIECE_LEN) + 1):
                piece = word[i:j]
                lp = pieces.get(piece)
                if lp is not None and beta[j] != -math.inf:
                    post = math.exp(alpha[i] + lp + beta[j] - total)
                    expected[piece] += freq * post
    # every piece sits on some path so counts stay strictly positive
    return _normalize(expected), corpus_ll


def _viterbi_pieces(word: str, pieces: Mapping[str, float],
                    skip: str = None) -> Tuple[float, Tuple[str, ...]]:
    """Best segmentation score and pieces; optionally pretend one piece is gone.

    Ties prefer fewer pieces, then the lexicographically earliest sequence.
    Returns (-inf, ()) when no full path exists.
    """
    n = len(word)
    NEG = -math.inf
    best: List[Tuple[float, int, Tuple[str, ...]]] = [(NEG, 0, ())] * (n + 1)
    best[0] = (0.0, 0, ())
    for j in range(1, n + 1):
        top = (NEG, 0, ())
        for i in range(max(0, j - MAX_PIECE_LEN), j):
            if best[i][0] == NEG:
                continue
            piece = word[i:j]
            if piece == skip:
                continue
            lp = pieces.get(piece)
            if lp is None:
                continue
            score = best[i][0] + lp
            count = best[i][1] + 1
            seq = best[i][2] + (piece,)
            if (score > top[0]
                    or (score == top[0] and (count < top[1]
                        or (count == top[1] and seq < top[2])))):
                top = (score, count, seq)
        best[j] = top
    return best[n][0], best[n][2]


def encode_viterbi(word: str, vocab: UnigramVocab) -> List[int]:
    """Highest-scoring segmentation as piece ids; unknown characters give UNK."""
    if not word:
        return []
    pieces = vocab.pieces
    unk_lp = vocab.min_logprob() - UNK_PENALTY
    n = len(word)
    NEG = -math.inf
    best: List[Tuple[float, int, Tuple[Tuple[str, int], ...]]] = [(NEG, 0, ())] * (n + 1)
    best[0] = (0.0, 0, ())
    for j in range(1, n + 1):
        top = (NEG, 0, ())
        for i in range(max(0, j - MAX_PIECE_LEN), j):
            if best[i][0] == NEG:
                continue
            piece = word[i:j]
            lp = pieces.get(piece)
            if lp is None:
                if j - i == 1 and piece not in pieces:
                    lp, pid = unk_lp, UNK_ID
                else:
                    continue
            else:
                pid = vocab.piece_ids[piece]
            score = best[i][0] + lp
            count = best[i][1] + 1
            seq = best[i][2] + ((piece, pid),)
            key = tuple(p for p, _ in seq)
            topkey = tuple(p for p, _ in top[2])
            if (score > top[0]
                    or (score == top[0] and (count < top[1]
                        or (count == top[1] and key < topkey)))):
                top = (score, count, seq)
        best[j] = top
    return [pid for _, pid in best[n][2]]


def decode_pieces(ids: Iterable[int], vocab: UnigramVocab) -> str:
    return "".join(vocab.piece_of(i) for i in ids)


def encode_text(text: str, vocab: UnigramVocab) -> List[List[int]]:
    return [encode_viterbi(word, vocab) for word in text.split()]


def _seed_pieces(word_freqs: Mapping[str, int], seed_size: int) -> Dict[str, float]:
    substr_counts: Counter = Counter()
    char_counts: Counter = Counter()
    for word, freq in word_freqs.items():
        n = len(word)
        for i in range(n):
            char_counts[word[i]] += freq
            for j in range(i + 2, min(n, i + MAX_PIECE_LEN) + 1):
                substr_counts[word[i:j]] += freq
    top = sorted(substr_counts, key=lambda s: (-substr_counts[s], s))[:seed_size]
    seed = {s: float(substr_counts[s]) for s in top}
    for ch, c in char_counts.items():
        seed[ch] = float(c)
    return _normalize(seed)


def _prune(pieces: Dict[str, float], word_freqs: Mapping[str, int],
           keep_at_least: int, shrink_factor: float,
           alphabet: set) -> Dict[str, float]:
    """Drop the pieces whose removal costs the least Viterbi likelihood."""
    target = max(keep_at_least, int(len(pieces) * shrink_factor), len(alphabet))
    if len(pieces) <= target:
        return pieces
    usage: Dict[str, float] = dict.fromkeys(pieces, 0.0)
    for word, freq in word_freqs.items():
        score, seq = _viterbi_pieces(word, pieces)
        used = set(seq)
        for piece in used:
            if len(piece) == 1:
                continue
            alt_score, _ = _viterbi_pieces(word, pieces, skip=piece)
            usage[piece] += freq * (score - alt_score)
    removable = sorted((p for p in pieces if p not in alphabet),
                       key=lambda p: (usage[p], p))
    n_drop = len(pieces) - target
    dropped = set(removable[:n_drop])
    kept = {p: lp for p, lp in pieces.items() if p not in dropped}
    return kept


def train_unigram(corpus: Union[Mapping[str, int], Iterable[str]],
                  target_size: int = DEFAULT_TARGET_SIZE,
                  seed_size: int = DEFAULT_SEED_SIZE,
                  shrink_factor: float = DEFAULT_SHRINK) -> UnigramVocab:
    """Fit piece log-probabilities by EM with iterative vocabulary pruning."""
    word_freqs = _as_word_freqs(corpus)
    alphabet = {ch for w in word_freqs for ch in w}
    if target_size < len(alphabet):
        raise ConfigError(
            f"target_size {target_size} is below the alphabet size {len(alphabet)}")
    if not 0.0 < shrink_factor < 1.0:
        raise ConfigError("shrink_factor must lie in (0, 1)")
    if seed_size < target_size:
        raise ConfigError("seed_size must be at least target_size")

    pieces = _seed_pieces(word_freqs, seed_size)
    while True:
        for _ in range(EM_SUBITERS):
            pieces, _ll = em_step(pieces, word_freqs)
        if len(pieces) <= target_size:
            break
        pieces = _prune(pieces, word_freqs, target_size, shrink_factor, alphabet)
    counts = {p: math.exp(lp) for p, lp in pieces.items()}
    return make_vocab(_normalize(counts))


def save_vocab(vocab: UnigramVocab, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"UNIGRAM v1 {vocab.size}\n")
        for piece in SPECIAL_PIECES:
            f.write(f"{piece}\t0\n")
        for piece in vocab.id_pieces[len(SPECIAL_PIECES):]:
            f.write(f"{piece}\t{vocab.pieces[piece]!r}\n")


def load_vocab(source) -> UnigramVocab:
    try:
        with open(source, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read vocabulary: {exc}") from exc
    if not lines:
        raise ParseError("empty vocabulary file", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "UNIGRAM" or head[1] != "v1":
        raise ParseError(f"bad header {lines[0]!r}", 1)
    try:
        count = int(head[2])
    except ValueError as exc:
        raise ParseError(f"bad piece count {head[2]!r}", 1) from exc
    body = lines[1:]
    if len(body) != count:
        raise ParseError(f"expected {count} piece lines, found {len(body)}", 1)
    if count < len(SPECIAL_PIECES):
        raise ParseError("vocabulary lacks the special pieces", 1)
    logprobs: Dict[str, float] = {}
    order: List[str] = []
    for lineno, line in enumerate(body, 2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected piece<TAB>logprob: {line!r}", lineno)
        piece, lp_text = parts
        idx = lineno - 2
        if idx < len(SPECIAL_PIECES):
            if piece != SPECIAL_PIECES[idx]:
                raise ParseError(f"special piece {SPECIAL_PIECES[idx]} missing", lineno)
            continue
        try:
            lp = float(lp_text)
        except ValueError as exc:
            raise ParseError(f"bad log-probability {lp_text!r}", lineno) from exc
        if piece in logprobs or piece in SPECIAL_PIECES:
            raise ParseError(f"duplicate piece {piece!r}", lineno)
        if lp > 0:
            raise ParseError(f"positive log-probability for {piece!r}", lineno)
        logprobs[piece] = lp
        order.append(piece)
    if not logprobs:
        raise ParseError("vocabulary holds no pieces beyond the specials", 1)
    id_pieces = SPECIAL_PIECES + tuple(order)
    piece_ids = {p: i + len(SPECIAL_PIECES) for i, p in enumerate(order)}
    return UnigramVocab(pieces=logprobs, piece_ids=piece_ids, id_pieces=id_pieces)
