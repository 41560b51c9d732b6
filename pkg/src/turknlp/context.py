"""Auto-regressive per-word tagger over four fused representations.

Each word is classified from (a) its own subword sequence run through a word
GRU, (b) the left context words, (c) the right context words, both context
paths reusing the same word GRU before their own fold RNNs, and (d) the tags
already assigned to the left. Decoding is greedy left to right, so tag i
never sees anything right of the words themselves.
"""

from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataError, InputError
from .nn import autograd as ag
from .nn.autograd import Tensor, no_grad
from .nn import core as nc
from .nn.core import GruParams, TrainConfig, AdamState
from .nn import serialize


@dataclass(frozen=True)
class ContextModelConfig:
    vocab_size: int
    num_tags: int
    subword_embed_dim: int = 8
    word_rnn_hidden: int = 16
    left_ctx_hidden: int = 16
    right_ctx_hidden: int = 16
    tag_embed_dim: int = 8
    tag_rnn_hidden: int = 8
    fc1_units: int = 32
    fc2_units: int = 16
    max_left_words: int = 40
    max_right_words: int = 40

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ConfigError(f"{f.name} must be positive")

    @property
    def concat_dim(self) -> int:
        return (self.word_rnn_hidden + self.left_ctx_hidden
                + self.right_ctx_hidden + self.tag_rnn_hidden)


@dataclass
class DenseParams:
    W: Tensor
    b: Tensor

    def named_tensors(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        return [(prefix + "W", self.W), (prefix + "b", self.b)]


@dataclass
class ContextModelParams:
    """The shared word RNN appears once; all three word paths reference it."""

    subword_embedding: Tensor
    word_rnn: GruParams
    left_ctx_rnn: GruParams
    right_ctx_rnn: GruParams
    tag_embedding: Tensor
    tag_rnn: GruParams
    fc1: DenseParams
    fc2: DenseParams
    head: DenseParams

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        out = [("subword_embedding", self.subword_embedding)]
        out += self.word_rnn.named_tensors("word_rnn.")
        out += self.left_ctx_rnn.named_tensors("left_ctx_rnn.")
        out += self.right_ctx_rnn.named_tensors("right_ctx_rnn.")
        out.append(("tag_embedding", self.tag_embedding))
        out += self.tag_rnn.named_tensors("tag_rnn.")
        out += self.fc1.named_tensors("fc1.")
        out += self.fc2.named_tensors("fc2.")
        out += self.head.named_tensors("head.")
        return out

    def tensors(self) -> List[Tensor]:
        return [t for _, t in self.named_tensors()]


@dataclass(frozen=True)
class TaggedSentence:
    words: List[str]
    subword_ids: List[List[int]]
    tags: List[int]

    def __post_init__(self):
        if not (len(self.words) == len(self.subword_ids) == len(self.tags)):
            raise DataError("words, subword_ids and tags must align")


def init_context_model(config: ContextModelConfig, seed: int = 0) -> ContextModelParams:
    rng = np.random.default_rng(seed)
    emb = Tensor(rng.uniform(-0.05, 0.05,
                             size=(config.vocab_size, config.subword_embed_dim)),
                 requires_grad=True)
    tag_emb = Tensor(rng.uniform(-0.05, 0.05,
                                 size=(config.num_tags, config.tag_embed_dim)),
                     requires_grad=True)
    return ContextModelParams(
        subword_embedding=emb,
        word_rnn=nc.init_gru(rng, config.word_rnn_hidden, config.subword_embed_dim),
        left_ctx_rnn=nc.init_gru(rng, config.left_ctx_hidden, config.word_rnn_hidden),
        right_ctx_rnn=nc.init_gru(rng, config.right_ctx_hidden, config.word_rnn_hidden),
        tag_embedding=tag_emb,
        tag_rnn=nc.init_gru(rng, config.tag_rnn_hidden, config.tag_embed_dim),
        fc1=DenseParams(W=nc.glorot(rng, config.fc1_units, config.concat_dim),
                        b=nc.zeros(config.fc1_units)),
        fc2=DenseParams(W=nc.glorot(rng, config.fc2_units, config.fc1_units),
                        b=nc.zeros(config.fc2_units)),
        head=DenseParams(W=nc.glorot(rng, config.num_tags, config.fc2_units),
                         b=nc.zeros(config.num_tags)))


def word_vector(params: ContextModelParams, subword_ids: Sequence[int]) -> Tensor:
    """Final word-RNN state over the word's embedded pieces."""
    if not subword_ids:
        raise InputError("a word needs at least one subword id")
    h = Tensor(np.zeros(params.word_rnn.hidden_size))
    for pid in subword_ids:
        x = ag.take_row(params.subword_embedding, pid)
        h = nc.gru_step(params.word_rnn, h, x)
    return h


def _fold_words(rnn: GruParams, vectors: Sequence[Tensor], reverse: bool) -> Tensor:
    h = Tensor(np.zeros(rnn.hidden_size))
    _, last = nc.gru_forward(rnn, h, vectors, reverse=reverse)
    return last


def _fold_tag_vectors(params: ContextModelParams, vectors: Sequence[Tensor]) -> Tensor:
    h = Tensor(np.zeros(params.tag_rnn.hidden_size))
    for x in vectors:
        h = nc.gru_step(params.tag_rnn, h, x)
    return h


def _fold_tags(params: ContextModelParams, tag_ids: Sequence[int]) -> Tensor:
    rows = [ag.take_row(params.tag_embedding, tid) for tid in tag_ids]
    return _fold_tag_vectors(params, rows)


def _fuse(params: ContextModelParams, cur: Tensor, left: Tensor,
          right: Tensor, tags: Tensor) -> Tensor:
    fused = ag.concat([cur, left, right, tags])
    h1 = nc.dense(params.fc1.W, params.fc1.b, fused, "tanh")
    return nc.dense(params.fc2.W, params.fc2.b, h1, "tanh")


def _logits_from_parts(params: ContextModelParams, cur: Tensor, left: Tensor,
                       right: Tensor, tags: Tensor) -> Tensor:
    h2 = _fuse(params, cur, left, right, tags)
    return nc.dense(params.head.W, params.head.b, h2, "none")


def _word_parts(params: ContextModelParams, config: ContextModelConfig,
                sentence: Sequence[Sequence[int]],
                position: int) -> Tuple[Tensor, Tensor, Tensor]:
    n = len(sentence)
    if not 0 <= position < n:
        raise InputError(f"position {position} out of range for {n} words")
    cur = word_vector(params, sentence[position])
    lo = max(0, position - config.max_left_words)
    left_vecs = [word_vector(params, sentence[i]) for i in range(lo, position)]
    left = _fold_words(params.left_ctx_rnn, left_vecs, reverse=False)
    hi = min(n, position + 1 + config.max_right_words)
    right_vecs = [word_vector(params, sentence[i]) for i in range(position + 1, hi)]
    right = _fold_words(params.right_ctx_rnn, right_vecs, reverse=True)
    return cur, left, right


def context_vector(params: ContextModelParams, config: ContextModelConfig,
                   sentence: Sequence[Sequence[int]], position: int,
                   left_tags: Sequence[int]) -> Tensor:
    """Fused representation of one position (through both dense layers)."""
    cur, left, right = _word_parts(params, config, sentence, position)
    tagctx = _fold_tags(params, list(left_tags)[-config.max_left_words:])
    return _fuse(params, cur, left, right, tagctx)


def context_vector_from_history(params: ContextModelParams,
                                config: ContextModelConfig,
                                sentence: Sequence[Sequence[int]], position: int,
                                history_vectors: Sequence[Tensor]) -> Tensor:
    """Same trunk, but the tag history arrives pre-embedded (one vector per
    already-decoded word) instead of as tag ids."""
    cur, left, right = _word_parts(params, config, sentence, position)
    tagctx = _fold_tag_vectors(
        params, list(history_vectors)[-config.max_left_words:])
    return _fuse(params, cur, left, right, tagctx)


def forward_word(params: ContextModelParams, config: ContextModelConfig,
                 sentence: Sequence[Sequence[int]], position: int,
                 left_tags: Sequence[int]) -> Tensor:
    """Logits for one position given the tags chosen so far."""
    h2 = context_vector(params, config, sentence, position, left_tags)
    return nc.dense(params.head.W, params.head.b, h2, "none")


def tag_sentence(params: ContextModelParams, config: ContextModelConfig,
                 sentence: Sequence[Sequence[int]]) -> List[int]:
    """Greedy left-to-right decode; always emits one tag per word."""
    n = len(sentence)
    if n == 0:
        raise InputError("cannot tag an empty sentence")
    with no_grad():
        vecs = [word_vector(params, ids) for ids in sentence]
        incremental = (n - 1 <= config.max_left_words
                       and n - 1 <= config.max_right_words)
        if incremental:
            lefts: List[Tensor] = [Tensor(np.zeros(config.left_ctx_hidden))]
            for i in range(1, n):
                lefts.append(nc.gru_step(params.left_ctx_rnn, lefts[i - 1], vecs[i - 1]))
            rights: List[Optional[Tensor]] = [None] * n
            rights[n - 1] = Tensor(np.zeros(config.right_ctx_hidden))
            for i in range(n - 2, -1, -1):
                rights[i] = nc.gru_step(params.right_ctx_rnn, rights[i + 1], vecs[i + 1])
        tags: List[int] = []
        tag_state = Tensor(np.zeros(config.tag_rnn_hidden))
        for i in range(n):
            if incremental:
                left, right, tagctx = lefts[i], rights[i], tag_state
            else:
                lo = max(0, i - config.max_left_words)
                left = _fold_words(params.left_ctx_rnn, vecs[lo:i], reverse=False)
                hi = min(n, i + 1 + config.max_right_words)
                right = _fold_words(params.right_ctx_rnn, vecs[i + 1:hi], reverse=True)
                tagctx = _fold_tags(params, tags[-config.max_left_words:])
            logits = _logits_from_parts(params, vecs[i], left, right, tagctx)
            tag = int(np.argmax(logits.data))
            tags.append(tag)
            if incremental:
                x = ag.take_row(params.tag_embedding, tag)
                tag_state = nc.gru_step(params.tag_rnn, tag_state, x)
    return tags


def train_epoch(params: ContextModelParams, config: ContextModelConfig,
                corpus: Sequence[TaggedSentence], train_config: TrainConfig,
                adam_state: AdamState, epoch: int) -> float:
    """One teacher-forced pass; Adam step after every position."""
    if not corpus:
        raise InputError("training corpus is empty")
    for sent in corpus:
        for tag in sent.tags:
            if not 0 <= tag < config.num_tags:
                raise DataError(f"tag id {tag} outside 0..{config.num_tags - 1}")
    tensors = params.tensors()
    lr = nc.epoch_lr(train_config.learning_rate, epoch, train_config.epoch_decay)
    total_loss = 0.0
    positions = 0
    for sent in corpus:
        for i in range(len(sent.words)):
            nc.zero_grads(tensors)
            logits = forward_word(params, config, sent.subword_ids, i, sent.tags[:i])
            loss, _ = nc.softmax_cross_entropy(logits, sent.tags[i])
            ag.backward(loss)
            grads = [t.grad for t in tensors]
            nc.adam_update(adam_state, tensors, grads, lr, train_config)
            total_loss += float(loss.data)
            positions += 1
    return total_loss / positions


def count_params(params: ContextModelParams) -> int:
    return sum(t.data.size for t in params.tensors())


_CONFIG_FIELDS = [f.name for f in fields(ContextModelConfig)]


def config_to_dict(config: ContextModelConfig) -> Dict[str, str]:
    return {name: str(getattr(config, name)) for name in _CONFIG_FIELDS}


def config_from_dict(raw: Dict[str, str]) -> ContextModelConfig:
    missing = [n for n in _CONFIG_FIELDS if n not in raw]
    if missing:
        raise DataError(f"model config lacks fields: {missing}")
    return ContextModelConfig(**{n: int(raw[n]) for n in _CONFIG_FIELDS})


def save_context_model(directory, params: ContextModelParams,
                       config: ContextModelConfig, kind: str = "context_model",
                       labels: Sequence[str] = (),
                       extra_tensors: Sequence[Tuple[str, np.ndarray]] = (),
                       extra_config: Dict[str, str] = None) -> None:
    cfg = config_to_dict(config)
    if extra_config:
        cfg.update(extra_config)
    tensors = [(name, t.data) for name, t in params.named_tensors()]
    tensors += [(name, arr) for name, arr in extra_tensors]
    serialize.save_model(directory, kind, cfg, tensors, labels=labels)


def params_from_tensors(config: ContextModelConfig,
                        tensors: Dict[str, np.ndarray]) -> ContextModelParams:
    params = init_context_model(config, seed=0)
    for name, t in params.named_tensors():
        if name not in tensors:
            raise DataError(f"model file lacks tensor {name!r}")
        if tensors[name].shape != t.data.shape:
            raise DataError(f"tensor {name!r} has shape {tensors[name].shape}, "
                            f"expected {t.data.shape}")
        t.data[...] = tensors[name]
    return params


def load_context_model(directory, expected_kind: str = "context_model"):
    """Returns (params, config, labels, config_dict, tensors)."""
    kind, cfg_raw, labels, tensors = serialize.load_model(directory)
    if kind != expected_kind:
        raise DataError(f"model kind {kind!r}, expected {expected_kind!r}")
    config = config_from_dict(cfg_raw)
    params = params_from_tensors(config, tensors)
    return params, config, labels, cfg_raw, tensors
