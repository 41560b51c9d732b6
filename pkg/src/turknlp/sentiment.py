"""Binary sentiment over a flat subword sequence: a stack of bidirectional
GRUs, average pooling over time, one dense layer, sigmoid head."""

from dataclasses import dataclass, fields
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import tokenizer
from .context import DenseParams
from .errors import ConfigError, DataError, InputError
from .nn import autograd as ag
from .nn.autograd import Tensor, no_grad
from .nn import core as nc
from .nn.core import AdamState, GruParams, TrainConfig
from .nn import serialize
from .tokenizer import UnigramVocab

KIND_SENTIMENT = "sentiment"


@dataclass(frozen=True)
class SentimentConfig:
    vocab_size: int
    subword_embed_dim: int = 32
    rnn_hidden: int = 32
    num_bigru_layers: int = 2
    fc_units: int = 32
    max_tokens: int = 256

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ConfigError(f"{f.name} must be positive")


@dataclass
class BiGruLayer:
    fwd: GruParams
    bwd: GruParams

    def named_tensors(self, prefix: str) -> List[Tuple[str, Tensor]]:
        return (self.fwd.named_tensors(prefix + "fwd.")
                + self.bwd.named_tensors(prefix + "bwd."))


@dataclass
class SentimentParams:
    embedding: Tensor
    layers: List[BiGruLayer]
    fc: DenseParams
    head: DenseParams

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        out = [("embedding", self.embedding)]
        for i, layer in enumerate(self.layers):
            out += layer.named_tensors(f"layer{i}.")
        out += self.fc.named_tensors("fc.")
        out += self.head.named_tensors("head.")
        return out

    def tensors(self) -> List[Tensor]:
        return [t for _, t in self.named_tensors()]


@dataclass
class SentimentModel:
    params: SentimentParams
    config: SentimentConfig


def init_sentiment_model(config: SentimentConfig, seed: int = 0) -> SentimentModel:
    rng = np.random.default_rng(seed)
    emb = Tensor(rng.uniform(-0.05, 0.05,
                             size=(config.vocab_size, config.subword_embed_dim)),
                 requires_grad=True)
    layers = []
    for i in range(config.num_bigru_layers):
        inputs = config.subword_embed_dim if i == 0 else 2 * config.rnn_hidden
        layers.append(BiGruLayer(fwd=nc.init_gru(rng, config.rnn_hidden, inputs),
                                 bwd=nc.init_gru(rng, config.rnn_hidden, inputs)))
    params = SentimentParams(
        embedding=emb,
        layers=layers,
        fc=DenseParams(W=nc.glorot(rng, config.fc_units, 2 * config.rnn_hidden),
                       b=nc.zeros(config.fc_units)),
        head=DenseParams(W=nc.glorot(rng, 1, config.fc_units), b=nc.zeros(1)))
    return SentimentModel(params=params, config=config)


def text_to_ids(text: str, vocab: UnigramVocab, max_tokens: int) -> List[int]:
    """Flat subword ids, truncated; no word grouping since there is no
    per-word output here."""
    ids = [i for word in tokenizer.encode_text(text, vocab) for i in word]
    if not ids:
        raise InputError("text has no tokens")
    return ids[:max_tokens]


def probability_from_ids(model: SentimentModel, ids: Sequence[int]) -> Tensor:
    """Differentiable forward pass; returns a 1-element probability vector."""
    if not ids:
        raise InputError("need at least one subword id")
    params, config = model.params, model.config
    xs = [ag.take_row(params.embedding, i) for i in ids]
    for layer in params.layers:
        xs = nc.bigru_forward(layer.fwd, layer.bwd, xs)
    pooled = ag.mean_vectors(xs)
    hidden = nc.dense(params.fc.W, params.fc.b, pooled, "tanh")
    return nc.dense(params.head.W, params.head.b, hidden, "sigmoid")


def sentiment_forward(model: SentimentModel, text: str,
                      vocab: UnigramVocab) -> float:
    ids = text_to_ids(text, vocab, model.config.max_tokens)
    with no_grad():
        return float(probability_from_ids(model, ids).data[0])


def classify(model: SentimentModel, text: str, vocab: UnigramVocab,
             threshold: float = 0.5) -> Tuple[str, float]:
    """("positive"|"negative", probability); positive iff p >= threshold."""
    p = sentiment_forward(model, text, vocab)
    return ("positive" if p >= threshold else "negative", p)


def train_sentiment(model: SentimentModel, corpus: Sequence[Tuple[str, int]],
                    vocab: UnigramVocab, train_config: TrainConfig,
                    adam_state: AdamState) -> List[float]:
    """Per-example BCE on the scalar output; returns mean loss per epoch."""
    if not corpus:
        raise InputError("training corpus is empty")
    for _, label in corpus:
        if label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {label!r}")
    encoded = [(text_to_ids(text, vocab, model.config.max_tokens), label)
               for text, label in corpus]
    tensors = model.params.tensors()
    losses = []
    for epoch in range(train_config.epochs):
        lr = nc.epoch_lr(train_config.learning_rate, epoch,
                         train_config.epoch_decay)
        total = 0.0
        for ids, label in encoded:
            nc.zero_grads(tensors)
            prob = probability_from_ids(model, ids)
            loss, _ = nc.binary_cross_entropy(prob, np.array([float(label)]))
            ag.backward(loss)
            nc.adam_update(adam_state, tensors, [t.grad for t in tensors],
                           lr, train_config)
            total += float(loss.data)
        losses.append(total / len(encoded))
    return losses


def config_to_dict(config: SentimentConfig) -> Dict[str, str]:
    return {f.name: str(getattr(config, f.name)) for f in fields(config)}


def config_from_dict(raw: Dict[str, str]) -> SentimentConfig:
    names = [f.name for f in fields(SentimentConfig)]
    missing = [n for n in names if n not in raw]
    if missing:
        raise DataError(f"model config lacks fields: {missing}")
    return SentimentConfig(**{n: int(raw[n]) for n in names})


def save_sentiment_model(directory, model: SentimentModel) -> None:
    tensors = [(name, t.data) for name, t in model.params.named_tensors()]
    serialize.save_model(directory, KIND_SENTIMENT,
                         config_to_dict(model.config), tensors)


def load_sentiment_model(directory) -> SentimentModel:
    kind, raw, _, tensors = serialize.load_model(directory)
    if kind != KIND_SENTIMENT:
        raise DataError(f"model kind {kind!r}, expected {KIND_SENTIMENT!r}")
    model = init_sentiment_model(config_from_dict(raw), seed=0)
    for name, t in model.params.named_tensors():
        if name not in tensors:
            raise DataError(f"model file lacks tensor {name!r}")
        if tensors[name].shape != t.data.shape:
            raise DataError(f"tensor {name!r} has shape {tensors[name].shape}, "
                            f"expected {t.data.shape}")
        t.data[...] = tensors[name]
    return model
