"""Task heads over the context tagger: named entities, part-of-speech tags,
morphological disambiguation with stemming, and dependency parsing.

NER and POS tagging are direct uses of the tagger. The disambiguator swaps
the classification head for a scorer: the fused context vector is projected
and dotted against a GRU encoding of each candidate analysis, softmax over
the word's candidates. The dependency parser widens the head to an
arc-position segment plus a relation-label segment and feeds (label, offset)
pairs back as its tag history.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from . import context, tokenizer
from .context import ContextModelConfig, ContextModelParams, DenseParams, TaggedSentence
from .errors import ConfigError, DataError, InputError, ParseError
from .nn import autograd as ag
from .nn.autograd import Tensor, no_grad
from .nn import core as nc
from .nn.core import AdamState, GruParams, TrainConfig
from .normalization import lower_case
from .tokenizer import UnigramVocab

NER_TAGS = ("O", "PER", "LOC", "ORG")

# the 17 universal POS categories, id order alphabetical
UPOS_TAGS = ("ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
             "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X")

UNK_TOKEN = "<unk>"

KIND_NER = "ner"
KIND_POS = "pos"
KIND_MORPH = "morph_disambiguator"
KIND_DEP = "dep_parser"


def tag_id(tag: str, tag_names: Sequence[str]) -> int:
    try:
        return tag_names.index(tag)
    except ValueError:
        raise DataError(f"unknown tag {tag!r}") from None


def encode_words(words: Sequence[str], vocab: UnigramVocab) -> List[List[int]]:
    if not words:
        raise InputError("need at least one word")
    return [tokenizer.encode_viterbi(w, vocab) for w in words]


# ---------------------------------------------------------------- NER / POS

@dataclass
class SequenceTagger:
    params: ContextModelParams
    config: ContextModelConfig
    tag_names: Tuple[str, ...]


def init_tagger(vocab_size: int, tag_names: Sequence[str], seed: int = 0,
                config: ContextModelConfig = None) -> SequenceTagger:
    names = tuple(tag_names)
    if len(set(names)) != len(names) or not names:
        raise ConfigError("tag names must be non-empty and distinct")
    if config is None:
        config = ContextModelConfig(vocab_size=vocab_size, num_tags=len(names))
    elif config.num_tags != len(names) or config.vocab_size != vocab_size:
        raise ConfigError("tagger config disagrees with vocab or tag set")
    return SequenceTagger(params=context.init_context_model(config, seed),
                          config=config, tag_names=names)


def make_tagged_sentence(words: Sequence[str], tags: Sequence[str],
                         vocab: UnigramVocab,
                         tag_names: Sequence[str]) -> TaggedSentence:
    if len(words) != len(tags):
        raise DataError("words and tags must align")
    return TaggedSentence(words=list(words),
                          subword_ids=encode_words(words, vocab),
                          tags=[tag_id(t, tag_names) for t in tags])


def tag_words(model: SequenceTagger, words: Sequence[str],
              vocab: UnigramVocab) -> List[Tuple[str, str]]:
    ids = encode_words(words, vocab)
    pred = context.tag_sentence(model.params, model.config, ids)
    return [(w, model.tag_names[t]) for w, t in zip(words, pred)]


def ner_tag(model: SequenceTagger, words: Sequence[str],
            vocab: UnigramVocab) -> List[Tuple[str, str]]:
    """IO-scheme entity tags (O, PER, LOC, ORG), one per word."""
    if model.tag_names != NER_TAGS:
        raise DataError("model was not trained with the entity tag set")
    return tag_words(model, words, vocab)


def pos_tag(model: SequenceTagger, words: Sequence[str],
            vocab: UnigramVocab) -> List[Tuple[str, str]]:
    """Universal POS tags, one per word."""
    if model.tag_names != UPOS_TAGS:
        raise DataError("model was not trained with the universal POS tag set")
    return tag_words(model, words, vocab)


def train_tagger_epoch(model: SequenceTagger, corpus: Sequence[TaggedSentence],
                       train_config: TrainConfig, adam_state: AdamState,
                       epoch: int) -> float:
    return context.train_epoch(model.params, model.config, corpus,
                               train_config, adam_state, epoch)


def save_tagger(directory, model: SequenceTagger, kind: str) -> None:
    context.save_context_model(directory, model.params, model.config,
                               kind=kind, labels=model.tag_names)


def load_tagger(directory, kind: str) -> SequenceTagger:
    params, config, labels, _, _ = context.load_context_model(
        directory, expected_kind=kind)
    if not labels:
        raise DataError("tagger model stores no tag names")
    return SequenceTagger(params=params, config=config, tag_names=tuple(labels))


# ------------------------------------------------- morphological analyses

@dataclass(frozen=True)
class MorphAnalysis:
    root: str
    pos: str
    morph_tags: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.root:
            raise DataError("analysis root must be non-empty")
        # '+' is the rendering separator; roots of unknown words are exempt
        for part in (self.pos,) + tuple(self.morph_tags):
            if not part or "+" in part:
                raise DataError(f"bad analysis component {part!r}")

    def render(self) -> str:
        """Canonical "root+Pos+Tag1+..." form; doubles as the history token."""
        return "+".join((self.root, self.pos) + tuple(self.morph_tags))

    def tag_tokens(self) -> Tuple[str, ...]:
        return (self.pos,) + tuple(self.morph_tags)


FALLBACK_POS = "Unknown"


def fallback_analysis(word: str) -> MorphAnalysis:
    return MorphAnalysis(root=word, pos=FALLBACK_POS)


@dataclass(frozen=True)
class MorphLexicon:
    """Maps lowercased surface forms to their candidate analyses, file order."""

    entries: Dict[str, Tuple[MorphAnalysis, ...]]

    def __len__(self) -> int:
        return len(self.entries)


def analyze_word(analyzer: MorphLexicon, word: str) -> List[MorphAnalysis]:
    """Every candidate for the word, or a single Unknown fallback; never empty."""
    found = analyzer.entries.get(lower_case(word))
    if found:
        return list(found)
    return [fallback_analysis(word)]


def load_morph_lexicon(source: Union[str, Path, Iterable[str]]) -> MorphLexicon:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return load_morph_lexicon(list(fh))
    entries: Dict[str, List[MorphAnalysis]] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise ParseError(f"expected 3 or 4 tab-separated fields, got "
                             f"{len(fields)}", line=lineno)
        surface, root, pos = fields[0], fields[1], fields[2]
        if not surface or surface != lower_case(surface):
            raise ParseError(f"surface {surface!r} must be non-empty lowercase",
                             line=lineno)
        tags: Tuple[str, ...] = ()
        if len(fields) == 4 and fields[3]:
            tags = tuple(fields[3].split("+"))
        try:
            analysis = MorphAnalysis(root=root, pos=pos, morph_tags=tags)
        except DataError as exc:
            raise ParseError(str(exc), line=lineno) from None
        bucket = entries.setdefault(surface, [])
        if any(a.render() == analysis.render() for a in bucket):
            raise ParseError(f"duplicate analysis for {surface!r}", line=lineno)
        bucket.append(analysis)
    return MorphLexicon(entries={s: tuple(a) for s, a in entries.items()})


def default_morph_lexicon() -> MorphLexicon:
    path = Path(__file__).parent / "resources" / "morph_lexicon_toy.tsv"
    return load_morph_lexicon(path)


def read_morph_sentences(source: Union[str, Path, Iterable[str]]):
    """Training data: lexicon-style lines per word (surface, root, pos, tags),
    blank lines between sentences. Returns (words, gold analyses) pairs."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_morph_sentences(list(fh))
    sentences = []
    words: List[str] = []
    gold: List[MorphAnalysis] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if words:
                sentences.append((words, gold))
                words, gold = [], []
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise ParseError(f"expected 3 or 4 tab-separated fields, got "
                             f"{len(fields)}", line=lineno)
        tags: Tuple[str, ...] = ()
        if len(fields) == 4 and fields[3]:
            tags = tuple(fields[3].split("+"))
        try:
            gold.append(MorphAnalysis(root=fields[1], pos=fields[2],
                                      morph_tags=tags))
        except DataError as exc:
            raise ParseError(str(exc), line=lineno) from None
        words.append(fields[0])
    if words:
        sentences.append((words, gold))
    return sentences


# ------------------------------------------------------- disambiguator

@dataclass(frozen=True)
class MorphConfig:
    context: ContextModelConfig
    num_tag_tokens: int
    tag_token_embed_dim: int = 8
    candidate_hidden: int = 16

    def __post_init__(self):
        for name in ("num_tag_tokens", "tag_token_embed_dim", "candidate_hidden"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")


@dataclass
class MorphModelParams:
    context: ContextModelParams
    tag_token_embedding: Tensor
    candidate_rnn: GruParams
    projection: DenseParams

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        out = self.context.named_tensors()
        out.append(("tag_token_embedding", self.tag_token_embedding))
        out += self.candidate_rnn.named_tensors("candidate_rnn.")
        out += self.projection.named_tensors("projection.")
        return out

    def tensors(self) -> List[Tensor]:
        return [t for _, t in self.named_tensors()]


@dataclass
class MorphModel:
    params: MorphModelParams
    config: MorphConfig
    analysis_vocab: Tuple[str, ...]
    token_vocab: Tuple[str, ...]


@dataclass
class MorphSentence:
    words: List[str]
    subword_ids: List[List[int]]
    candidates: List[List[MorphAnalysis]]
    gold: List[int]

    def __post_init__(self):
        lens = {len(self.words), len(self.subword_ids),
                len(self.candidates), len(self.gold)}
        if len(lens) != 1:
            raise DataError("morph sentence fields must align")


def prepare_morph_sentence(words: Sequence[str],
                           gold_analyses: Sequence[MorphAnalysis],
                           analyzer: MorphLexicon,
                           vocab: UnigramVocab) -> MorphSentence:
    if len(words) != len(gold_analyses):
        raise DataError("words and gold analyses must align")
    subword_ids = encode_words(words, vocab)
    candidates, gold = [], []
    for word, want in zip(words, gold_analyses):
        cands = analyze_word(analyzer, word)
        renders = [c.render() for c in cands]
        if want.render() not in renders:
            raise DataError(f"gold analysis {want.render()!r} is not a "
                            f"candidate of {word!r}")
        candidates.append(cands)
        gold.append(renders.index(want.render()))
    return MorphSentence(words=list(words), subword_ids=subword_ids,
                         candidates=candidates, gold=gold)


def _checked_vocab(vocab: Sequence[str], what: str) -> Tuple[str, ...]:
    out = tuple(vocab)
    if not out or out[0] != UNK_TOKEN:
        raise DataError(f"{what} vocabulary must start with {UNK_TOKEN!r}")
    if len(set(out)) != len(out):
        raise DataError(f"{what} vocabulary has duplicates")
    return out


def build_morph_vocabularies(corpus: Sequence[MorphSentence]):
    """(analysis renderings, tag tokens) over all candidates, unk id 0."""
    renders, tokens = set(), set()
    for sent in corpus:
        for cands in sent.candidates:
            for a in cands:
                renders.add(a.render())
                tokens.update(a.tag_tokens())
    return ((UNK_TOKEN,) + tuple(sorted(renders)),
            (UNK_TOKEN,) + tuple(sorted(tokens)))


def init_morph_model(vocab_size: int, analysis_vocab: Sequence[str],
                     token_vocab: Sequence[str], seed: int = 0,
                     context_config: ContextModelConfig = None,
                     tag_token_embed_dim: int = 8,
                     candidate_hidden: int = 16) -> MorphModel:
    analyses = _checked_vocab(analysis_vocab, "analysis")
    tokens = _checked_vocab(token_vocab, "tag token")
    if context_config is None:
        context_config = ContextModelConfig(vocab_size=vocab_size,
                                            num_tags=len(analyses))
    elif (context_config.num_tags != len(analyses)
          or context_config.vocab_size != vocab_size):
        raise ConfigError("context config disagrees with the vocabularies")
    config = MorphConfig(context=context_config, num_tag_tokens=len(tokens),
                         tag_token_embed_dim=tag_token_embed_dim,
                         candidate_hidden=candidate_hidden)
    rng = np.random.default_rng([seed, 1])
    params = MorphModelParams(
        context=context.init_context_model(context_config, seed),
        tag_token_embedding=Tensor(
            rng.uniform(-0.05, 0.05, size=(len(tokens), tag_token_embed_dim)),
            requires_grad=True),
        candidate_rnn=nc.init_gru(rng, candidate_hidden, tag_token_embed_dim),
        projection=DenseParams(
            W=nc.glorot(rng, candidate_hidden, context_config.fc2_units),
            b=nc.zeros(candidate_hidden)))
    return MorphModel(params=params, config=config,
                      analysis_vocab=analyses, token_vocab=tokens)


def _candidate_vector(params: MorphModelParams, config: MorphConfig,
                      analysis: MorphAnalysis,
                      token_index: Dict[str, int]) -> Tensor:
    h = Tensor(np.zeros(config.candidate_hidden))
    for tok in analysis.tag_tokens():
        x = ag.take_row(params.tag_token_embedding, token_index.get(tok, 0))
        h = nc.gru_step(params.candidate_rnn, h, x)
    return h


def candidate_scores(model: MorphModel, sentence: Sequence[Sequence[int]],
                     position: int, history_ids: Sequence[int],
                     candidates: Sequence[MorphAnalysis]) -> Tensor:
    """One score per candidate: dot(projected context vector, candidate GRU)."""
    if not candidates:
        raise InputError("need at least one candidate")
    token_index = {t: i for i, t in enumerate(model.token_vocab)}
    ctx = context.context_vector(model.params.context, model.config.context,
                                 sentence, position, history_ids)
    proj = nc.dense(model.params.projection.W, model.params.projection.b,
                    ctx, "none")
    vecs = [_candidate_vector(model.params, model.config, c, token_index)
            for c in candidates]
    return ag.stack_scalars([ag.dot(proj, v) for v in vecs])


def disambiguate(model: MorphModel, words: Sequence[str],
                 analyzer: MorphLexicon,
                 vocab: UnigramVocab) -> List[MorphAnalysis]:
    """Pick one analysis per word, left to right; single candidates are forced."""
    subword_ids = encode_words(words, vocab)
    analysis_index = {r: i for i, r in enumerate(model.analysis_vocab)}
    history: List[int] = []
    chosen: List[MorphAnalysis] = []
    with no_grad():
        for i, word in enumerate(words):
            cands = analyze_word(analyzer, word)
            if len(cands) == 1:
                pick = 0
            else:
                scores = candidate_scores(model, subword_ids, i, history, cands)
                pick = int(np.argmax(scores.data))
            chosen.append(cands[pick])
            history.append(analysis_index.get(cands[pick].render(), 0))
    return chosen


def stem(model: MorphModel, words: Sequence[str], analyzer: MorphLexicon,
         vocab: UnigramVocab) -> List[str]:
    """Context-dependent roots: disambiguate, then take each root."""
    return [a.root for a in disambiguate(model, words, analyzer, vocab)]


def train_morph_epoch(model: MorphModel, corpus: Sequence[MorphSentence],
                      train_config: TrainConfig, adam_state: AdamState,
                      epoch: int) -> float:
    """Teacher-forced pass; only ambiguous words carry a loss term."""
    if not corpus:
        raise InputError("training corpus is empty")
    analysis_index = {r: i for i, r in enumerate(model.analysis_vocab)}
    tensors = model.params.tensors()
    lr = nc.epoch_lr(train_config.learning_rate, epoch, train_config.epoch_decay)
    total, scored = 0.0, 0
    for sent in corpus:
        history = [analysis_index.get(c[g].render(), 0)
                   for c, g in zip(sent.candidates, sent.gold)]
        for i, cands in enumerate(sent.candidates):
            if len(cands) < 2:
                continue
            nc.zero_grads(tensors)
            scores = candidate_scores(model, sent.subword_ids, i,
                                      history[:i], cands)
            loss, _ = nc.softmax_cross_entropy(scores, sent.gold[i])
            ag.backward(loss)
            nc.adam_update(adam_state, tensors, [t.grad for t in tensors],
                           lr, train_config)
            total += float(loss.data)
            scored += 1
    return total / scored if scored else 0.0


_MORPH_EXTRA = ("tag_token_embedding", "candidate_rnn.W_z", "candidate_rnn.U_z",
                "candidate_rnn.b_z", "candidate_rnn.W_r", "candidate_rnn.U_r",
                "candidate_rnn.b_r", "candidate_rnn.W_h", "candidate_rnn.U_h",
                "candidate_rnn.b_h", "projection.W", "projection.b")


def save_morph_model(directory, model: MorphModel) -> None:
    labels = (["analysis:" + r for r in model.analysis_vocab]
              + ["token:" + t for t in model.token_vocab])
    named = dict(model.params.named_tensors())
    extra = [(name, named[name].data) for name in _MORPH_EXTRA]
    cfg = model.config
    context.save_context_model(
        directory, model.params.context, cfg.context, kind=KIND_MORPH,
        labels=labels, extra_tensors=extra,
        extra_config={"num_tag_tokens": str(cfg.num_tag_tokens),
                      "tag_token_embed_dim": str(cfg.tag_token_embed_dim),
                      "candidate_hidden": str(cfg.candidate_hidden)})


def _split_labels(labels: Sequence[str], prefix: str) -> Tuple[str, ...]:
    return tuple(l[len(prefix):] for l in labels if l.startswith(prefix))


def _fill_gru(tensors: Dict[str, np.ndarray], prefix: str,
              params: GruParams) -> None:
    for name, t in params.named_tensors(prefix):
        if name not in tensors:
            raise DataError(f"model file lacks tensor {name!r}")
        if tensors[name].shape != t.data.shape:
            raise DataError(f"tensor {name!r} has shape {tensors[name].shape}, "
                            f"expected {t.data.shape}")
        t.data[...] = tensors[name]


def load_morph_model(directory) -> MorphModel:
    ctx_params, ctx_config, labels, raw, tensors = context.load_context_model(
        directory, expected_kind=KIND_MORPH)
    analyses = _checked_vocab(_split_labels(labels, "analysis:"), "analysis")
    tokens = _checked_vocab(_split_labels(labels, "token:"), "tag token")
    for key in ("num_tag_tokens", "tag_token_embed_dim", "candidate_hidden"):
        if key not in raw:
            raise DataError(f"model config lacks {key!r}")
    config = MorphConfig(context=ctx_config,
                         num_tag_tokens=int(raw["num_tag_tokens"]),
                         tag_token_embed_dim=int(raw["tag_token_embed_dim"]),
                         candidate_hidden=int(raw["candidate_hidden"]))
    if len(analyses) != ctx_config.num_tags or len(tokens) != config.num_tag_tokens:
        raise DataError("stored vocabularies disagree with the model config")
    fresh = init_morph_model(ctx_config.vocab_size, analyses, tokens,
                             context_config=ctx_config,
                             tag_token_embed_dim=config.tag_token_embed_dim,
                             candidate_hidden=config.candidate_hidden)
    fresh.params.context = ctx_params
    emb = tensors.get("tag_token_embedding")
    if emb is None or emb.shape != fresh.params.tag_token_embedding.data.shape:
        raise DataError("bad or missing tag_token_embedding tensor")
    fresh.params.tag_token_embedding.data[...] = emb
    _fill_gru(tensors, "candidate_rnn.", fresh.params.candidate_rnn)
    for name, t in fresh.params.projection.named_tensors("projection."):
        if name not in tensors or tensors[name].shape != t.data.shape:
            raise DataError(f"bad or missing tensor {name!r}")
        t.data[...] = tensors[name]
    return fresh


# --------------------------------------------------------- dependency parsing

OFFSET_CLIP = 8  # relative head offsets clipped to [-8, 8]


@dataclass(frozen=True)
class DepArc:
    head: int  # 0 points at the artificial root, otherwise 1-based word index
    label: int

    def __post_init__(self):
        if self.head < 0 or self.label < 0:
            raise DataError("arc head and label must be non-negative")


@dataclass(frozen=True)
class DepParserConfig:
    context: ContextModelConfig
    num_labels: int
    max_sentence_len: int = 64

    def __post_init__(self):
        if self.num_labels <= 0 or self.max_sentence_len <= 0:
            raise ConfigError("num_labels and max_sentence_len must be positive")
        if self.context.num_tags != self.head_dim:
            raise ConfigError(
                f"context head must have {self.head_dim} outputs, "
                f"got {self.context.num_tags}")

    @property
    def arc_positions(self) -> int:
        return self.max_sentence_len + 1

    @property
    def head_dim(self) -> int:
        return self.max_sentence_len + 1 + self.num_labels


@dataclass
class DepParserParams:
    context: ContextModelParams
    label_embedding: Tensor
    offset_embedding: Tensor

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        return (self.context.named_tensors()
                + [("label_embedding", self.label_embedding),
                   ("offset_embedding", self.offset_embedding)])

    def tensors(self) -> List[Tensor]:
        return [t for _, t in self.named_tensors()]


@dataclass
class DepParser:
    params: DepParserParams
    config: DepParserConfig
    label_names: Tuple[str, ...]


@dataclass
class DepSentence:
    words: List[str]
    subword_ids: List[List[int]]
    arcs: List[DepArc]

    def __post_init__(self):
        if not (len(self.words) == len(self.subword_ids) == len(self.arcs)):
            raise DataError("words, subword_ids and arcs must align")


def init_dep_parser(vocab_size: int, label_names: Sequence[str], seed: int = 0,
                    max_sentence_len: int = 64,
                    context_config: ContextModelConfig = None) -> DepParser:
    names = tuple(label_names)
    if not names or len(set(names)) != len(names):
        raise ConfigError("label names must be non-empty and distinct")
    head_dim = max_sentence_len + 1 + len(names)
    if context_config is None:
        context_config = ContextModelConfig(vocab_size=vocab_size,
                                            num_tags=head_dim)
    config = DepParserConfig(context=context_config, num_labels=len(names),
                             max_sentence_len=max_sentence_len)
    rng = np.random.default_rng([seed, 2])
    params = DepParserParams(
        context=context.init_context_model(context_config, seed),
        label_embedding=Tensor(
            rng.uniform(-0.05, 0.05,
                        size=(len(names), context_config.tag_embed_dim)),
            requires_grad=True),
        offset_embedding=Tensor(
            rng.uniform(-0.05, 0.05,
                        size=(2 * OFFSET_CLIP + 1, context_config.tag_embed_dim)),
            requires_grad=True))
    return DepParser(params=params, config=config, label_names=names)


def _arc_history_vectors(params: DepParserParams,
                         arcs: Sequence[DepArc]) -> List[Tensor]:
    vecs = []
    for j, arc in enumerate(arcs):
        offset = max(-OFFSET_CLIP, min(OFFSET_CLIP, arc.head - (j + 1)))
        vecs.append(ag.add(ag.take_row(params.label_embedding, arc.label),
                           ag.take_row(params.offset_embedding,
                                       offset + OFFSET_CLIP)))
    return vecs


def dep_logits(parser: DepParser, sentence: Sequence[Sequence[int]],
               position: int, history: Sequence[DepArc]) -> Tensor:
    """Raw head outputs: arc positions 0..L then relation labels."""
    vecs = _arc_history_vectors(parser.params, history)
    h2 = context.context_vector_from_history(
        parser.params.context, parser.config.context, sentence, position, vecs)
    head = parser.params.context.head
    return nc.dense(head.W, head.b, h2, "none")


def parse_dependencies(parser: DepParser, words: Sequence[str],
                       vocab: UnigramVocab) -> List[DepArc]:
    """Greedy left-to-right decode; own position masked out of the arc argmax."""
    n = len(words)
    if n > parser.config.max_sentence_len:
        raise InputError(f"sentence of {n} words exceeds the parser capacity "
                         f"of {parser.config.max_sentence_len}")
    subword_ids = encode_words(words, vocab)
    arc_positions = parser.config.arc_positions
    arcs: List[DepArc] = []
    with no_grad():
        for i in range(n):
            logits = dep_logits(parser, subword_ids, i, arcs)
            arc_scores = logits.data[:n + 1].copy()
            arc_scores[i + 1] = -np.inf
            labels = logits.data[arc_positions:arc_positions
                                 + parser.config.num_labels]
            arcs.append(DepArc(head=int(np.argmax(arc_scores)),
                               label=int(np.argmax(labels))))
    return arcs


def prepare_dep_sentence(words: Sequence[str], heads: Sequence[int],
                         deprels: Sequence[str], vocab: UnigramVocab,
                         label_names: Sequence[str],
                         max_sentence_len: int) -> DepSentence:
    n = len(words)
    if not (n == len(heads) == len(deprels)):
        raise DataError("words, heads and deprels must align")
    if n > max_sentence_len:
        raise DataError(f"sentence of {n} words exceeds the parser capacity "
                        f"of {max_sentence_len}")
    arcs = []
    for j, (head, rel) in enumerate(zip(heads, deprels)):
        if not 0 <= head <= n:
            raise DataError(f"head {head} out of range for {n} words")
        if head == j + 1:
            raise DataError(f"word {j + 1} depends on itself")
        arcs.append(DepArc(head=head, label=tag_id(rel, label_names)))
    return DepSentence(words=list(words),
                       subword_ids=encode_words(words, vocab), arcs=arcs)


def train_dep_epoch(parser: DepParser, corpus: Sequence[DepSentence],
                    train_config: TrainConfig, adam_state: AdamState,
                    epoch: int) -> float:
    """Multi-hot binary cross entropy over the (arc, label) vector per word."""
    if not corpus:
        raise InputError("training corpus is empty")
    config = parser.config
    for sent in corpus:
        if len(sent.words) > config.max_sentence_len:
            raise DataError("training sentence exceeds the parser capacity")
        for arc in sent.arcs:
            if arc.head > len(sent.words) or arc.label >= config.num_labels:
                raise DataError(f"arc ({arc.head}, {arc.label}) out of range")
    tensors = parser.params.tensors()
    lr = nc.epoch_lr(train_config.learning_rate, epoch, train_config.epoch_decay)
    total, positions = 0.0, 0
    for sent in corpus:
        for i, arc in enumerate(sent.arcs):
            nc.zero_grads(tensors)
            logits = dep_logits(parser, sent.subword_ids, i, sent.arcs[:i])
            probs = ag.sigmoid(logits)
            target = np.zeros(config.head_dim)
            target[arc.head] = 1.0
            target[config.arc_positions + arc.label] = 1.0
            loss, _ = nc.binary_cross_entropy(probs, target)
            ag.backward(loss)
            nc.adam_update(adam_state, tensors, [t.grad for t in tensors],
                           lr, train_config)
            total += float(loss.data)
            positions += 1
    return total / positions


def save_dep_parser(directory, parser: DepParser) -> None:
    cfg = parser.config
    context.save_context_model(
        directory, parser.params.context, cfg.context, kind=KIND_DEP,
        labels=parser.label_names,
        extra_tensors=[("label_embedding", parser.params.label_embedding.data),
                       ("offset_embedding", parser.params.offset_embedding.data)],
        extra_config={"num_labels": str(cfg.num_labels),
                      "max_sentence_len": str(cfg.max_sentence_len)})


def load_dep_parser(directory) -> DepParser:
    ctx_params, ctx_config, labels, raw, tensors = context.load_context_model(
        directory, expected_kind=KIND_DEP)
    for key in ("num_labels", "max_sentence_len"):
        if key not in raw:
            raise DataError(f"model config lacks {key!r}")
    names = tuple(labels)
    if len(names) != int(raw["num_labels"]):
        raise DataError("stored labels disagree with num_labels")
    config = DepParserConfig(context=ctx_config, num_labels=len(names),
                             max_sentence_len=int(raw["max_sentence_len"]))
    fresh = init_dep_parser(ctx_config.vocab_size, names,
                            max_sentence_len=config.max_sentence_len,
                            context_config=ctx_config)
    fresh.params.context = ctx_params
    for name, tensor in (("label_embedding", fresh.params.label_embedding),
                         ("offset_embedding", fresh.params.offset_embedding)):
        stored = tensors.get(name)
        if stored is None or stored.shape != tensor.data.shape:
            raise DataError(f"bad or missing tensor {name!r}")
        tensor.data[...] = stored
    return fresh
