"""Command-line front end: every pipeline stage, training, tagging and
evaluation behind one executable.

Results go to stdout (one line per input line, or the documented metric
line); diagnostics go to stderr. Exit codes: 0 success, 1 usage problems,
2 broken data or missing files.
"""

import argparse
import json
import os
import shutil
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import context, data, deascii, normalization, numwords, sentences
from . import sentiment, spelling, stopwords, tasks, tokenizer
from .errors import ConfigError, DataError, InputError, ParseError
from .nn import AdamState, TrainConfig
from .nn import core as nc


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse would exit(2); the contract reserves 2 for data problems
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


class _OrderedFlag(argparse.Action):
    """Records normalize steps in the order their flags appear."""

    def __call__(self, parser, namespace, values, option_string=None):
        steps = getattr(namespace, "steps", None)
        if steps is None:
            steps = []
            namespace.steps = steps
        steps.append((self.dest, values))


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    return value


def _read_lines(args) -> list:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            return fh.read().splitlines()
    return sys.stdin.read().splitlines()


def _read_text(args) -> str:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            return fh.read()
    return sys.stdin.read()


@contextmanager
def _open_out(args):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(fh, args, obj, text) -> None:
    if args.json:
        print(json.dumps(obj, ensure_ascii=False), file=fh)
    else:
        print(text, file=fh)


def _model_dir(arg: str) -> Path:
    path = Path(arg)
    root = os.environ.get("VNLP_MODEL_DIR")
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def _add_io(sub) -> None:
    sub.add_argument("--input", help="read from this file instead of stdin")
    sub.add_argument("--output", help="write to this file instead of stdout")


# ------------------------------------------------------------- plain verbs

def _cmd_split_sentences(args) -> int:
    lexicon = sentences.default_lexicon()
    text = _read_text(args)
    with _open_out(args) as fh:
        for sent in sentences.split_sentences(text, lexicon):
            _emit(fh, args, {"sentence": sent}, sent)
    return 0


_NORMALIZE_STEPS = ("lower", "no_punct", "no_accents", "deascii",
                    "num2word", "spell")


def _numeral_to_words(token: str) -> str:
    try:
        return numwords.number_to_words(token)
    except (ParseError, InputError):
        return token


def _cmd_normalize(args) -> int:
    steps = getattr(args, "steps", None) or []
    table = None
    spell_models = {}
    for name, value in steps:
        if name == "deascii" and table is None:
            table = deascii.default_deascii_table()
        if name == "spell" and value not in spell_models:
            dictionary = spelling.load_frequency_dictionary(value)
            spell_models[value] = spelling.SpellingModel.from_dictionary(dictionary)
    with _open_out(args) as fh:
        for line in _read_lines(args):
            for name, value in steps:
                if name == "lower":
                    line = normalization.lower_case(line)
                elif name == "no_punct":
                    line = normalization.remove_punctuation(line)
                elif name == "no_accents":
                    line = normalization.remove_accent_marks(line)
                elif name == "deascii":
                    line = deascii.deasciify(line, table)
                elif name == "num2word":
                    line = " ".join(_numeral_to_words(t) for t in line.split())
                elif name == "spell":
                    corrected = spelling.correct_spelling(
                        line.split(), spell_models[value])
                    line = " ".join(corrected)
            _emit(fh, args, {"text": line}, line)
    return 0


def _cmd_stopwords(args) -> int:
    lines = _read_lines(args)
    if args.dynamic:
        tokens = [t for line in lines for t in line.split()]
        if not tokens:
            raise InputError("dynamic stopword detection needs tokens")
        stop = stopwords.detect_dynamic_stopwords(tokens)

        def keep(token):
            return normalization.lower_case(token) not in stop
    else:
        lexicon = stopwords.default_stopwords()

        def keep(token):
            return normalization.lower_case(token) not in lexicon.words
    with _open_out(args) as fh:
        for line in lines:
            kept = [t for t in line.split() if keep(t)]
            _emit(fh, args, {"tokens": kept}, " ".join(kept))
    return 0


def _cmd_tokenizer(args) -> int:
    if args.tok_action == "train":
        with open(args.data, encoding="utf-8") as fh:
            words = fh.read().split()
        vocab = tokenizer.train_unigram(words, target_size=args.target_size,
                                        seed_size=args.seed_size,
                                        shrink_factor=args.shrink)
        tokenizer.save_vocab(vocab, args.out)
        print(f"vocab of {vocab.size} pieces written to {args.out}",
              file=sys.stderr)
        return 0
    vocab = tokenizer.load_vocab(args.vocab)
    with _open_out(args) as fh:
        for line in _read_lines(args):
            per_word = tokenizer.encode_text(line, vocab)
            ids = [i for word in per_word for i in word]
            pieces = [vocab.piece_of(i) for i in ids]
            text = " ".join(str(i) for i in ids) if args.ids else " ".join(pieces)
            _emit(fh, args, {"pieces": pieces, "ids": ids}, text)
    return 0


def _cmd_spell(args) -> int:
    with open(args.corpus, encoding="utf-8") as fh:
        tokens = fh.read().split()
    model = spelling.build_spelling_model(tokens)
    with _open_out(args) as fh:
        for line in _read_lines(args):
            fixed = " ".join(spelling.correct_spelling(
                line.split(), model, max_edit=args.max_edit))
            _emit(fh, args, {"text": fixed}, fixed)
    return 0


# ---------------------------------------------------------------- training

def _train_loop(args, step, tensors) -> None:
    """Runs `step(epoch)` for every epoch and prints the loss protocol line."""
    train_config = TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                               epoch_decay=args.decay)
    adam = AdamState.for_params(tensors)
    for epoch in range(args.epochs):
        loss = step(epoch, train_config, adam)
        lr = nc.epoch_lr(args.lr, epoch, args.decay)
        line = f"epoch {epoch} loss {loss:.6f} lr {lr:.8g}"
        if args.json:
            print(json.dumps({"epoch": epoch, "loss": loss, "lr": lr}))
        else:
            print(line)


def _cmd_train(args) -> int:
    vocab = tokenizer.load_vocab(args.vocab)
    out_dir = _model_dir(args.model)
    task = args.task
    if task == "ner":
        corpus = [tasks.make_tagged_sentence(w, t, vocab, tasks.NER_TAGS)
                  for w, t in data.read_ner_io(args.data)]
        if not corpus:
            raise DataError(f"no sentences in {args.data}")
        model = tasks.init_tagger(vocab.size, tasks.NER_TAGS, seed=args.seed)
        _train_loop(args, lambda e, tc, adam: tasks.train_tagger_epoch(
            model, corpus, tc, adam, e), model.params.tensors())
        tasks.save_tagger(out_dir, model, tasks.KIND_NER)
    elif task == "pos":
        conllu = data.read_conllu(args.data)
        if not conllu:
            raise DataError(f"no sentences in {args.data}")
        corpus = [tasks.make_tagged_sentence(s.forms, s.upos, vocab,
                                             tasks.UPOS_TAGS) for s in conllu]
        model = tasks.init_tagger(vocab.size, tasks.UPOS_TAGS, seed=args.seed)
        _train_loop(args, lambda e, tc, adam: tasks.train_tagger_epoch(
            model, corpus, tc, adam, e), model.params.tensors())
        tasks.save_tagger(out_dir, model, tasks.KIND_POS)
    elif task == "morph":
        analyzer = (tasks.load_morph_lexicon(args.lexicon) if args.lexicon
                    else tasks.default_morph_lexicon())
        raw = tasks.read_morph_sentences(args.data)
        if not raw:
            raise DataError(f"no sentences in {args.data}")
        corpus = [tasks.prepare_morph_sentence(w, g, analyzer, vocab)
                  for w, g in raw]
        avocab, tvocab = tasks.build_morph_vocabularies(corpus)
        model = tasks.init_morph_model(vocab.size, avocab, tvocab,
                                       seed=args.seed)
        _train_loop(args, lambda e, tc, adam: tasks.train_morph_epoch(
            model, corpus, tc, adam, e), model.params.tensors())
        tasks.save_morph_model(out_dir, model)
    elif task == "dep":
        conllu = data.read_conllu(args.data)
        if not conllu:
            raise DataError(f"no sentences in {args.data}")
        labels = tuple(sorted({rel for s in conllu for rel in s.deprels}))
        parser = tasks.init_dep_parser(vocab.size, labels, seed=args.seed,
                                       max_sentence_len=args.max_len)
        corpus = [tasks.prepare_dep_sentence(s.forms, s.heads, s.deprels,
                                             vocab, labels, args.max_len)
                  for s in conllu]
        _train_loop(args, lambda e, tc, adam: tasks.train_dep_epoch(
            parser, corpus, tc, adam, e), parser.params.tensors())
        tasks.save_dep_parser(out_dir, parser)
    else:  # sentiment
        corpus = data.read_sentiment_tsv(args.data)
        if not corpus:
            raise DataError(f"no examples in {args.data}")
        config = sentiment.SentimentConfig(vocab_size=vocab.size)
        model = sentiment.init_sentiment_model(config, seed=args.seed)
        train_config = TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                                   epoch_decay=args.decay)
        adam = AdamState.for_params(model.params.tensors())
        losses = sentiment.train_sentiment(model, corpus, vocab, train_config,
                                           adam)
        for epoch, loss in enumerate(losses):
            lr = nc.epoch_lr(args.lr, epoch, args.decay)
            if args.json:
                print(json.dumps({"epoch": epoch, "loss": loss, "lr": lr}))
            else:
                print(f"epoch {epoch} loss {loss:.6f} lr {lr:.8g}")
        sentiment.save_sentiment_model(out_dir, model)
    shutil.copyfile(args.vocab, out_dir / "vocab.txt")
    return 0


# ----------------------------------------------------------------- tagging

def _load_vocab_for(model_dir: Path) -> tokenizer.UnigramVocab:
    path = model_dir / "vocab.txt"
    if not path.exists():
        raise DataError(f"model directory {model_dir} has no vocab.txt")
    return tokenizer.load_vocab(path)


def _cmd_tag(args) -> int:
    model_dir = _model_dir(args.model)
    vocab = _load_vocab_for(model_dir)
    lines = [l for l in _read_lines(args) if l.strip()]
    task = args.task
    with _open_out(args) as fh:
        if task in ("ner", "pos"):
            kind = tasks.KIND_NER if task == "ner" else tasks.KIND_POS
            model = tasks.load_tagger(model_dir, kind)
            for line in lines:
                pairs = tasks.tag_words(model, line.split(), vocab)
                obj = {"words": [w for w, _ in pairs],
                       "tags": [t for _, t in pairs]}
                text = "\n".join(f"{w}\t{t}" for w, t in pairs) + "\n"
                _emit(fh, args, obj, text)
        elif task == "morph":
            model = tasks.load_morph_model(model_dir)
            analyzer = (tasks.load_morph_lexicon(args.lexicon) if args.lexicon
                        else tasks.default_morph_lexicon())
            for line in lines:
                words = line.split()
                chosen = tasks.disambiguate(model, words, analyzer, vocab)
                obj = {"words": words,
                       "analyses": [a.render() for a in chosen],
                       "roots": [a.root for a in chosen]}
                text = "\n".join(f"{w}\t{a.render()}"
                                 for w, a in zip(words, chosen)) + "\n"
                _emit(fh, args, obj, text)
        else:  # dep
            parser = tasks.load_dep_parser(model_dir)
            for line in lines:
                words = line.split()
                arcs = tasks.parse_dependencies(parser, words, vocab)
                names = [parser.label_names[a.label] for a in arcs]
                obj = {"words": words, "heads": [a.head for a in arcs],
                       "labels": names}
                rows = [f"{i + 1}\t{w}\t_\t_\t_\t_\t{a.head}\t{name}\t_\t_"
                        for i, (w, a, name) in enumerate(zip(words, arcs, names))]
                _emit(fh, args, obj, "\n".join(rows) + "\n")
    return 0


def _cmd_classify(args) -> int:
    model_dir = _model_dir(args.model)
    vocab = _load_vocab_for(model_dir)
    model = sentiment.load_sentiment_model(model_dir)
    with _open_out(args) as fh:
        for line in _read_lines(args):
            if not line.strip():
                continue
            label, prob = sentiment.classify(model, line, vocab,
                                             threshold=args.threshold)
            _emit(fh, args, {"label": label, "probability": prob},
                  f"{label}\t{prob:.6f}")
    return 0


# -------------------------------------------------------------- evaluation

def _read_tag_blocks(path) -> list:
    """Like the entity reader but without the tag-set check (POS files)."""
    blocks, words, tags = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh.read().splitlines(), start=1):
            if not raw.strip():
                if words:
                    blocks.append((words, tags))
                    words, tags = [], []
                continue
            parts = raw.split("\t")
            if len(parts) != 2:
                raise ParseError("expected token<TAB>tag", line=lineno)
            words.append(parts[0])
            tags.append(parts[1])
    if words:
        blocks.append((words, tags))
    return blocks


def _flat_tags(blocks) -> list:
    return [t for _, tags in blocks for t in tags]


def _cmd_eval(args) -> int:
    what = args.what
    with _open_out(args) as fh:
        if what == "ner":
            gold = _flat_tags(data.read_ner_io(args.gold))
            pred = _flat_tags(data.read_ner_io(args.pred))
            acc, f1 = data.accuracy(gold, pred), data.f1_macro(gold, pred)
            _emit(fh, args, {"accuracy": acc, "f1_macro": f1},
                  f"accuracy {acc:.4f} f1_macro {f1:.4f}")
        elif what == "pos":
            gold = [t for s in data.read_conllu(args.gold) for t in s.upos]
            pred = _flat_tags(_read_tag_blocks(args.pred))
            acc, f1 = data.accuracy(gold, pred), data.f1_macro(gold, pred)
            _emit(fh, args, {"accuracy": acc, "f1_macro": f1},
                  f"accuracy {acc:.4f} f1_macro {f1:.4f}")
        elif what == "dep":
            def arcs_of(path):
                sents = data.read_conllu(path)
                label_ids = {}
                out = []
                for s in sents:
                    out.append([tasks.DepArc(
                        head=h, label=label_ids.setdefault(rel, len(label_ids)))
                        for h, rel in zip(s.heads, s.deprels)])
                return out, label_ids
            gold_arcs, gold_labels = arcs_of(args.gold)
            pred_sents = data.read_conllu(args.pred)
            pred_arcs = [[tasks.DepArc(head=h,
                                       label=gold_labels.get(rel, len(gold_labels)))
                          for h, rel in zip(s.heads, s.deprels)]
                         for s in pred_sents]
            las, uas = data.las_uas(gold_arcs, pred_arcs)
            _emit(fh, args, {"las": las, "uas": uas},
                  f"LAS {las:.4f} UAS {uas:.4f}")
        elif what == "sentiment":
            gold = [label for _, label in data.read_sentiment_tsv(args.gold)]
            with open(args.pred, encoding="utf-8") as pfh:
                pred_lines = [l for l in pfh.read().splitlines() if l.strip()]
            mapping = {"0": 0, "1": 1, "negative": 0, "positive": 1}
            pred = []
            for lineno, line in enumerate(pred_lines, start=1):
                token = line.split("\t")[0]
                if token not in mapping:
                    raise DataError(f"line {lineno}: unknown label {token!r}")
                pred.append(mapping[token])
            acc, f1 = data.accuracy(gold, pred), data.f1_macro(gold, pred)
            _emit(fh, args, {"accuracy": acc, "f1_macro": f1},
                  f"accuracy {acc:.4f} f1_macro {f1:.4f}")
        else:  # spell
            with open(args.gold, encoding="utf-8") as gfh:
                ref = gfh.read().split()
            with open(args.pred, encoding="utf-8") as pfh:
                hyp = pfh.read().split()
            wer = data.word_error_rate(ref, hyp)
            _emit(fh, args, {"wer": wer}, f"WER {wer:.4f}")
    return 0


# ----------------------------------------------------------------- parsing

def build_parser() -> _Parser:
    parser = _Parser(prog="turknlp", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for every stochastic component")
    parser.add_argument("--json", action="store_true",
                        help="emit one JSON object per output line")
    verbs = parser.add_subparsers(dest="verb", required=True)

    sub = verbs.add_parser("split-sentences", help="one sentence per line")
    _add_io(sub)
    sub.set_defaults(func=_cmd_split_sentences)

    sub = verbs.add_parser("normalize",
                           help="apply normalization steps in flag order")
    _add_io(sub)
    sub.add_argument("--lower", dest="lower", nargs=0, action=_OrderedFlag)
    sub.add_argument("--no-punct", dest="no_punct", nargs=0,
                     action=_OrderedFlag)
    sub.add_argument("--no-accents", dest="no_accents", nargs=0,
                     action=_OrderedFlag)
    sub.add_argument("--deascii", dest="deascii", nargs=0, action=_OrderedFlag)
    sub.add_argument("--num2word", dest="num2word", nargs=0,
                     action=_OrderedFlag)
    sub.add_argument("--spell", dest="spell", metavar="DICT",
                     action=_OrderedFlag)
    sub.set_defaults(func=_cmd_normalize)

    sub = verbs.add_parser("stopwords", help="drop stopword tokens per line")
    _add_io(sub)
    sub.add_argument("--dynamic", action="store_true",
                     help="derive the stopword set from the input itself")
    sub.set_defaults(func=_cmd_stopwords)

    sub = verbs.add_parser("tokenizer", help="subword vocabulary tools")
    tok = sub.add_subparsers(dest="tok_action", required=True)
    train = tok.add_parser("train", help="fit a subword vocabulary")
    train.add_argument("--data", required=True, help="plain-text corpus")
    train.add_argument("--out", required=True, help="vocabulary file to write")
    train.add_argument("--target-size", type=_positive_int, default=2000)
    train.add_argument("--seed-size", type=_positive_int, default=20000)
    train.add_argument("--shrink", type=_fraction, default=0.75)
    train.set_defaults(func=_cmd_tokenizer)
    enc = tok.add_parser("encode", help="segment text into pieces")
    _add_io(enc)
    enc.add_argument("--vocab", required=True)
    enc.add_argument("--ids", action="store_true",
                     help="print piece ids instead of pieces")
    enc.set_defaults(func=_cmd_tokenizer)

    sub = verbs.add_parser("train", help="train a task model")
    sub.add_argument("task",
                     choices=["ner", "pos", "morph", "dep", "sentiment"])
    sub.add_argument("--data", required=True)
    sub.add_argument("--model", required=True,
                     help="output directory (joined to VNLP_MODEL_DIR when "
                          "relative and the variable is set)")
    sub.add_argument("--vocab", required=True, help="subword vocabulary file")
    sub.add_argument("--epochs", type=_positive_int, default=50)
    sub.add_argument("--lr", type=_fraction, default=5e-3)
    sub.add_argument("--decay", type=_fraction, default=0.95)
    sub.add_argument("--max-len", type=_positive_int, default=64,
                     help="dependency parser sentence capacity")
    sub.add_argument("--lexicon", help="analysis lexicon (morph only)")
    sub.set_defaults(func=_cmd_train)

    sub = verbs.add_parser("tag", help="tag one sentence per input line")
    sub.add_argument("task", choices=["ner", "pos", "morph", "dep"])
    sub.add_argument("--model", required=True)
    sub.add_argument("--lexicon", help="analysis lexicon (morph only)")
    _add_io(sub)
    sub.set_defaults(func=_cmd_tag)

    sub = verbs.add_parser("classify", help="binary sentiment per line")
    sub.add_argument("task", choices=["sentiment"])
    sub.add_argument("--model", required=True)
    sub.add_argument("--threshold", type=_fraction, default=0.5)
    _add_io(sub)
    sub.set_defaults(func=_cmd_classify)

    sub = verbs.add_parser("eval", help="score predictions against gold")
    sub.add_argument("what",
                     choices=["ner", "pos", "dep", "sentiment", "spell"])
    sub.add_argument("--gold", required=True)
    sub.add_argument("--pred", required=True)
    sub.add_argument("--output", help="write the metric line here")
    sub.set_defaults(func=_cmd_eval)

    sub = verbs.add_parser("spell", help="correct spelling per line")
    _add_io(sub)
    sub.add_argument("--corpus", required=True,
                     help="plain-text corpus for the frequency model")
    sub.add_argument("--max-edit", type=_positive_int, default=1)
    sub.set_defaults(func=_cmd_spell)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"turknlp: error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, DataError, InputError) as exc:
        print(f"turknlp: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"turknlp: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
