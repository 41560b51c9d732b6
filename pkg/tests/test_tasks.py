import math

import numpy as np
import pytest

from turknlp import tasks
from turknlp.context import ContextModelConfig
from turknlp.errors import ConfigError, DataError, InputError, ParseError
from turknlp.nn import AdamState, TrainConfig
from turknlp.nn import core as nc
from turknlp.tasks import (DepArc, DepParserConfig, DepSentence, MorphAnalysis,
                           NER_TAGS, OFFSET_CLIP, UPOS_TAGS)
from turknlp.tokenizer import make_vocab


def char_vocab(*texts):
    chars = sorted({c for t in texts for c in t if not c.isspace()})
    return make_vocab({c: math.log(1.0 / len(chars)) for c in chars})


def small_config(vocab_size, num_tags):
    return ContextModelConfig(vocab_size=vocab_size, num_tags=num_tags,
                              subword_embed_dim=4, word_rnn_hidden=6,
                              left_ctx_hidden=4, right_ctx_hidden=4,
                              tag_embed_dim=4, tag_rnn_hidden=4,
                              fc1_units=8, fc2_units=6)


class TestTagIds:
    def test_lookup(self):
        assert tasks.tag_id("LOC", NER_TAGS) == 2

    def test_unknown(self):
        with pytest.raises(DataError):
            tasks.tag_id("MISC", NER_TAGS)

    def test_upos_is_alphabetical(self):
        assert list(UPOS_TAGS) == sorted(UPOS_TAGS)
        assert len(set(UPOS_TAGS)) == 17


class TestSequenceTagger:
    def test_init_rejects_bad_tag_sets(self):
        with pytest.raises(ConfigError):
            tasks.init_tagger(10, [])
        with pytest.raises(ConfigError):
            tasks.init_tagger(10, ["A", "A"])

    def test_init_rejects_mismatched_config(self):
        cfg = small_config(10, 3)
        with pytest.raises(ConfigError):
            tasks.init_tagger(10, ["A", "B"], config=cfg)
        with pytest.raises(ConfigError):
            tasks.init_tagger(11, ["A", "B", "C"], config=cfg)

    def test_make_tagged_sentence(self):
        vocab = char_vocab("ab")
        sent = tasks.make_tagged_sentence(["ab", "ba"], ["O", "PER"],
                                          vocab, NER_TAGS)
        assert sent.tags == [0, 1]
        assert len(sent.subword_ids) == 2
        with pytest.raises(DataError):
            tasks.make_tagged_sentence(["ab"], ["O", "O"], vocab, NER_TAGS)

    def test_tag_set_guards(self):
        vocab = char_vocab("ab")
        ner = tasks.init_tagger(vocab.size, NER_TAGS,
                                config=small_config(vocab.size, len(NER_TAGS)))
        pos = tasks.init_tagger(vocab.size, UPOS_TAGS,
                                config=small_config(vocab.size, len(UPOS_TAGS)))
        with pytest.raises(DataError):
            tasks.ner_tag(pos, ["ab"], vocab)
        with pytest.raises(DataError):
            tasks.pos_tag(ner, ["ab"], vocab)
        out = tasks.ner_tag(ner, ["ab", "ba"], vocab)
        assert [w for w, _ in out] == ["ab", "ba"]
        assert all(t in NER_TAGS for _, t in out)

    def test_overfit_and_roundtrip(self, tmp_path):
        corpus_text = [(["ali", "eve", "gitti"], ["PER", "O", "O"]),
                       (["ankara", "nerede"], ["LOC", "O"])]
        vocab = char_vocab(*(w for s, _ in corpus_text for w in s))
        model = tasks.init_tagger(vocab.size, NER_TAGS, seed=3,
                                  config=small_config(vocab.size, len(NER_TAGS)))
        corpus = [tasks.make_tagged_sentence(w, t, vocab, NER_TAGS)
                  for w, t in corpus_text]
        adam = AdamState.for_params(model.params.tensors())
        tc = TrainConfig(learning_rate=2e-2, epoch_decay=1.0)
        for epoch in range(120):
            tasks.train_tagger_epoch(model, corpus, tc, adam, epoch)
        for words, want in corpus_text:
            got = [t for _, t in tasks.ner_tag(model, words, vocab)]
            assert got == want
        tasks.save_tagger(tmp_path / "m", model, tasks.KIND_NER)
        back = tasks.load_tagger(tmp_path / "m", tasks.KIND_NER)
        assert back.tag_names == NER_TAGS
        for words, _ in corpus_text:
            assert tasks.ner_tag(back, words, vocab) == \
                tasks.ner_tag(model, words, vocab)
        with pytest.raises(DataError):
            tasks.load_tagger(tmp_path / "m", tasks.KIND_POS)


MORPH_LEXICON = [
    "kalemi\tkalem\tNoun\tA3sg+Acc",
    "kalemi\tkale\tNoun\tP3sg+Acc",
    "al\tal\tVerb\tImp+A2sg",
    "al\tal\tAdj",
    "uzun\tuzun\tAdj",
    "tek\ttek\tAdj",
]


def morph_fixture():
    analyzer = tasks.load_morph_lexicon(MORPH_LEXICON)
    vocab = char_vocab("kalemi al uzun tek")
    return analyzer, vocab


class TestMorphAnalysis:
    def test_render_and_tokens(self):
        a = MorphAnalysis(root="kalem", pos="Noun", morph_tags=("A3sg", "Acc"))
        assert a.render() == "kalem+Noun+A3sg+Acc"
        assert a.tag_tokens() == ("Noun", "A3sg", "Acc")

    def test_validation(self):
        with pytest.raises(DataError):
            MorphAnalysis(root="", pos="Noun")
        with pytest.raises(DataError):
            MorphAnalysis(root="a", pos="No+un")
        with pytest.raises(DataError):
            MorphAnalysis(root="a", pos="Noun", morph_tags=("",))

    def test_fallback_permits_separator_in_root(self):
        a = tasks.fallback_analysis("a+b")
        assert a.render() == "a+b+Unknown"

    def test_analyze_word_lowercases_and_falls_back(self):
        analyzer, _ = morph_fixture()
        upper = tasks.analyze_word(analyzer, "Kalemi")
        assert [a.render() for a in upper] == ["kalem+Noun+A3sg+Acc",
                                               "kale+Noun+P3sg+Acc"]
        unknown = tasks.analyze_word(analyzer, "zzz")
        assert len(unknown) == 1 and unknown[0].pos == tasks.FALLBACK_POS

    def test_default_lexicon_has_ambiguity(self):
        lex = tasks.default_morph_lexicon()
        assert len(lex) > 0
        assert any(len(c) > 1 for c in lex.entries.values())


class TestMorphParsing:
    def test_lexicon_errors(self):
        with pytest.raises(ParseError):
            tasks.load_morph_lexicon(["only two\tfields"])
        with pytest.raises(ParseError):
            tasks.load_morph_lexicon(["Kalemi\tkalem\tNoun"])  # not lowercase
        with pytest.raises(ParseError):
            tasks.load_morph_lexicon(["al\tal\tAdj", "al\tal\tAdj"])
        with pytest.raises(ParseError) as exc:
            tasks.load_morph_lexicon(["ok\tok\tNoun", "bad\t\tNoun"])
        assert "line 2" in str(exc.value)

    def test_lexicon_skips_comments(self):
        lex = tasks.load_morph_lexicon(["# note", "", "al\tal\tAdj"])
        assert len(lex) == 1

    def test_read_sentences(self):
        text = ["al\tal\tVerb\tImp+A2sg", "", "", "uzun\tuzun\tAdj",
                "al\tal\tAdj"]
        got = tasks.read_morph_sentences(text)
        assert len(got) == 2
        words, gold = got[1]
        assert words == ["uzun", "al"]
        assert gold[1].render() == "al+Adj"

    def test_read_sentences_bad_line(self):
        with pytest.raises(ParseError) as exc:
            tasks.read_morph_sentences(["al\tal\tVerb", "broken"])
        assert "line 2" in str(exc.value)

    def test_prepare_checks_gold_is_candidate(self):
        analyzer, vocab = morph_fixture()
        gold = [MorphAnalysis(root="al", pos="Verb", morph_tags=("Imp", "A2sg"))]
        sent = tasks.prepare_morph_sentence(["al"], gold, analyzer, vocab)
        assert sent.gold == [0]
        with pytest.raises(DataError):
            tasks.prepare_morph_sentence(
                ["al"], [MorphAnalysis(root="al", pos="Noun")], analyzer, vocab)

    def test_vocabularies_sorted_with_unk_first(self):
        analyzer, vocab = morph_fixture()
        gold = [MorphAnalysis(root="kalem", pos="Noun",
                              morph_tags=("A3sg", "Acc")),
                MorphAnalysis(root="al", pos="Verb", morph_tags=("Imp", "A2sg"))]
        sent = tasks.prepare_morph_sentence(["kalemi", "al"], gold,
                                            analyzer, vocab)
        renders, tokens = tasks.build_morph_vocabularies([sent])
        assert renders[0] == tasks.UNK_TOKEN and tokens[0] == tasks.UNK_TOKEN
        assert list(renders[1:]) == sorted(renders[1:])
        assert "kale+Noun+P3sg+Acc" in renders  # losing candidates included
        assert {"Noun", "Verb", "Imp", "A2sg", "Acc"} <= set(tokens)


class TestDisambiguator:
    def build(self, seed=0):
        analyzer, vocab = morph_fixture()
        gold_a = [MorphAnalysis(root="kalem", pos="Noun",
                                morph_tags=("A3sg", "Acc")),
                  MorphAnalysis(root="al", pos="Verb",
                                morph_tags=("Imp", "A2sg"))]
        gold_b = [MorphAnalysis(root="al", pos="Adj"),
                  MorphAnalysis(root="tek", pos="Adj")]
        sents = [tasks.prepare_morph_sentence(["kalemi", "al"], gold_a,
                                              analyzer, vocab),
                 tasks.prepare_morph_sentence(["al", "tek"], gold_b,
                                              analyzer, vocab)]
        renders, tokens = tasks.build_morph_vocabularies(sents)
        model = tasks.init_morph_model(
            vocab.size, renders, tokens, seed=seed,
            context_config=small_config(vocab.size, len(renders)),
            tag_token_embed_dim=4, candidate_hidden=6)
        return analyzer, vocab, sents, model

    def test_vocab_checks(self):
        with pytest.raises(DataError):
            tasks.init_morph_model(5, ["a"], [tasks.UNK_TOKEN])
        with pytest.raises(DataError):
            tasks.init_morph_model(5, [tasks.UNK_TOKEN, "a", "a"],
                                   [tasks.UNK_TOKEN])

    def test_candidate_scores_shape(self):
        analyzer, vocab, sents, model = self.build()
        cands = sents[0].candidates[0]
        scores = tasks.candidate_scores(model, sents[0].subword_ids, 0, [],
                                        cands)
        assert scores.data.shape == (len(cands),)
        with pytest.raises(InputError):
            tasks.candidate_scores(model, sents[0].subword_ids, 0, [], [])

    def test_output_is_always_a_candidate(self):
        analyzer, vocab, sents, model = self.build(seed=5)
        words = ["kalemi", "al", "uzun", "tek"]
        out = tasks.disambiguate(model, words, analyzer, vocab)
        for word, pick in zip(words, out):
            assert pick.render() in {a.render()
                                     for a in tasks.analyze_word(analyzer, word)}

    def test_single_candidate_forced(self):
        analyzer, vocab, _, model = self.build(seed=9)
        out = tasks.disambiguate(model, ["uzun", "yok"], analyzer, vocab)
        assert out[0].render() == "uzun+Adj"
        assert out[1].render() == "yok+Unknown"  # fallback for unknown word

    def test_train_resolves_ambiguity(self):
        analyzer, vocab, sents, model = self.build(seed=1)
        adam = AdamState.for_params(model.params.tensors())
        tc = TrainConfig(learning_rate=2e-2, epoch_decay=1.0)
        losses = [tasks.train_morph_epoch(model, sents, tc, adam, e)
                  for e in range(120)]
        assert losses[-1] < losses[0]
        got = tasks.disambiguate(model, ["kalemi", "al"], analyzer, vocab)
        assert [a.render() for a in got] == ["kalem+Noun+A3sg+Acc",
                                            "al+Verb+Imp+A2sg"]
        assert tasks.stem(model, ["kalemi", "al"], analyzer, vocab) == \
            ["kalem", "al"]
        got_b = tasks.disambiguate(model, ["al", "tek"], analyzer, vocab)
        assert got_b[0].render() == "al+Adj"

    def test_empty_corpus(self):
        _, _, _, model = self.build()
        adam = AdamState.for_params(model.params.tensors())
        with pytest.raises(InputError):
            tasks.train_morph_epoch(model, [], TrainConfig(), adam, 0)

    def test_roundtrip(self, tmp_path):
        analyzer, vocab, sents, model = self.build(seed=2)
        tasks.save_morph_model(tmp_path / "m", model)
        back = tasks.load_morph_model(tmp_path / "m")
        assert back.analysis_vocab == model.analysis_vocab
        assert back.token_vocab == model.token_vocab
        assert back.config == model.config
        words = ["kalemi", "al", "tek"]
        assert [a.render() for a in
                tasks.disambiguate(back, words, analyzer, vocab)] == \
            [a.render() for a in
             tasks.disambiguate(model, words, analyzer, vocab)]


DEP_LABELS = ("nsubj", "obj", "root")


def dep_fixture():
    texts = [(["ali", "eve", "gitti"], [3, 3, 0], ["nsubj", "obj", "root"]),
             (["kedi", "uyudu"], [2, 0], ["nsubj", "root"])]
    vocab = char_vocab(*(w for ws, _, _ in texts for w in ws))
    parser = tasks.init_dep_parser(
        vocab.size, DEP_LABELS, seed=0, max_sentence_len=8,
        context_config=small_config(vocab.size, 8 + 1 + len(DEP_LABELS)))
    corpus = [tasks.prepare_dep_sentence(w, h, r, vocab, DEP_LABELS, 8)
              for w, h, r in texts]
    return texts, vocab, parser, corpus


class TestDepConfig:
    def test_arc_validation(self):
        with pytest.raises(DataError):
            DepArc(head=-1, label=0)
        with pytest.raises(DataError):
            DepArc(head=0, label=-1)

    def test_config_validation(self):
        ctx = small_config(5, 12)  # 8 + 1 + 3
        cfg = DepParserConfig(context=ctx, num_labels=3, max_sentence_len=8)
        assert cfg.arc_positions == 9 and cfg.head_dim == 12
        with pytest.raises(ConfigError):
            DepParserConfig(context=ctx, num_labels=0, max_sentence_len=8)
        with pytest.raises(ConfigError):
            DepParserConfig(context=ctx, num_labels=3, max_sentence_len=9)

    def test_init_label_checks(self):
        with pytest.raises(ConfigError):
            tasks.init_dep_parser(5, [])
        with pytest.raises(ConfigError):
            tasks.init_dep_parser(5, ["a", "a"])


class TestDepData:
    def test_prepare_errors(self):
        _, vocab, _, _ = dep_fixture()
        with pytest.raises(DataError):  # misaligned
            tasks.prepare_dep_sentence(["a", "b"], [0], ["root"],
                                       vocab, DEP_LABELS, 8)
        with pytest.raises(DataError):  # over capacity
            tasks.prepare_dep_sentence(["a"] * 9, [0] * 9, ["root"] * 9,
                                       vocab, DEP_LABELS, 8)
        with pytest.raises(DataError):  # head out of range
            tasks.prepare_dep_sentence(["a", "b"], [3, 0], ["obj", "root"],
                                       vocab, DEP_LABELS, 8)
        with pytest.raises(DataError):  # self loop
            tasks.prepare_dep_sentence(["a", "b"], [1, 0], ["obj", "root"],
                                       vocab, DEP_LABELS, 8)
        with pytest.raises(DataError):  # unknown relation
            tasks.prepare_dep_sentence(["a", "b"], [2, 0], ["amod", "root"],
                                       vocab, DEP_LABELS, 8)

    def test_sentence_alignment(self):
        with pytest.raises(DataError):
            DepSentence(words=["a"], subword_ids=[[1], [2]],
                        arcs=[DepArc(0, 0)])


class TestDepDecode:
    def test_single_word_head_is_root(self):
        _, vocab, parser, _ = dep_fixture()
        arcs = tasks.parse_dependencies(parser, ["ali"], vocab)
        assert len(arcs) == 1
        assert arcs[0].head == 0
        assert 0 <= arcs[0].label < len(DEP_LABELS)

    def test_never_self_headed_and_in_range(self):
        _, vocab, parser, _ = dep_fixture()
        rng = np.random.default_rng(7)
        pool = ["ali", "eve", "gitti", "kedi", "uyudu"]
        for _ in range(10):
            words = [pool[int(i)] for i in
                     rng.integers(0, len(pool), size=int(rng.integers(1, 9)))]
            arcs = tasks.parse_dependencies(parser, words, vocab)
            assert len(arcs) == len(words)
            for j, arc in enumerate(arcs):
                assert 0 <= arc.head <= len(words)
                assert arc.head != j + 1

    def test_capacity_checked_at_decode(self):
        _, vocab, parser, _ = dep_fixture()
        with pytest.raises(InputError):
            tasks.parse_dependencies(parser, ["ali"] * 9, vocab)

    def test_history_offsets_clip(self):
        _, vocab, parser, _ = dep_fixture()
        sentence = [[1]] * 2
        far = [DepArc(head=OFFSET_CLIP + 1 + 30, label=0)]
        edge = [DepArc(head=OFFSET_CLIP + 1 + 1, label=0)]
        np.testing.assert_array_equal(
            tasks.dep_logits(parser, sentence, 1, far).data,
            tasks.dep_logits(parser, sentence, 1, edge).data)
        distinct = [DepArc(head=OFFSET_CLIP + 1, label=0)]  # offset exactly +8
        assert not np.array_equal(
            tasks.dep_logits(parser, sentence, 1, distinct).data,
            tasks.dep_logits(parser, sentence, 1,
                             [DepArc(head=1, label=0)]).data)


class TestDepTraining:
    def test_zero_head_gives_ln2(self):
        _, vocab, parser, corpus = dep_fixture()
        parser.params.context.head.W.data[...] = 0.0
        parser.params.context.head.b.data[...] = 0.0
        logits = tasks.dep_logits(parser, corpus[0].subword_ids, 0, [])
        from turknlp.nn import autograd as ag
        probs = ag.sigmoid(logits)
        target = np.zeros(parser.config.head_dim)
        target[corpus[0].arcs[0].head] = 1.0
        loss, _ = nc.binary_cross_entropy(probs, target)
        assert float(loss.data) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_guards(self):
        _, vocab, parser, corpus = dep_fixture()
        adam = AdamState.for_params(parser.params.tensors())
        with pytest.raises(InputError):
            tasks.train_dep_epoch(parser, [], TrainConfig(), adam, 0)
        bad = DepSentence(words=["a"], subword_ids=[[1]],
                          arcs=[DepArc(head=5, label=0)])
        with pytest.raises(DataError):
            tasks.train_dep_epoch(parser, [bad], TrainConfig(), adam, 0)
        long = DepSentence(words=["a"] * 9, subword_ids=[[1]] * 9,
                           arcs=[DepArc(0, 0)] * 9)
        with pytest.raises(DataError):
            tasks.train_dep_epoch(parser, [long], TrainConfig(), adam, 0)

    def test_overfit_and_roundtrip(self, tmp_path):
        texts, vocab, parser, corpus = dep_fixture()
        adam = AdamState.for_params(parser.params.tensors())
        tc = TrainConfig(learning_rate=3e-2, epoch_decay=1.0)
        losses = [tasks.train_dep_epoch(parser, corpus, tc, adam, e)
                  for e in range(200)]
        assert losses[-1] < losses[0]
        for words, heads, rels in texts:
            arcs = tasks.parse_dependencies(parser, words, vocab)
            assert [a.head for a in arcs] == heads
            assert [DEP_LABELS[a.label] for a in arcs] == list(rels)
        tasks.save_dep_parser(tmp_path / "m", parser)
        back = tasks.load_dep_parser(tmp_path / "m")
        assert back.label_names == DEP_LABELS
        assert back.config == parser.config
        for words, _, _ in texts:
            assert tasks.parse_dependencies(back, words, vocab) == \
                tasks.parse_dependencies(parser, words, vocab)
        with pytest.raises(DataError):
            tasks.load_tagger(tmp_path / "m", tasks.KIND_NER)
