import numpy as np
import pytest

from turknlp import context as cm
from turknlp.errors import ConfigError, DataError, InputError
from turknlp.nn import AdamState, TrainConfig
from turknlp.nn import autograd as ag
from turknlp.nn import core as nc
from turknlp.nn.autograd import Tensor, no_grad

TINY = cm.ContextModelConfig(vocab_size=7, num_tags=3, subword_embed_dim=2,
                             word_rnn_hidden=3, left_ctx_hidden=2,
                             right_ctx_hidden=2, tag_embed_dim=2,
                             tag_rnn_hidden=2, fc1_units=3, fc2_units=2,
                             max_left_words=4, max_right_words=4)


def sig(x):
    return 1.0 / (1.0 + np.exp(-x))


def manual_gru(p, h, x):
    z = sig(p.W_z.data @ x + p.U_z.data @ h + p.b_z.data)
    r = sig(p.W_r.data @ x + p.U_r.data @ h + p.b_r.data)
    cand = np.tanh(p.W_h.data @ x + p.U_h.data @ (r * h) + p.b_h.data)
    return (1.0 - z) * h + z * cand


def manual_word(params, ids):
    h = np.zeros(params.word_rnn.hidden_size)
    for pid in ids:
        h = manual_gru(params.word_rnn, h, params.subword_embedding.data[pid])
    return h


def manual_logits(params, config, sentence, position, left_tags):
    """Independent numpy walk of the whole forward pass."""
    vecs = [manual_word(params, ids) for ids in sentence]
    cur = vecs[position]
    left = np.zeros(config.left_ctx_hidden)
    for v in vecs[max(0, position - config.max_left_words):position]:
        left = manual_gru(params.left_ctx_rnn, left, v)
    right = np.zeros(config.right_ctx_hidden)
    hi = min(len(sentence), position + 1 + config.max_right_words)
    for v in reversed(vecs[position + 1:hi]):
        right = manual_gru(params.right_ctx_rnn, right, v)
    tagctx = np.zeros(config.tag_rnn_hidden)
    for tid in list(left_tags)[-config.max_left_words:]:
        tagctx = manual_gru(params.tag_rnn, tagctx,
                            params.tag_embedding.data[tid])
    fused = np.concatenate([cur, left, right, tagctx])
    h1 = np.tanh(params.fc1.W.data @ fused + params.fc1.b.data)
    h2 = np.tanh(params.fc2.W.data @ h1 + params.fc2.b.data)
    return params.head.W.data @ h2 + params.head.b.data


def scramble(params, rng):
    for _, t in params.named_tensors():
        t.data[...] = rng.uniform(-1.0, 1.0, size=t.shape)


def random_sentence(rng, config, max_len=8):
    n = int(rng.integers(1, max_len + 1))
    return [[int(p) for p in rng.integers(0, config.vocab_size,
                                          size=int(rng.integers(1, 4)))]
            for _ in range(n)]


class TestForward:
    def test_matches_manual_walk(self):
        rng = np.random.default_rng(61)
        params = cm.init_context_model(TINY, seed=0)
        scramble(params, rng)
        for _ in range(15):
            sentence = random_sentence(rng, TINY)
            pos = int(rng.integers(0, len(sentence)))
            tags = [int(t) for t in rng.integers(0, TINY.num_tags, size=pos)]
            got = cm.forward_word(params, TINY, sentence, pos, tags)
            want = manual_logits(params, TINY, sentence, pos, tags)
            np.testing.assert_allclose(got.data, want, rtol=1e-10, atol=1e-12)

    def test_position_out_of_range(self):
        params = cm.init_context_model(TINY)
        with pytest.raises(InputError):
            cm.forward_word(params, TINY, [[1]], 1, [])

    def test_empty_word_rejected(self):
        params = cm.init_context_model(TINY)
        with pytest.raises(InputError):
            cm.word_vector(params, [])

    def test_tag_history_window_trimmed(self):
        rng = np.random.default_rng(62)
        params = cm.init_context_model(TINY, seed=1)
        scramble(params, rng)
        sentence = random_sentence(rng, TINY, max_len=6)
        pos = len(sentence) - 1
        long_history = [int(t) for t in rng.integers(0, TINY.num_tags, size=12)]
        full = cm.forward_word(params, TINY, sentence, pos, long_history)
        trimmed = cm.forward_word(params, TINY, sentence, pos,
                                  long_history[-TINY.max_left_words:])
        np.testing.assert_array_equal(full.data, trimmed.data)

    def test_context_vector_from_history_equivalence(self):
        rng = np.random.default_rng(63)
        params = cm.init_context_model(TINY, seed=2)
        scramble(params, rng)
        sentence = random_sentence(rng, TINY, max_len=5)
        pos = len(sentence) - 1
        tags = [int(t) for t in rng.integers(0, TINY.num_tags, size=pos)]
        with no_grad():
            via_ids = cm.context_vector(params, TINY, sentence, pos, tags)
            rows = [ag.take_row(params.tag_embedding, t) for t in tags]
            via_vecs = cm.context_vector_from_history(params, TINY, sentence,
                                                      pos, rows)
        np.testing.assert_array_equal(via_ids.data, via_vecs.data)


class TestDecode:
    def test_alignment(self):
        rng = np.random.default_rng(64)
        params = cm.init_context_model(TINY, seed=3)
        for _ in range(30):
            sentence = random_sentence(rng, TINY, max_len=10)
            tags = cm.tag_sentence(params, TINY, sentence)
            assert len(tags) == len(sentence)
            assert all(0 <= t < TINY.num_tags for t in tags)

    def test_empty_sentence_rejected(self):
        params = cm.init_context_model(TINY)
        with pytest.raises(InputError):
            cm.tag_sentence(params, TINY, [])

    def test_incremental_equals_windowed_fold(self):
        # same model, sentence short enough for the fast path; the windowed
        # fold arithmetic must produce the exact same greedy decode
        rng = np.random.default_rng(65)
        params = cm.init_context_model(TINY, seed=4)
        scramble(params, rng)
        for _ in range(10):
            sentence = random_sentence(rng, TINY, max_len=4)
            fast = cm.tag_sentence(params, TINY, sentence)
            slow = []
            for i in range(len(sentence)):
                logits = manual_logits(params, TINY, sentence, i, slow)
                slow.append(int(np.argmax(logits)))
            assert fast == slow

    def test_tag_flip_cannot_reach_earlier_positions(self):
        rng = np.random.default_rng(66)
        params = cm.init_context_model(TINY, seed=5)
        scramble(params, rng)
        for _ in range(10):
            sentence = random_sentence(rng, TINY, max_len=6)
            n = len(sentence)
            tags = [int(t) for t in rng.integers(0, TINY.num_tags, size=n)]
            base = [cm.forward_word(params, TINY, sentence, i, tags[:i]).data
                    for i in range(n)]
            k = int(rng.integers(0, n))
            flipped = list(tags)
            for j in range(k, n):
                flipped[j] = (flipped[j] + 1) % TINY.num_tags
            for i in range(k + 1):
                redo = cm.forward_word(params, TINY, sentence, i, flipped[:i])
                if i <= k:
                    np.testing.assert_array_equal(redo.data, base[i])


class TestTraining:
    def build_corpus(self, rng, n=3):
        corpus = []
        for _ in range(n):
            sentence = random_sentence(rng, TINY, max_len=4)
            tags = [int(t) for t in rng.integers(0, TINY.num_tags,
                                                 size=len(sentence))]
            corpus.append(cm.TaggedSentence(
                words=[f"w{i}" for i in range(len(sentence))],
                subword_ids=sentence, tags=tags))
        return corpus

    def test_loss_drops_and_is_deterministic(self):
        rng = np.random.default_rng(67)
        corpus = self.build_corpus(rng)
        losses = []
        for _ in range(2):
            params = cm.init_context_model(TINY, seed=6)
            adam = AdamState.for_params(params.tensors())
            tc = TrainConfig(learning_rate=5e-3, epochs=8)
            run = [cm.train_epoch(params, TINY, corpus, tc, adam, e)
                   for e in range(8)]
            losses.append(run)
        assert losses[0] == losses[1]
        assert losses[0][-1] < losses[0][0]

    def test_tag_range_checked(self):
        corpus = [cm.TaggedSentence(words=["a"], subword_ids=[[1]], tags=[7])]
        params = cm.init_context_model(TINY)
        adam = AdamState.for_params(params.tensors())
        with pytest.raises(DataError):
            cm.train_epoch(params, TINY, corpus, TrainConfig(), adam, 0)

    def test_empty_corpus(self):
        params = cm.init_context_model(TINY)
        adam = AdamState.for_params(params.tensors())
        with pytest.raises(InputError):
            cm.train_epoch(params, TINY, [], TrainConfig(), adam, 0)

    def test_alignment_validated(self):
        with pytest.raises(DataError):
            cm.TaggedSentence(words=["a"], subword_ids=[[1], [2]], tags=[0])


class TestGradcheck:
    def test_summed_loss_gradient(self):
        # seed picked so no coordinate lands near zero gradient, where the
        # relative-error floor would let finite-difference noise dominate
        rng = np.random.default_rng(2)
        params = cm.init_context_model(TINY, seed=7)
        scramble(params, rng)
        sentence = [[1, 2], [3], [4, 5]]
        gold = [0, 2, 1]
        tensors = params.tensors()

        def loss(_):
            total = None
            for i in range(len(sentence)):
                logits = cm.forward_word(params, TINY, sentence, i, gold[:i])
                term, _g = nc.softmax_cross_entropy(logits, gold[i])
                total = term if total is None else ag.add(total, term)
            return total

        assert nc.gradient_check(loss, tensors) < 1e-4


class TestPersistence:
    def test_roundtrip_bitwise_predictions(self, tmp_path):
        rng = np.random.default_rng(69)
        params = cm.init_context_model(TINY, seed=8)
        scramble(params, rng)
        cm.save_context_model(tmp_path / "m", params, TINY,
                              labels=["A", "B", "C"])
        loaded, config, labels, _raw, _tensors = cm.load_context_model(tmp_path / "m")
        assert labels == ["A", "B", "C"]
        assert config == TINY
        sentence = random_sentence(rng, TINY, max_len=6)
        assert cm.tag_sentence(params, TINY, sentence) == \
            cm.tag_sentence(loaded, config, sentence)

    def test_float32_quantization_applied_before_compare(self, tmp_path):
        # saved weights are float32; loading twice is idempotent
        params = cm.init_context_model(TINY, seed=9)
        cm.save_context_model(tmp_path / "m1", params, TINY)
        first, _, _, _, _ = cm.load_context_model(tmp_path / "m1")
        cm.save_context_model(tmp_path / "m2", first, TINY)
        second, _, _, _, _ = cm.load_context_model(tmp_path / "m2")
        for (_, a), (_, b) in zip(first.named_tensors(), second.named_tensors()):
            np.testing.assert_array_equal(a.data, b.data)

    def test_wrong_kind_rejected(self, tmp_path):
        params = cm.init_context_model(TINY)
        cm.save_context_model(tmp_path / "m", params, TINY, kind="ner")
        with pytest.raises(DataError):
            cm.load_context_model(tmp_path / "m", expected_kind="pos")

    def test_config_from_dict_missing_field(self):
        with pytest.raises(DataError):
            cm.config_from_dict({"vocab_size": "5"})


class TestConfig:
    def test_positive_fields_enforced(self):
        with pytest.raises(ConfigError):
            cm.ContextModelConfig(vocab_size=0, num_tags=3)

    def test_concat_dim(self):
        assert TINY.concat_dim == 3 + 2 + 2 + 2
