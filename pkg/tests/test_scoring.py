import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from minpair.errors import BackendFailure, EmptyCorpus, EmptyTarget
from minpair.ngram import BOS, UNK, NgramBackend, train_ngram
from minpair.scoring import (
    EOS,
    ScoreRequest,
    TableBackend,
    TokenLogProbs,
    conditional_score,
    make_request_id,
    sequence_score,
    write_score_table,
)

logprob_lists = st.lists(
    st.floats(min_value=-50.0, max_value=0.0, allow_nan=False), min_size=1, max_size=20
)


class TestTokenLogProbs:
    def test_rejects_positive(self):
        with pytest.raises(ValueError):
            TokenLogProbs(logprobs=(0.1,))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TokenLogProbs(logprobs=(float("-inf"),))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TokenLogProbs(logprobs=())


class TestSequenceScore:
    def test_hand_sum(self):
        assert sequence_score(TokenLogProbs(logprobs=(-0.5, -1.5))) == -2.0

    def test_certain_token(self):
        assert sequence_score(TokenLogProbs(logprobs=(0.0,))) == 0.0

    @given(logprob_lists)
    def test_never_positive(self, values):
        assert sequence_score(TokenLogProbs(logprobs=tuple(values))) <= 0

    @given(logprob_lists, logprob_lists)
    def test_linearity_over_concatenation(self, a, b):
        whole = sequence_score(TokenLogProbs(logprobs=tuple(a + b)))
        parts = (sequence_score(TokenLogProbs(logprobs=tuple(a)))
                 + sequence_score(TokenLogProbs(logprobs=tuple(b))))
        assert whole == pytest.approx(parts, abs=1e-12)


@pytest.fixture
def table_backend(tmp_path):
    write_score_table([
        ("p:1", "correct", [-0.5, -1.5]),          # target: one token + EOS
        ("p:2", "correct", [-1.0, -2.0, -3.0]),    # two tokens + EOS
    ], tmp_path / "scores.tsv")
    return TableBackend(tmp_path / "scores.tsv")


class TestConditionalScore:
    def test_hand_mean(self, table_backend):
        score = conditional_score(table_backend, "src", "Hallo",
                                  make_request_id("p:1", "correct"))
        assert score == pytest.approx(-1.0, abs=1e-9)

    def test_determinism(self, table_backend):
        args = (table_backend, "src", "Hallo Welt", make_request_id("p:2", "correct"))
        assert conditional_score(*args) == conditional_score(*args)

    def test_empty_target(self, table_backend):
        with pytest.raises(EmptyTarget):
            conditional_score(table_backend, "src", "   ", "p:1#correct")

    def test_missing_entry(self, table_backend):
        with pytest.raises(BackendFailure):
            conditional_score(table_backend, "src", "Hallo", "nope#correct")

    def test_wrong_position_count(self, table_backend):
        with pytest.raises(BackendFailure):
            conditional_score(table_backend, "src", "drei kleine Worte hier",
                              make_request_id("p:1", "correct"))

    def test_padding_with_zero_scales_by_k_over_k_plus_1(self, tmp_path):
        write_score_table([
            ("a", "v", [-1.0, -2.0, -3.0]),
            ("b", "v", [-1.0, -2.0, -3.0, 0.0]),
        ], tmp_path / "t.tsv")
        backend = TableBackend(tmp_path / "t.tsv")
        short = conditional_score(backend, "s", "x y", "a#v")
        padded = conditional_score(backend, "s", "x y z", "b#v")
        assert padded == pytest.approx(short * 3 / 4, abs=1e-12)


class TestNgram:
    def test_add_one_hand_computation(self):
        model = train_ngram(["a b"], order=2, k=1.0)
        # vocab {a, b} + UNK + EOS = 4; p(b|a) = (1+1)/(1+4)
        assert model.logprob("b", ("a",)) == pytest.approx(math.log(0.4), abs=1e-12)

    def test_unseen_continuation(self):
        model = train_ngram(["a b"], order=2, k=1.0)
        assert model.logprob("a", ("a",)) == pytest.approx(math.log(0.2), abs=1e-12)

    def test_distributions_sum_to_one(self):
        model = train_ngram(["a b", "a a b", "b a"], order=2, k=0.5)
        vocab = sorted(model.vocab_) + [UNK, EOS]
        for history in [("a",), ("b",), (BOS,), ("zzz",)]:
            total = sum(math.exp(model.logprob(w, history)) for w in vocab)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_no_minus_infinity(self):
        model = train_ngram(["a b"], order=2, k=1.0)
        lp = model.token_logprobs(ScoreRequest("x#v", "src", ("völlig", "unbekannt")))
        assert all(math.isfinite(v) for v in lp.logprobs)
        worst_total = max(model.totals_.values())
        bound = math.log(model.k / (worst_total + model.k * model.vocab_size_))
        assert all(v >= bound - 1e-12 for v in lp.logprobs)

    def test_positions_include_eos(self):
        model = train_ngram(["a b"], order=2)
        lp = model.token_logprobs(ScoreRequest("x#v", "src", ("a", "b")))
        assert len(lp) == 3

    def test_ignores_source(self):
        model = train_ngram(["a b"], order=2)
        s1 = conditional_score(model, "source one", "a b", "x#v")
        s2 = conditional_score(model, "completely different", "a b", "x#v")
        assert s1 == s2

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            train_ngram([])

    def test_estimator_params(self):
        assert NgramBackend(order=3, k=0.1).get_params()["order"] == 3

    def test_trigram_scores(self):
        model = train_ngram(["a b c", "a b d"], order=3, k=1.0)
        # history (a, b): counts c=1, d=1, total 2; V = 4 tokens + 2
        assert model.logprob("c", ("a", "b")) == pytest.approx(
            math.log(2 / (2 + 6)), abs=1e-12)
