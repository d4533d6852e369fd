import io
import math

import pytest

from touchdecode.keyboard import CHAR_VOCAB
from touchdecode.ngram import (
    EOS,
    SOS,
    UNK,
    ArpaFormatError,
    NgramModel,
    char_to_token,
    char_tokens,
    parse_arpa,
    score,
    train,
    train_char_lm,
    train_word_lm,
    write_arpa,
)

# Five-sentence toy corpus used for all hand-computed values below.
TOY = [["a", "b"], ["a", "b"], ["a", "c"], ["b", "a"], ["c", "a"]]
# Hand-computed Witten-Bell quantities for TOY at order 2:
#   unigram counts a=5 b=3 c=2 </s>=5, total=15, types=4, lambda1=15/19
#   vocab = {a,b,c,</s>,<unk>}, uniform = 1/5
P1 = {
    "a": (15 / 19) * (5 / 15) + (4 / 19) * 0.2,
    "b": (15 / 19) * (3 / 15) + (4 / 19) * 0.2,
    "c": (15 / 19) * (2 / 15) + (4 / 19) * 0.2,
    EOS: (15 / 19) * (5 / 15) + (4 / 19) * 0.2,
    UNK: (4 / 19) * 0.2,
}


@pytest.fixture(scope="module")
def toy_model():
    return train(TOY, order=2)


class TestTrain:
    def test_unigram_counts_proportional(self):
        # "ab ab ab" as characters: equal counts for a and b
        model = train([char_tokens("ab ab ab")], order=1)
        pa = 10 ** score(model, [], "a")
        pb = 10 ** score(model, [], "b")
        assert pa == pytest.approx(pb, rel=1e-12)
        assert pa > 10 ** score(model, [], char_to_token(" "))

    def test_bigram_dominance(self):
        model = train([list("abab")], order=2)
        pba = 10 ** score(model, ["a"], "b")
        paa = 10 ** score(model, ["a"], "a")
        assert pba > 0.5 and pba > paa

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty corpus"):
            train([], order=2)

    def test_unknown_smoothing_rejected(self):
        with pytest.raises(ValueError, match="smoothing"):
            train(TOY, order=2, smoothing="kneser-ney")

    def test_hand_computed_unigrams(self, toy_model):
        for tok, want in P1.items():
            assert 10 ** score(toy_model, [], tok) == pytest.approx(want, rel=1e-12)

    def test_hand_computed_observed_bigram(self, toy_model):
        # context a: total 5, types 3 -> lambda 5/8
        want = (5 / 8) * (2 / 5) + (3 / 8) * P1["b"]
        assert 10 ** score(toy_model, ["a"], "b") == pytest.approx(want, rel=1e-12)

    def test_hand_computed_backoff_chain(self, toy_model):
        # (b, c) unseen; bow(b) = types/(total+types) = 2/5
        want = (2 / 5) * P1["c"]
        assert 10 ** score(toy_model, ["b"], "c") == pytest.approx(want, rel=1e-12)

    def test_normalization_sweep_all_observed_contexts(self, toy_model):
        contexts = [()] + [g[:-1] for g in toy_model.probs if len(g) == 2]
        for ctx in set(contexts):
            total = sum(10 ** score(toy_model, list(ctx), w) for w in toy_model.vocab)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_normalization_sweep_deep_char_model(self):
        lines = ["the cat sat", "the dog ran off", "a cat and dog", "dogs ran fast 2 times"]
        model = train_char_lm(lines, order=4)
        contexts = {g[:-1] for g in model.probs if len(g) >= 2}
        for ctx in sorted(contexts)[:200]:
            total = sum(10 ** score(model, list(ctx), w) for w in model.vocab)
            assert total == pytest.approx(1.0, abs=1e-6)


class TestScore:
    def test_full_ngram_is_table_value(self, toy_model):
        assert score(toy_model, ["a"], "b") == toy_model.probs[("a", "b")]

    def test_empty_context_order1(self):
        model = train(TOY, order=1)
        assert score(model, [], "a") == model.probs[("a",)]

    def test_unknown_tokens_map_to_unk(self, toy_model):
        assert score(toy_model, [], "zzz") == toy_model.probs[(UNK,)]
        # unknown context token backs the query off but stays finite
        assert math.isfinite(score(toy_model, ["zzz"], "a"))

    def test_total_function_finite_everywhere(self, toy_model):
        import itertools
        toks = ["a", "b", "c", EOS, UNK, "q", SOS]
        for ctx_len in range(3):
            for parts in itertools.product(toks, repeat=ctx_len + 1):
                s = score(toy_model, list(parts[:-1]), parts[-1])
                assert math.isfinite(s)

    def test_long_context_truncated_to_order(self, toy_model):
        long_ctx = ["c", "b", "c", "a"]
        assert score(toy_model, long_ctx, "b") == score(toy_model, ["a"], "b")

    def test_removing_entry_only_affects_traversing_queries(self, toy_model):
        probs = dict(toy_model.probs)
        del probs[("a", "b")]
        pruned = NgramModel(order=2, probs=probs, backoffs=dict(toy_model.backoffs),
                            vocab=toy_model.vocab)
        changed = [(ctx, w)
                   for ctx in [(), ("a",), ("b",), ("c",), (SOS,)]
                   for w in sorted(toy_model.vocab)
                   if score(toy_model, list(ctx), w) != score(pruned, list(ctx), w)]
        assert changed == [(("a",), "b")]


class TestCharWordLms:
    def test_every_keyboard_char_scoreable(self):
        model = train_char_lm(["hello there", "nice to meet you"])
        for ch in CHAR_VOCAB:
            assert math.isfinite(score(model, char_tokens("hello "), char_to_token(ch)))

    def test_char_filtering_drops_foreign_chars(self):
        assert char_tokens("héllo!") == ["h", "l", "l", "o"]
        assert char_tokens("A B") == ["a", char_to_token(" "), "b"]

    def test_word_vocab_truncation(self):
        lines = ["apple apple apple banana banana cherry"] * 2
        model = train_word_lm(lines, order=2, vocab_size=2)
        assert 10 ** score(model, [], "cherry") == 10 ** score(model, [], UNK)
        assert 10 ** score(model, [], "apple") > 10 ** score(model, [], UNK)


class TestArpa:
    def test_minimal_unigram_file(self):
        text = """\\data\\
ngram 1=3

\\1-grams:
-1.0 a
-0.5 b
-0.9 </s>

\\end\\
"""
        model = parse_arpa(io.StringIO(text))
        assert model.order == 1
        assert len([g for g in model.probs if len(g) == 1]) == 3
        assert score(model, [], "b") == -0.5

    def test_round_trip_scores_bit_exact(self, toy_model):
        buf = io.StringIO()
        write_arpa(toy_model, buf)
        again = parse_arpa(io.StringIO(buf.getvalue()))
        import random
        rng = random.Random(99)
        toks = sorted(toy_model.vocab) + [SOS, "weird"]
        for _ in range(1000):
            ctx = [rng.choice(toks) for _ in range(rng.randrange(0, 3))]
            tok = rng.choice(toks)
            assert score(again, ctx, tok) == score(toy_model, ctx, tok)

    def test_write_parse_write_idempotent(self, toy_model):
        buf1 = io.StringIO()
        write_arpa(toy_model, buf1)
        buf2 = io.StringIO()
        write_arpa(parse_arpa(io.StringIO(buf1.getvalue())), buf2)
        assert buf1.getvalue() == buf2.getvalue()

    def test_count_mismatch_detected(self):
        text = """\\data\\
ngram 1=2
ngram 2=5

\\1-grams:
-1.0 a -0.1
-0.5 b -0.2

\\2-grams:
-0.2 a b
-0.3 b a
-0.4 a a
-0.6 b b

\\end\\
"""
        with pytest.raises(ArpaFormatError, match="count mismatch for 2-grams"):
            parse_arpa(io.StringIO(text))

    def test_malformed_line_reports_line_number(self):
        text = """\\data\\
ngram 1=1

\\1-grams:
not a number here at all

\\end\\
"""
        with pytest.raises(ArpaFormatError, match="line 5"):
            parse_arpa(io.StringIO(text))

    def test_missing_end_detected(self):
        text = """\\data\\
ngram 1=1

\\1-grams:
-1.0 a
"""
        with pytest.raises(ArpaFormatError, match="end"):
            parse_arpa(io.StringIO(text))

    def test_missing_data_detected(self):
        with pytest.raises(ArpaFormatError, match="data"):
            parse_arpa(io.StringIO("\\1-grams:\n-1.0 a\n\\end\\\n"))

    def test_backoff_context_must_have_entry(self):
        with pytest.raises(ValueError, match="no n-gram entry"):
            NgramModel(order=2, probs={("a",): -0.5}, backoffs={("b",): -0.1},
                       vocab=frozenset(["a"]))
