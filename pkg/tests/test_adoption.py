import math
import random

import pytest

from tokex import (
    Corpus,
    ExtensionConfig,
    NGramOracle,
    Preference,
    Tokenizer,
    TrainingConfig,
    UniformOracle,
    ValidationError,
    adoption_scan,
    extend,
    frequency_sorted_candidates,
    train,
    word_preference,
)

from .oracles import NewTokenBoostOracle, NewTokenVetoOracle

BYTES_VOCAB = {bytes([b]): b for b in range(256)}


def simple_pair() -> tuple[Tokenizer, Tokenizer]:
    base = Tokenizer(BYTES_VOCAB, [])
    ext, report = extend(base, [b"ab", b"abc", b"cd"], ExtensionConfig(3))
    assert report.achieved == 3
    return base, ext


def test_identical_when_no_new_token_applies():
    base, ext = simple_pair()
    oracle = UniformOracle(ext.vocab_size)
    assert word_preference(oracle, ext, base, [], "xyz") is Preference.IDENTICAL


def test_uniform_oracle_prefers_shorter_sequence():
    base, ext = simple_pair()
    oracle = UniformOracle(ext.vocab_size)
    # "ab": new [ab] (1 step) vs old [a, b] (2 steps); log p < 0 so shorter wins
    assert word_preference(oracle, ext, base, [], "ab") is Preference.NEW


def test_veto_oracle_always_prefers_old():
    base, ext = simple_pair()
    oracle = NewTokenVetoOracle(base.vocab_size)
    assert word_preference(oracle, ext, base, [], "ab") is Preference.OLD
    assert word_preference(oracle, ext, base, [], "abc") is Preference.OLD


def test_ties_go_to_old():
    base, ext = simple_pair()

    class Flat:
        def log_prob(self, context, token):
            return 0.0  # every sequence scores 0 regardless of length

    assert word_preference(Flat(), ext, base, [], "ab") is Preference.OLD


def test_word_spanning_chunks_rejected():
    base, ext = simple_pair()
    with pytest.raises(ValidationError, match="chunk"):
        word_preference(UniformOracle(ext.vocab_size), ext, base, [], "a b")


# ------------------------------------------------------------------ n-gram


def test_ngram_distribution_sums_to_one():
    oracle = NGramOracle(vocab_size=7, order=3, alpha=0.1)
    rng = random.Random(0)
    seqs = [[rng.randrange(7) for _ in range(rng.randint(1, 20))] for _ in range(30)]
    oracle.fit(seqs)
    contexts = [[], [1], [2, 3], [6, 6], [0, 1, 2, 3], [5]]
    for ctx in contexts:
        total = sum(math.exp(oracle.log_prob(ctx, t)) for t in range(7))
        assert total == pytest.approx(1.0, abs=1e-6)


def test_ngram_learns_transitions():
    oracle = NGramOracle(vocab_size=4, order=2, alpha=0.1)
    oracle.fit([[0, 1, 0, 1, 0, 1]])
    assert oracle.log_prob([0], 1) > oracle.log_prob([0], 2)


def test_ngram_argument_validation():
    with pytest.raises(ValidationError):
        NGramOracle(vocab_size=0)
    with pytest.raises(ValidationError):
        NGramOracle(vocab_size=5, order=0)
    with pytest.raises(ValidationError):
        NGramOracle(vocab_size=5, alpha=0.0)


# -------------------------------------------------------------------- scan


def test_scan_no_differing_words():
    base, ext = simple_pair()
    report = adoption_scan(
        UniformOracle(ext.vocab_size), ext, base, Corpus(["xyz zyx", "zz z"])
    )
    assert report.total_evaluated == 0
    assert all(b.n_evaluated == 0 for b in report.buckets)
    assert all(b.new_preferred_fraction == 0.0 for b in report.buckets)


def test_scan_boost_oracle_hits_hundred_percent():
    base, ext = simple_pair()
    docs = [
        "ab abc cd",  # 3 words, bucket < 15
        " ".join(["ab"] * 20),  # bucket 15..49
        " ".join(["abc cd"] * 30),  # 60 words, bucket >= 50
    ]
    report = adoption_scan(
        NewTokenBoostOracle(base.vocab_size), ext, base, Corpus(docs)
    )
    assert report.total_evaluated > 0
    for bucket in report.buckets:
        assert bucket.n_evaluated > 0
        assert bucket.new_preferred_fraction == 1.0


def test_scan_veto_oracle_hits_zero_percent():
    base, ext = simple_pair()
    docs = ["ab abc", " ".join(["cd"] * 25), " ".join(["ab"] * 55)]
    report = adoption_scan(NewTokenVetoOracle(base.vocab_size), ext, base, Corpus(docs))
    for bucket in report.buckets:
        assert bucket.n_evaluated > 0
        assert bucket.new_preferred_fraction == 0.0


def test_bucket_partition_and_boundaries():
    base, ext = simple_pair()
    docs = [
        " ".join(["ab"] * 14),  # 14 words -> first bucket
        " ".join(["ab"] * 15),  # 15 -> second
        " ".join(["ab"] * 49),  # 49 -> second
        " ".join(["ab"] * 50),  # 50 -> third
    ]
    report = adoption_scan(
        UniformOracle(ext.vocab_size), ext, base, Corpus(docs), bucket_bounds=(15, 50)
    )
    assert [b.n_evaluated for b in report.buckets] == [14, 15 + 49, 50]
    assert report.total_evaluated == sum(b.n_evaluated for b in report.buckets)
    assert (report.buckets[0].min_words, report.buckets[0].max_words) == (0, 15)
    assert (report.buckets[2].min_words, report.buckets[2].max_words) == (50, None)


def test_scan_bad_bounds_rejected():
    base, ext = simple_pair()
    with pytest.raises(ValidationError, match="ascending"):
        adoption_scan(UniformOracle(1), ext, base, Corpus([]), bucket_bounds=(50, 15))


def test_scan_requires_stable_ids():
    base = Tokenizer(BYTES_VOCAB, [])
    other = Tokenizer(
        {**{bytes([b]): b + 1 for b in range(255)}, b"\xff": 0, b"ab": 256},
        [(b"a", b"b")],
    )
    with pytest.raises(ValidationError, match="stable"):
        adoption_scan(UniformOracle(1), other, base, Corpus(["ab"]))


def test_scan_threaded_matches_serial_and_is_deterministic():
    base, ext = simple_pair()
    docs = ["ab abc cd xyz"] * 12 + [" ".join(["ab cd"] * 10)] * 3
    oracle = UniformOracle(ext.vocab_size)
    a = adoption_scan(oracle, ext, base, Corpus(docs), collect_decisions=True)
    b = adoption_scan(
        oracle, ext, base, Corpus(docs), collect_decisions=True, threads=4
    )
    assert a == b


def test_decision_dump_records_lengths_and_scores():
    base, ext = simple_pair()
    report = adoption_scan(
        UniformOracle(ext.vocab_size),
        ext,
        base,
        Corpus(["ab abc"]),
        collect_decisions=True,
    )
    assert report.decisions
    for d in report.decisions:
        assert d.new_len < d.old_len
        assert d.new_log_prob > d.old_log_prob
        assert d.preference is Preference.NEW


def test_constant_shift_invariance_on_equal_length_pairs():
    # adding a constant per-step log-prob cannot flip decisions between
    # sequences of equal length
    base, ext = simple_pair()

    class Base:
        def log_prob(self, context, token):
            return -1.0 if token % 2 else -2.0

    class Shifted(Base):
        def log_prob(self, context, token):
            return super().log_prob(context, token) - 3.0

    docs = ["ab abc cd ab", "cd cd abc"]
    a = adoption_scan(Base(), ext, base, Corpus(docs), collect_decisions=True)
    b = adoption_scan(Shifted(), ext, base, Corpus(docs), collect_decisions=True)
    for da, db in zip(a.decisions, b.decisions):
        if da.new_len == da.old_len:
            assert da.preference == db.preference


def test_context_is_extended_prefix():
    base, ext = simple_pair()
    seen_contexts = []

    class Recorder:
        def log_prob(self, context, token):
            seen_contexts.append(list(context))
            return -1.0

    adoption_scan(Recorder(), ext, base, Corpus(["ab ab"]))
    # first decision scores with empty context; second with the prefix "ab "
    first = seen_contexts[0]
    assert first == []
    prefix_id = ext.vocab[b"ab"]
    later = [c for c in seen_contexts if c[:1] == [prefix_id]]
    assert later


def test_ngram_pipeline_prefers_new_on_held_out_text():
    # small end-to-end version of the adoption experiment
    rng = random.Random(3)
    words = ["gadget", "gizmo", "widget", "bracket", "socket", "sprocket"]
    make_doc = lambda n: " ".join(rng.choice(words) for _ in range(n))
    train_docs = [make_doc(rng.randint(5, 60)) for _ in range(150)]
    held_out = [make_doc(n) for n in (8, 12, 20, 30, 55, 70)]

    base = train(Corpus(train_docs), TrainingConfig(268, 2)).tokenizer
    domain = train(Corpus(train_docs), TrainingConfig(400, 1))
    candidates = frequency_sorted_candidates(
        domain.tokenizer.vocab, domain.frequencies
    )
    ext, report = extend(base, candidates, ExtensionConfig(40))
    assert report.achieved > 0

    oracle = NGramOracle(vocab_size=ext.vocab_size, order=3, alpha=0.1)
    oracle.fit(ext.encode(doc) for doc in train_docs)
    scan = adoption_scan(oracle, ext, base, Corpus(held_out))
    assert scan.total_evaluated > 0
    for bucket in scan.buckets:
        if bucket.n_evaluated:
            assert bucket.new_preferred_fraction > 0.5
