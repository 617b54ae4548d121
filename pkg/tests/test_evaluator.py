import pytest

from tokex import (
    Corpus,
    Strategy,
    Tokenizer,
    TrainingConfig,
    ValidationError,
    fertility,
    frequency_sorted_candidates,
    sweep,
    train,
)

BYTES_VOCAB = {bytes([b]): b for b in range(256)}


def byte_tokenizer() -> Tokenizer:
    return Tokenizer(BYTES_VOCAB, [])


def the_tokenizer() -> Tokenizer:
    vocab = dict(BYTES_VOCAB)
    vocab[b"th"] = 256
    vocab[b"the"] = 257
    return Tokenizer(vocab, [(b"t", b"h"), (b"th", b"e")])


def test_fertility_byte_tokenizer():
    rep = fertility(byte_tokenizer(), Corpus(["ab"], "c"), tokenizer_id="bytes")
    assert rep.docs == 1
    assert rep.total_tokens == 2
    assert rep.tokens_per_doc_mean == 2.0
    assert rep.total_words == 1
    assert rep.tokens_per_word_mean == 2.0
    assert not rep.empty


def test_fertility_empty_corpus_flagged():
    rep = fertility(byte_tokenizer(), Corpus([], "empty"))
    assert rep.empty
    assert rep.docs == 0
    assert rep.tokens_per_doc_mean == 0.0
    assert rep.tokens_per_word_mean == 0.0


def test_merges_reduce_fertility():
    corpus = Corpus(["the the"])
    base = fertility(byte_tokenizer(), corpus)
    better = fertility(the_tokenizer(), corpus)
    assert better.total_tokens < base.total_tokens


def test_fertility_additive_over_sharding():
    docs = ["the cat", "sat on", "the mat", ""]
    whole = fertility(the_tokenizer(), Corpus(docs))
    parts = [
        fertility(the_tokenizer(), Corpus(docs[:2])),
        fertility(the_tokenizer(), Corpus(docs[2:])),
    ]
    assert whole.total_tokens == sum(p.total_tokens for p in parts)
    assert whole.total_words == sum(p.total_words for p in parts)
    assert whole.docs == sum(p.docs for p in parts)


def test_words_use_unicode_whitespace():
    rep = fertility(byte_tokenizer(), Corpus(["a b"]))
    assert rep.total_words == 2


@pytest.fixture(scope="module")
def small_pair():
    base = train(
        Corpus(["the cat sat on the mat", "a dog ate the log"] * 4),
        TrainingConfig(280, 1),
    )
    domain = train(
        Corpus(["catnip catalog catapult cat dogma"] * 4), TrainingConfig(300, 1)
    )
    candidates = frequency_sorted_candidates(
        domain.tokenizer.vocab, domain.frequencies
    )
    return base.tokenizer, candidates


def test_sweep_step_zero_equals_base(small_pair):
    base, candidates = small_pair
    corpus = Corpus(["the cat sat"], "c")
    result = sweep(base, candidates, {"c": corpus}, [0])
    point = result.points[0]
    rep = fertility(base, corpus)
    assert point.n_added == 0
    assert point.tokens_per_doc == rep.tokens_per_doc_mean
    assert point.tokens_per_word == rep.tokens_per_word_mean


def test_sweep_append_curves_non_increasing(small_pair):
    base, candidates = small_pair
    corpora = {
        "in": Corpus(["cat catalog catnip dogma cat"] * 3),
        "gen": Corpus(["the mat sat on a log"] * 3),
    }
    result = sweep(base, candidates, corpora, [0, 2, 5, 10])
    for cid in corpora:
        curve = [p.tokens_per_doc for p in result.points if p.corpus_id == cid]
        assert all(b <= a for a, b in zip(curve, curve[1:]))


def test_sweep_requires_ascending_steps(small_pair):
    base, candidates = small_pair
    with pytest.raises(ValidationError, match="ascending"):
        sweep(base, candidates, {}, [5, 5])
    with pytest.raises(ValidationError, match="ascending"):
        sweep(base, candidates, {}, [5, 1])
    with pytest.raises(ValidationError, match="non-negative"):
        sweep(base, candidates, {}, [-1, 5])


def test_sweep_points_ordered_and_csv_shape(small_pair):
    base, candidates = small_pair
    corpora = {"b": Corpus(["cat"]), "a": Corpus(["dog"])}
    result = sweep(
        base,
        candidates,
        corpora,
        [0, 3],
        [Strategy.APPEND, Strategy.PREPEND_BASELINE],
    )
    keys = [(p.n_added, p.strategy.value, p.corpus_id) for p in result.points]
    assert keys == sorted(keys)
    assert len(result.points) == 2 * 2 * 2
    csv_text = result.to_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == "n_added,strategy,corpus,tokens_per_doc,tokens_per_word"
    assert len(lines) == 9
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "append" and first[2] == "a"
    float(first[3]), float(first[4])


def test_sweep_prepend_points_present(small_pair):
    base, candidates = small_pair
    result = sweep(
        base,
        candidates,
        {"c": Corpus(["cat dog"])},
        [0, 4],
        [Strategy.PREPEND_BASELINE],
    )
    assert {p.strategy for p in result.points} == {Strategy.PREPEND_BASELINE}
    # N=0 is the identity for both strategies
    base_rep = fertility(base, Corpus(["cat dog"]))
    assert result.points[0].tokens_per_doc == base_rep.tokens_per_doc_mean
