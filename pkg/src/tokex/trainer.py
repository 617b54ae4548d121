"""BPE training: learn merges by iterated pair counting over a corpus.

The vocabulary a training run produces is what drives extension later: token
ids reflect creation order, and the returned frequency table (occurrence
counts under the final segmentation) supplies the descending-frequency
candidate order.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter
from dataclasses import dataclass

from .core import MergeRule, Tokenizer, apply_merges, pre_tokenize_bytes
from .corpus import Corpus
from .errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingConfig:
    target_vocab_size: int
    min_pair_frequency: int = 2

    def __post_init__(self) -> None:
        if self.target_vocab_size < 257:
            raise ValidationError(
                f"target_vocab_size must be at least 257, got {self.target_vocab_size}"
            )
        if self.min_pair_frequency < 1:
            raise ValidationError(
                f"min_pair_frequency must be at least 1, got {self.min_pair_frequency}"
            )


@dataclass
class TrainResult:
    tokenizer: Tokenizer
    #: Occurrence count of every vocab token under the final segmentation of
    #: the training corpus; tokens never produced have count 0.
    frequencies: dict[bytes, int]
    #: False when training stopped before reaching target_vocab_size.
    target_reached: bool


def _merge_seq(seq: list[bytes], left: bytes, right: bytes, out: bytes) -> list[bytes]:
    """Replace leftmost non-overlapping (left, right) adjacencies with out."""
    merged: list[bytes] = []
    i = 0
    n = len(seq)
    while i < n:
        if i + 1 < n and seq[i] == left and seq[i + 1] == right:
            merged.append(out)
            i += 2
        else:
            merged.append(seq[i])
            i += 1
    return merged


def _corpus_chunks(corpus: Corpus) -> Counter[bytes]:
    counts: Counter[bytes] = Counter()
    for doc in corpus.documents:
        counts.update(pre_tokenize_bytes(doc.encode("utf-8")))
    return counts


def _frequencies_from_chunks(tok: Tokenizer, chunks: Counter[bytes]) -> dict[bytes, int]:
    by_id = [0] * tok.vocab_size
    ranks = tok.merge_ranks
    for chunk, count in chunks.items():
        for symbol in apply_merges(chunk, ranks):
            by_id[tok.vocab[symbol]] += count
    return {tok.token_for_id(i): by_id[i] for i in range(tok.vocab_size)}


def token_frequencies(tok: Tokenizer, corpus: Corpus) -> dict[bytes, int]:
    """Count each vocab token's occurrences when encoding the whole corpus."""
    return _frequencies_from_chunks(tok, _corpus_chunks(corpus))


def train(corpus: Corpus, cfg: TrainingConfig) -> TrainResult:
    """Train a byte-level BPE tokenizer.

    Merges are learned greedily by pair frequency; ties break toward the
    lexicographically smaller (left, right) byte pair so identical corpus and
    config always produce a byte-identical tokenizer file. Training stops at
    the target vocabulary size, or earlier (with ``target_reached=False``)
    when no pair reaches ``min_pair_frequency``.
    """
    chunk_counts = _corpus_chunks(corpus)
    if sum(len(c) * n for c, n in chunk_counts.items()) == 0:
        raise ValidationError(f"corpus {corpus.source!r} is empty")

    words: list[list[bytes]] = [
        [chunk[i : i + 1] for i in range(len(chunk))] for chunk in chunk_counts
    ]
    word_counts: list[int] = list(chunk_counts.values())

    pair_counts: dict[tuple[bytes, bytes], int] = {}
    pair_words: dict[tuple[bytes, bytes], set[int]] = {}
    for wid, seq in enumerate(words):
        count = word_counts[wid]
        for pair in zip(seq, seq[1:]):
            pair_counts[pair] = pair_counts.get(pair, 0) + count
            ws = pair_words.get(pair)
            if ws is None:
                pair_words[pair] = {wid}
            else:
                ws.add(wid)

    # Lazy max-heap: entries may go stale as counts change; validity is
    # re-checked against pair_counts on pop, and decayed entries re-inserted
    # at their true count. Key order implements the count-then-lexicographic
    # tie-break.
    heap = [(-c, l, r) for (l, r), c in pair_counts.items()]
    heapq.heapify(heap)

    vocab: dict[bytes, int] = {bytes([b]): b for b in range(256)}
    merges: list[MergeRule] = []
    merged_pairs: set[tuple[bytes, bytes]] = set()
    banned_pairs: set[tuple[bytes, bytes]] = set()

    def apply_pair(left: bytes, right: bytes, out: bytes) -> None:
        pair = (left, right)
        increased: dict[tuple[bytes, bytes], bool] = {}
        for wid in pair_words.pop(pair, ()):
            seq = words[wid]
            new_seq = _merge_seq(seq, left, right, out)
            if len(new_seq) == len(seq):
                continue
            count = word_counts[wid]
            for old_pair in zip(seq, seq[1:]):
                left_over = pair_counts[old_pair] - count
                if left_over:
                    pair_counts[old_pair] = left_over
                else:
                    del pair_counts[old_pair]
            for new_pair in zip(new_seq, new_seq[1:]):
                pair_counts[new_pair] = pair_counts.get(new_pair, 0) + count
                increased[new_pair] = True
                ws = pair_words.get(new_pair)
                if ws is None:
                    pair_words[new_pair] = {wid}
                else:
                    ws.add(wid)
            words[wid] = new_seq
        for new_pair in increased:
            c = pair_counts.get(new_pair, 0)
            if c > 0:
                heapq.heappush(heap, (-c, new_pair[0], new_pair[1]))

    target_reached = True
    while len(vocab) < cfg.target_vocab_size:
        best: tuple[bytes, bytes] | None = None
        best_count = 0
        while heap:
            neg, left, right = heapq.heappop(heap)
            pair = (left, right)
            if pair in banned_pairs:
                continue
            current = pair_counts.get(pair, 0)
            if current == -neg:
                best = pair
                best_count = current
                break
            if current > 0:
                heapq.heappush(heap, (-current, left, right))
        if best is None or best_count < cfg.min_pair_frequency:
            target_reached = False
            break
        left, right = best
        out = left + right
        if best in merged_pairs:
            # The pair re-formed after its rule was already learned; keep the
            # working segmentation aligned with encode-time behavior.
            apply_pair(left, right, out)
            continue
        if out in vocab:
            # Same token already produced by a different pair; a second rule
            # would break the id-ordering invariant. Never merge this pair.
            banned_pairs.add(best)
            continue
        merges.append(MergeRule(left, right))
        merged_pairs.add(best)
        vocab[out] = len(vocab)
        apply_pair(left, right, out)

    tok = Tokenizer(vocab, merges)
    if not target_reached:
        logger.info(
            "training stopped at vocab size %d (target %d): no pair with "
            "frequency >= %d left",
            len(vocab),
            cfg.target_vocab_size,
            cfg.min_pair_frequency,
        )
    return TrainResult(
        tokenizer=tok,
        frequencies=_frequencies_from_chunks(tok, chunk_counts),
        target_reached=target_reached,
    )
