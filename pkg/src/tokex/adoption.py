"""New-token adoption: does a probability source prefer the new tokenization?

Walking a document word by word, each word whose extended tokenization
differs from the base one becomes a decision: score both token sequences
under an oracle by chain rule from the shared (extended-tokenized) context
and count which side wins. Any next-token probability source can serve as
the oracle; a smoothed n-gram model over token ids is bundled so the
pipeline runs without an LLM.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Tokenizer, is_single_chunk, pre_tokenize_bytes
from .corpus import Corpus
from .errors import ValidationError
from .extender import structural_diff

#: Recorded in every report: how "wants to predict" is interpreted.
SCORING_NOTE = (
    "chain-rule sequence log-probability from the shared context; "
    "ties count as old"
)


class Preference(enum.Enum):
    NEW = "new"
    OLD = "old"
    IDENTICAL = "identical"


class UniformOracle:
    """Every token equally likely regardless of context."""

    def __init__(self, vocab_size: int):
        self._log_p = -math.log(vocab_size)

    def log_prob(self, context: Sequence[int], token: int) -> float:
        return self._log_p


class NGramOracle:
    """Additively smoothed n-gram model over token ids.

    P(token | context) = (count + alpha) / (context_total + alpha * vocab);
    for any fixed context the distribution sums to exactly 1. Queries are
    read-only after fit() and safe to issue concurrently.
    """

    def __init__(self, vocab_size: int, order: int = 3, alpha: float = 0.1):
        if order < 1:
            raise ValidationError(f"order must be >= 1, got {order}")
        if alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {alpha}")
        if vocab_size < 1:
            raise ValidationError(f"vocab_size must be >= 1, got {vocab_size}")
        self.vocab_size = vocab_size
        self.order = order
        self.alpha = alpha
        self._counts: dict[tuple[int, ...], Counter[int]] = {}
        self._totals: dict[tuple[int, ...], int] = {}

    def fit(self, sequences: Iterable[Sequence[int]]) -> "NGramOracle":
        span = self.order - 1
        for seq in sequences:
            for i, token in enumerate(seq):
                ctx = tuple(seq[max(0, i - span) : i])
                bucket = self._counts.get(ctx)
                if bucket is None:
                    bucket = self._counts[ctx] = Counter()
                bucket[token] += 1
                self._totals[ctx] = self._totals.get(ctx, 0) + 1
        return self

    def log_prob(self, context: Sequence[int], token: int) -> float:
        ctx = tuple(context[-(self.order - 1) :]) if self.order > 1 else ()
        bucket = self._counts.get(ctx)
        count = bucket[token] if bucket else 0
        total = self._totals.get(ctx, 0)
        return math.log(
            (count + self.alpha) / (total + self.alpha * self.vocab_size)
        )


def _score(oracle, context: list[int], ids: Sequence[int]) -> float:
    lp = 0.0
    ctx = list(context)
    for token_id in ids:
        lp += oracle.log_prob(ctx, token_id)
        ctx.append(token_id)
    return lp


def word_preference(
    oracle,
    ext_tok: Tokenizer,
    base_tok: Tokenizer,
    context: Sequence[int],
    word: str,
) -> Preference:
    """Compare the extended vs base tokenization of one word under the oracle.

    Base token ids are valid in the extended id space (append extension keeps
    them stable), so both sequences are scored under the same oracle. Returns
    IDENTICAL when the tokenizations agree; otherwise NEW exactly when the
    new sequence's summed log-probability is strictly larger.
    """
    data = word.encode("utf-8")
    if not is_single_chunk(data):
        raise ValidationError(f"word {word!r} spans multiple pre-token chunks")
    new_ids = ext_tok.encode_bytes(data)
    old_ids = base_tok.encode_bytes(data)
    if new_ids == old_ids:
        return Preference.IDENTICAL
    ctx = list(context)
    new_lp = _score(oracle, ctx, new_ids)
    old_lp = _score(oracle, ctx, old_ids)
    return Preference.NEW if new_lp > old_lp else Preference.OLD


@dataclass
class WordDecision:
    doc_index: int
    word: str
    preference: Preference
    new_len: int
    old_len: int
    new_log_prob: float
    old_log_prob: float


@dataclass
class BucketStat:
    """Decisions for documents whose word count lies in [min_words, max_words)."""

    min_words: int
    max_words: int | None
    n_evaluated: int = 0
    n_new: int = 0
    n_old: int = 0

    @property
    def new_preferred_fraction(self) -> float:
        return self.n_new / self.n_evaluated if self.n_evaluated else 0.0


@dataclass
class AdoptionReport:
    buckets: list[BucketStat]
    total_evaluated: int
    total_identical: int
    scoring: str = SCORING_NOTE
    decisions: list[WordDecision] | None = None


def _is_word_chunk(chunk: bytes) -> bool:
    # Word chunks end in a non-whitespace byte; whitespace chunks are single
    # whitespace bytes.
    return chunk[-1:] not in (b" ", b"\t", b"\n", b"\x0b", b"\x0c", b"\r")


def adoption_scan(
    oracle,
    ext_tok: Tokenizer,
    base_tok: Tokenizer,
    corpus: Corpus,
    bucket_bounds: Sequence[int] = (15, 50),
    collect_decisions: bool = False,
    threads: int = 1,
) -> AdoptionReport:
    """Tally new-vs-old preferences per document-length bucket.

    Words whose tokenizations agree are excluded from the fractions. The
    context for scoring is the extended tokenization of everything before
    the word in its document.
    """
    if any(b <= a for a, b in zip(bucket_bounds, bucket_bounds[1:])):
        raise ValidationError(
            f"bucket boundaries must be strictly ascending, got {list(bucket_bounds)}"
        )
    if not structural_diff(base_tok, ext_tok).ids_stable:
        raise ValidationError(
            "base token ids are not stable in the extended tokenizer; "
            "old sequences cannot be scored in the extended id space"
        )

    bounds = list(bucket_bounds)
    edges = [0] + bounds
    buckets = [
        BucketStat(min_words=lo, max_words=hi)
        for lo, hi in zip(edges, bounds + [None])
    ]

    def scan_doc(args: tuple[int, str]) -> tuple[int, list[WordDecision], int]:
        doc_index, doc = args
        word_count = len(doc.split())
        decisions: list[WordDecision] = []
        identical = 0
        context: list[int] = []
        for chunk in pre_tokenize_bytes(doc.encode("utf-8")):
            new_ids = ext_tok.encode_bytes(chunk)
            if _is_word_chunk(chunk):
                old_ids = base_tok.encode_bytes(chunk)
                if new_ids == old_ids:
                    identical += 1
                else:
                    new_lp = _score(oracle, context, new_ids)
                    old_lp = _score(oracle, context, old_ids)
                    pref = Preference.NEW if new_lp > old_lp else Preference.OLD
                    decisions.append(
                        WordDecision(
                            doc_index=doc_index,
                            word=chunk.decode("utf-8", errors="replace"),
                            preference=pref,
                            new_len=len(new_ids),
                            old_len=len(old_ids),
                            new_log_prob=new_lp,
                            old_log_prob=old_lp,
                        )
                    )
            context.extend(new_ids)
        return word_count, decisions, identical

    items = list(enumerate(corpus.documents))
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(scan_doc, items, chunksize=16))
    else:
        results = [scan_doc(item) for item in items]

    all_decisions: list[WordDecision] = []
    total_identical = 0
    for word_count, decisions, identical in results:
        total_identical += identical
        bucket = buckets[bisect_right(bounds, word_count)]
        for decision in decisions:
            bucket.n_evaluated += 1
            if decision.preference is Preference.NEW:
                bucket.n_new += 1
            else:
                bucket.n_old += 1
        if collect_decisions:
            all_decisions.extend(decisions)

    return AdoptionReport(
        buckets=buckets,
        total_evaluated=sum(b.n_evaluated for b in buckets),
        total_identical=total_identical,
        decisions=all_decisions if collect_decisions else None,
    )
