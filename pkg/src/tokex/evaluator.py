"""Token fertility measurement and the vocabulary-size trade-off sweep.

Fertility here is the average number of tokens needed to encode a document;
the sweep re-extends the base tokenizer at each step count and measures
fertility per corpus, producing the plot-ready CSV used to pick how many
tokens to add.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import Tokenizer, apply_merges, pre_tokenize_bytes
from .corpus import Corpus
from .errors import ValidationError
from .extender import ExtensionConfig, Strategy, extend

#: How reported means relate to totals, echoed into JSON output.
AVERAGING_NOTE = (
    "tokens_per_doc_mean = total_tokens / docs (unweighted per-document mean); "
    "tokens_per_word_mean = total_tokens / total_words; words are "
    "whitespace-separated units"
)


@dataclass
class FertilityReport:
    corpus_id: str
    tokenizer_id: str
    docs: int
    total_tokens: int
    total_words: int
    tokens_per_doc_mean: float
    tokens_per_word_mean: float
    #: True when the corpus had no documents; means are defined as 0.
    empty: bool = False


@dataclass
class SweepPoint:
    n_added: int
    strategy: Strategy
    corpus_id: str
    tokens_per_doc: float
    tokens_per_word: float


@dataclass
class SweepResult:
    points: list[SweepPoint]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("n_added,strategy,corpus,tokens_per_doc,tokens_per_word\n")
        for p in self.points:
            out.write(
                f"{p.n_added},{p.strategy.value},{p.corpus_id},"
                f"{p.tokens_per_doc:.6f},{p.tokens_per_word:.6f}\n"
            )
        return out.getvalue()


def _corpus_stats(corpus: Corpus) -> tuple[Counter[bytes], int, int]:
    """Aggregate a corpus once: chunk counts, document count, word count."""
    chunks: Counter[bytes] = Counter()
    words = 0
    for doc in corpus.documents:
        words += len(doc.split())
        chunks.update(pre_tokenize_bytes(doc.encode("utf-8")))
    return chunks, len(corpus.documents), words


def _total_tokens(chunks: Counter[bytes], tok: Tokenizer) -> int:
    ranks = tok.merge_ranks
    return sum(len(apply_merges(chunk, ranks)) * n for chunk, n in chunks.items())


def _report(
    corpus_id: str, tokenizer_id: str, docs: int, total_tokens: int, total_words: int
) -> FertilityReport:
    return FertilityReport(
        corpus_id=corpus_id,
        tokenizer_id=tokenizer_id,
        docs=docs,
        total_tokens=total_tokens,
        total_words=total_words,
        tokens_per_doc_mean=total_tokens / docs if docs else 0.0,
        tokens_per_word_mean=total_tokens / total_words if total_words else 0.0,
        empty=docs == 0,
    )


def fertility(
    tok: Tokenizer,
    corpus: Corpus,
    corpus_id: str | None = None,
    tokenizer_id: str = "tokenizer",
) -> FertilityReport:
    """Encode every document and report token totals and means."""
    chunks, docs, words = _corpus_stats(corpus)
    total = _total_tokens(chunks, tok)
    return _report(corpus_id or corpus.source, tokenizer_id, docs, total, words)


def sweep(
    base: Tokenizer,
    domain_vocab: list[bytes],
    corpora: Mapping[str, Corpus],
    steps: list[int],
    strategies: Iterable[Strategy] = (Strategy.APPEND,),
) -> SweepResult:
    """Measure fertility for one extended tokenizer per (step, strategy).

    Steps must be strictly ascending; a step of 0 reproduces base fertility
    exactly. Points come back ordered by (n_added, strategy, corpus)
    regardless of execution order.
    """
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValidationError(f"steps must be strictly ascending, got {steps}")
    if any(n < 0 for n in steps):
        raise ValidationError(f"steps must be non-negative, got {steps}")
    strategies = tuple(strategies)

    stats = {cid: _corpus_stats(c) for cid, c in corpora.items()}
    points: list[SweepPoint] = []
    for n in steps:
        for strategy in strategies:
            ext, _ = extend(base, domain_vocab, ExtensionConfig(n, strategy))
            for corpus_id, (chunks, docs, words) in stats.items():
                total = _total_tokens(chunks, ext)
                rep = _report(corpus_id, f"ext-{n}-{strategy.value}", docs, total, words)
                points.append(
                    SweepPoint(
                        n_added=n,
                        strategy=strategy,
                        corpus_id=corpus_id,
                        tokens_per_doc=rep.tokens_per_doc_mean,
                        tokens_per_word=rep.tokens_per_word_mean,
                    )
                )
    points.sort(key=lambda p: (p.n_added, p.strategy.value, p.corpus_id))
    return SweepResult(points=points)
