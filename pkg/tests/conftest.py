"""Session fixtures: desk-scale trained tokenizer pairs shared across tests.

The main pair mirrors the experimental setup end to end: a base tokenizer
trained on a general+domain mixture (standing in for a pretrained
general-purpose tokenizer) and a domain tokenizer trained on specialized
text, extended by 5000 tokens. Two smaller pairs over different word pools
provide the independently trained tokenizers the monotonicity property is
checked against. Build times are recorded so acceptance tests can account
for them in their runtime budgets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import pytest

from tokex import (
    Corpus,
    ExtensionConfig,
    ExtensionReport,
    Tokenizer,
    TrainingConfig,
    extend,
    frequency_sorted_candidates,
    train,
)

from .corpora import encyclopedia_documents, mixture_documents, product_documents


@dataclass
class TrainedPair:
    name: str
    base: Tokenizer
    candidates: list[bytes]
    ext: Tokenizer
    report: ExtensionReport
    build_seconds: float


def _build_pair(
    name: str,
    base_docs: list[str],
    domain_docs: list[str],
    base_vocab: int,
    domain_vocab: int,
    num_tokens: int,
) -> TrainedPair:
    start = time.perf_counter()
    base = train(Corpus(base_docs, f"{name}-base"), TrainingConfig(base_vocab))
    domain = train(Corpus(domain_docs, f"{name}-domain"), TrainingConfig(domain_vocab))
    candidates = frequency_sorted_candidates(
        domain.tokenizer.vocab, domain.frequencies
    )
    ext, report = extend(base.tokenizer, candidates, ExtensionConfig(num_tokens))
    return TrainedPair(
        name=name,
        base=base.tokenizer,
        candidates=candidates,
        ext=ext,
        report=report,
        build_seconds=time.perf_counter() - start,
    )


@pytest.fixture(scope="session")
def desk_pair() -> TrainedPair:
    """The 5 MB-corpus pair used by the sweep, embedding and adoption criteria."""
    return _build_pair(
        "desk",
        mixture_documents(1, 4_500_000, 500_000),
        product_documents(5, 5_000_000),
        base_vocab=256 + 12000,
        domain_vocab=256 + 14000,
        num_tokens=5000,
    )


@pytest.fixture(scope="session")
def small_pairs() -> list[TrainedPair]:
    """Two more independently trained pairs over different word pools."""
    pair_b = _build_pair(
        "small-b",
        mixture_documents(21, 500_000, 60_000, general_pool_seed=303, domain_pool_seed=404),
        product_documents(25, 600_000, pool_seed=404),
        base_vocab=256 + 2500,
        domain_vocab=256 + 4000,
        num_tokens=1200,
    )
    pair_c = _build_pair(
        "small-c",
        mixture_documents(31, 500_000, 60_000, general_pool_seed=505, domain_pool_seed=606),
        product_documents(35, 600_000, pool_seed=606),
        base_vocab=256 + 2500,
        domain_vocab=256 + 4000,
        num_tokens=1200,
    )
    return [pair_b, pair_c]


@pytest.fixture(scope="session")
def eval_corpora() -> dict[str, Corpus]:
    """Held-out documents from the main pair's distributions."""
    return {
        "in-domain": Corpus(product_documents(11, 250_000), "in-domain"),
        "general": Corpus(encyclopedia_documents(12, 250_000), "general"),
    }
