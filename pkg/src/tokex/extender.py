"""Vocabulary extension with a never-worse tokenization guarantee.

The append strategy adds each accepted in-domain token's merge at the end of
the base merge list. Earlier merges are unaffected by later ones, so every
input segments into at most as many tokens as before; ids and the base merge
prefix are preserved exactly. The prepend baseline inserts new merges at the
head of the list instead, which can pre-empt base merge chains and make some
inputs segment worse; it exists for comparison.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import MergeRule, Tokenizer, apply_merges, is_single_chunk
from .corpus import Corpus
from .errors import ValidationError

# Ranks for head-inserted merges: below every base rank, ascending in
# addition order so the head block reads in the order tokens were added.
_HEAD_RANK_BASE = -(2**30)


class Strategy(enum.Enum):
    APPEND = "append"
    PREPEND_BASELINE = "prepend"


class SkipReason(enum.Enum):
    ALREADY_IN_VOCAB = "AlreadyInVocab"
    PRE_TOKENIZER_SPLITS = "PreTokenizerSplits"
    ENCODES_TO_ONE = "EncodesToOne"
    ENCODES_TO_THREE_OR_MORE = "EncodesToThreeOrMore"


@dataclass(frozen=True)
class ExtensionConfig:
    num_tokens_to_add: int
    strategy: Strategy = Strategy.APPEND

    def __post_init__(self) -> None:
        if self.num_tokens_to_add < 0:
            raise ValidationError(
                f"num_tokens_to_add must be >= 0, got {self.num_tokens_to_add}"
            )


@dataclass
class AddedToken:
    token: bytes
    token_id: int
    #: None when the merge was already present and only the vocab entry was added.
    merge: MergeRule | None


@dataclass
class SkippedToken:
    token: bytes
    reason: SkipReason


@dataclass
class ExtensionReport:
    """Audit trail of every candidate decision, in traversal order."""

    requested: int
    strategy: Strategy
    added: list[AddedToken] = field(default_factory=list)
    skipped: list[SkippedToken] = field(default_factory=list)

    @property
    def achieved(self) -> int:
        return len(self.added)

    def skip_counts(self) -> dict[str, int]:
        counts = {reason.value: 0 for reason in SkipReason}
        for entry in self.skipped:
            counts[entry.reason.value] += 1
        return counts


def frequency_sorted_candidates(
    tokens: Iterable[bytes], frequencies: Mapping[bytes, int]
) -> list[bytes]:
    """Canonical candidate order: descending frequency, ties lexicographic."""
    return sorted(tokens, key=lambda t: (-frequencies.get(t, 0), t))


def extend(
    base: Tokenizer, domain_vocab: Iterable[bytes], cfg: ExtensionConfig
) -> tuple[Tokenizer, ExtensionReport]:
    """Extend ``base`` with in-domain tokens, auditing every decision.

    ``domain_vocab`` is traversed in the given order (callers sort by
    descending frequency). A candidate is added when, encoded with the
    tokenizer as extended so far, it splits into exactly two tokens; the pair
    becomes the new merge and the token receives the next free id. Everything
    else is recorded as skipped with a reason.
    """
    base.validate()
    report = ExtensionReport(requested=cfg.num_tokens_to_add, strategy=cfg.strategy)

    vocab = dict(base.vocab)
    ranks = dict(base.merge_ranks)
    known_merges = set(base.merge_ranks)
    new_merges: list[MergeRule] = []
    append_mode = cfg.strategy is Strategy.APPEND

    for token in domain_vocab:
        if report.achieved >= cfg.num_tokens_to_add:
            break
        if not isinstance(token, bytes):
            raise ValidationError(f"domain vocab token {token!r} is not bytes")
        if not token:
            raise ValidationError("domain vocab contains an empty token")
        if token in vocab:
            report.skipped.append(SkippedToken(token, SkipReason.ALREADY_IN_VOCAB))
            continue
        if not is_single_chunk(token):
            report.skipped.append(SkippedToken(token, SkipReason.PRE_TOKENIZER_SPLITS))
            continue
        pieces = apply_merges(token, ranks)
        if len(pieces) == 1:
            report.skipped.append(SkippedToken(token, SkipReason.ENCODES_TO_ONE))
            continue
        if len(pieces) > 2:
            report.skipped.append(
                SkippedToken(token, SkipReason.ENCODES_TO_THREE_OR_MORE)
            )
            continue
        rule = MergeRule(pieces[0], pieces[1])
        merge_added: MergeRule | None = None
        if (rule.left, rule.right) not in known_merges:
            if append_mode:
                ranks[rule.left, rule.right] = len(base.merges) + len(new_merges)
            else:
                ranks[rule.left, rule.right] = _HEAD_RANK_BASE + len(new_merges)
            known_merges.add((rule.left, rule.right))
            new_merges.append(rule)
            merge_added = rule
        vocab[token] = len(vocab)
        report.added.append(AddedToken(token, vocab[token], merge_added))

    if append_mode:
        merges = list(base.merges) + new_merges
    else:
        merges = new_merges + list(base.merges)
    return Tokenizer(vocab, merges, pre_tokenizer=base.pre_tokenizer), report


@dataclass
class MonotonicityViolation:
    text: str
    base_len: int
    ext_len: int


@dataclass
class MonotonicityReport:
    checked: int
    violations: list[MonotonicityViolation]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_monotonic(
    base: Tokenizer, ext: Tokenizer, samples: Corpus, threads: int = 1
) -> MonotonicityReport:
    """Compare token counts of both tokenizers over every sample document.

    Append-extended tokenizers never produce a violation; the prepend
    baseline may. Samples may be sharded across threads (tokenizers are
    immutable); results are merged in document order either way.
    """

    def check(doc: str) -> tuple[int, int]:
        data = doc.encode("utf-8")
        return len(base.encode_bytes(data)), len(ext.encode_bytes(data))

    docs = samples.documents
    if threads > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lengths = list(pool.map(check, docs, chunksize=256))
    else:
        lengths = [check(doc) for doc in docs]

    violations = [
        MonotonicityViolation(doc, base_len, ext_len)
        for doc, (base_len, ext_len) in zip(docs, lengths)
        if ext_len > base_len
    ]
    return MonotonicityReport(checked=len(docs), violations=violations)


@dataclass
class StructuralDiff:
    merge_prefix_preserved: bool
    ids_stable: bool
    added_tokens: list[bytes]


def structural_diff(base: Tokenizer, ext: Tokenizer) -> StructuralDiff:
    """Flag whether ext preserves base's merge prefix and token ids."""
    prefix = ext.merges[: len(base.merges)] == base.merges
    ids_stable = all(ext.vocab.get(t) == i for t, i in base.vocab.items())
    added = sorted(
        (t for t in ext.vocab if t not in base.vocab), key=lambda t: ext.vocab[t]
    )
    return StructuralDiff(
        merge_prefix_preserved=prefix, ids_stable=ids_stable, added_tokens=added
    )
