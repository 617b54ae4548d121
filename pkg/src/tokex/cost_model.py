"""Analytical forward-pass cost model for the vocabulary-size trade-off.

A larger vocabulary makes the logit projection more expensive per token; a
better tokenizer needs fewer tokens per request and shortens the attention
context. Both effects are modeled as FLOPs and combined into a net
requests-per-second gain. Latency is assumed proportional to FLOPs; no
memory-bandwidth or batching effects are modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .evaluator import FertilityReport

# FLOP constants (one multiply-accumulate = 2 FLOPs), per token per layer:
#   attention projections: q, k, v, output = 4 matmuls of h x h
ATTN_PROJ_FACTOR = 8
#   gated FFN: up, gate, down = 3 matmuls of h x (ffn_mult * h)
FFN_FACTOR = 6
#   attention over the context: score + value matmuls, causal averaging
#   covers half the sequence, giving 2 * h * seq_len
ATTN_CONTEXT_FACTOR = 2
# and once per token: the vocabulary logit matmul, 2 * h * vocab
LOGIT_FACTOR = 2

#: Fallback words -> tokens factor when no fertility measurement is supplied.
DEFAULT_TOKENS_PER_WORD = 1.3


@dataclass(frozen=True)
class ModelGeometry:
    hidden_size: int
    num_layers: int
    base_vocab: int
    ffn_mult: float = 3.5

    def __post_init__(self) -> None:
        for name in ("hidden_size", "num_layers", "base_vocab", "ffn_mult"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class ThroughputEstimate:
    per_token_cost_ratio: float
    token_ratio: float
    net_rps_gain: float
    base_seq_tokens: float
    ext_seq_tokens: float
    base_cost_per_token: float
    ext_cost_per_token: float
    tokens_per_word: float


def forward_cost_per_token(geom: ModelGeometry, vocab_size: int, seq_len: float) -> float:
    """FLOPs to advance one token through the model at a given context length."""
    if vocab_size <= 0 or seq_len <= 0:
        raise ValidationError("vocab_size and seq_len must be positive")
    h = geom.hidden_size
    per_layer = (
        ATTN_PROJ_FACTOR * h * h
        + FFN_FACTOR * geom.ffn_mult * h * h
        + ATTN_CONTEXT_FACTOR * h * seq_len
    )
    return geom.num_layers * per_layer + LOGIT_FACTOR * h * vocab_size


def net_gain(
    geom: ModelGeometry,
    delta_vocab: int,
    token_reduction: float,
    words: int,
    tokens_per_word: float | None = None,
    fertility_report: FertilityReport | None = None,
) -> ThroughputEstimate:
    """Estimate the net throughput change from extending the vocabulary.

    The base side processes ``words * tokens_per_word`` tokens; the extended
    side processes ``1 - token_reduction`` as many, each paying the larger
    logit term but attending over the shorter context. The request-level
    speedup is then 1 / (token_ratio * per_token_cost_ratio) - 1. Longer
    requests favor extension because the quadratic attention share grows.
    """
    if not 0.0 <= token_reduction < 1.0:
        raise ValidationError(
            f"token_reduction must be in [0, 1), got {token_reduction}"
        )
    if delta_vocab < 0:
        raise ValidationError(f"delta_vocab must be >= 0, got {delta_vocab}")
    if words <= 0:
        raise ValidationError(f"words must be positive, got {words}")
    if fertility_report is not None and fertility_report.tokens_per_word_mean > 0:
        tokens_per_word = fertility_report.tokens_per_word_mean
    if tokens_per_word is None:
        tokens_per_word = DEFAULT_TOKENS_PER_WORD
    if tokens_per_word <= 0:
        raise ValidationError(f"tokens_per_word must be positive, got {tokens_per_word}")

    base_seq = words * tokens_per_word
    token_ratio = 1.0 - token_reduction
    ext_seq = base_seq * token_ratio
    base_cost = forward_cost_per_token(geom, geom.base_vocab, base_seq)
    ext_cost = forward_cost_per_token(geom, geom.base_vocab + delta_vocab, ext_seq)
    ratio = ext_cost / base_cost
    return ThroughputEstimate(
        per_token_cost_ratio=ratio,
        token_ratio=token_ratio,
        net_rps_gain=1.0 / (token_ratio * ratio) - 1.0,
        base_seq_tokens=base_seq,
        ext_seq_tokens=ext_seq,
        base_cost_per_token=base_cost,
        ext_cost_per_token=ext_cost,
        tokens_per_word=tokens_per_word,
    )
