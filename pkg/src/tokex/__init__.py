"""tokex: byte-level BPE tokenizer training, extension, and analysis.

Train tokenizers on domain corpora, extend an existing tokenizer with
in-domain tokens under a never-worse-tokenization guarantee, initialize
embedding rows for the new tokens, and quantify the efficiency gains with
fertility sweeps, an analytical throughput model, and a new-token adoption
analyzer.
"""

from .adoption import (
    AdoptionReport,
    NGramOracle,
    Preference,
    UniformOracle,
    adoption_scan,
    word_preference,
)
from .core import (
    MergeRule,
    PRE_TOKENIZER_ID,
    Tokenizer,
    apply_merges,
    is_single_chunk,
    load_tokenizer,
    pre_tokenize,
    pre_tokenize_bytes,
    save_tokenizer,
)
from .corpus import Corpus
from .cost_model import (
    ModelGeometry,
    ThroughputEstimate,
    forward_cost_per_token,
    net_gain,
)
from .embeddings import (
    EmbeddingMatrix,
    init_new_embeddings,
    load_embeddings,
    save_embeddings,
)
from .errors import FormatError, InternalError, TokexError, ValidationError
from .evaluator import FertilityReport, SweepPoint, SweepResult, fertility, sweep
from .extender import (
    ExtensionConfig,
    ExtensionReport,
    MonotonicityReport,
    SkipReason,
    Strategy,
    StructuralDiff,
    extend,
    frequency_sorted_candidates,
    structural_diff,
    verify_monotonic,
)
from .trainer import TrainingConfig, TrainResult, token_frequencies, train

__version__ = "0.1.0"

__all__ = [
    "AdoptionReport",
    "Corpus",
    "EmbeddingMatrix",
    "ExtensionConfig",
    "ExtensionReport",
    "FertilityReport",
    "FormatError",
    "InternalError",
    "MergeRule",
    "ModelGeometry",
    "MonotonicityReport",
    "NGramOracle",
    "PRE_TOKENIZER_ID",
    "Preference",
    "SkipReason",
    "Strategy",
    "StructuralDiff",
    "SweepPoint",
    "SweepResult",
    "ThroughputEstimate",
    "TokexError",
    "Tokenizer",
    "TrainResult",
    "TrainingConfig",
    "UniformOracle",
    "ValidationError",
    "adoption_scan",
    "apply_merges",
    "extend",
    "fertility",
    "forward_cost_per_token",
    "frequency_sorted_candidates",
    "init_new_embeddings",
    "is_single_chunk",
    "load_embeddings",
    "load_tokenizer",
    "net_gain",
    "pre_tokenize",
    "pre_tokenize_bytes",
    "save_embeddings",
    "save_tokenizer",
    "structural_diff",
    "sweep",
    "token_frequencies",
    "train",
    "verify_monotonic",
    "word_preference",
]
