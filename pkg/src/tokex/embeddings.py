"""Embedding-row initialization for extended vocabularies.

Each new token's row is the arithmetic mean of the rows of the base tokens
it decomposes into under the base tokenizer. Base rows are copied
bit-exactly; sums run at float64 in fixed left-to-right order before the
float32 store, so output is deterministic. The same operation applies
unchanged to a projection matrix when one is supplied alongside.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .core import Tokenizer
from .errors import FormatError, InternalError, ValidationError
from .extender import structural_diff

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")
_F32 = np.dtype("<f4")


@dataclass
class EmbeddingMatrix:
    """Dense row-per-token matrix; float32, one row per vocab entry."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=_F32)
        if arr.ndim != 2:
            raise ValidationError(f"embedding matrix must be 2-D, got {arr.ndim}-D")
        if arr.shape[0] < 256:
            raise ValidationError(
                f"embedding matrix needs at least 256 rows, got {arr.shape[0]}"
            )
        if arr.shape[1] < 1:
            raise ValidationError("embedding matrix needs at least 1 column")
        if not np.isfinite(arr).all():
            raise ValidationError("embedding matrix contains non-finite values")
        self.data = arr

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]


def init_new_embeddings(
    base_tok: Tokenizer, ext_tok: Tokenizer, base_emb: EmbeddingMatrix
) -> EmbeddingMatrix:
    """Build the extended matrix: base rows verbatim, new rows averaged."""
    if base_emb.rows != base_tok.vocab_size:
        raise ValidationError(
            f"embedding rows ({base_emb.rows}) do not match base vocabulary "
            f"size ({base_tok.vocab_size})"
        )
    diff = structural_diff(base_tok, ext_tok)
    if not (diff.merge_prefix_preserved and diff.ids_stable):
        raise ValidationError(
            "extended tokenizer is not an append-extension of the base "
            "(merge prefix or token ids differ)"
        )

    out = np.empty((ext_tok.vocab_size, base_emb.dims), dtype=_F32)
    out[: base_emb.rows] = base_emb.data
    base_data = base_emb.data
    for token in diff.added_tokens:
        constituent_ids = base_tok.encode_bytes(token)
        if not constituent_ids:
            raise InternalError(f"token {token!r} encoded to zero tokens")
        acc = np.zeros(base_emb.dims, dtype=np.float64)
        for token_id in constituent_ids:
            acc += base_data[token_id]
        out[ext_tok.vocab[token]] = (acc / len(constituent_ids)).astype(_F32)
    return EmbeddingMatrix(out)


def save_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Write the EMB1 binary: magic, u32 rows, u32 dims, f32 row-major data."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, matrix.rows, matrix.dims))
        fh.write(np.ascontiguousarray(matrix.data, dtype=_F32).tobytes())


def load_embeddings(path) -> EmbeddingMatrix:
    """Read and validate an EMB1 file; the round trip is bit-exact."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size or blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic, not an EMB1 embedding file")
    _, rows, dims = _HEADER.unpack_from(blob)
    expected = _HEADER.size + rows * dims * _F32.itemsize
    if len(blob) != expected:
        raise FormatError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes but header "
            f"{rows}x{dims} requires {expected - _HEADER.size}"
        )
    data = np.frombuffer(blob, dtype=_F32, offset=_HEADER.size).reshape(rows, dims)
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: embedding payload contains non-finite values")
    try:
        return EmbeddingMatrix(data.copy())
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None
