"""Byte-level BPE tokenizers: representation, serialization, encode, decode.

A tokenizer is two things: an ordered list of merge rules and a vocabulary
mapping token byte strings to dense integer ids. Text is first split into
pre-token chunks that merges may not cross. Within a chunk, encoding
repeatedly applies the applicable merge with the smallest list index,
leftmost occurrence first, until no rule applies; the surviving symbols are
then mapped to ids.
"""

from __future__ import annotations

import heapq
import json
import re
from typing import Iterable, Mapping, NamedTuple

from .bytemap import parse_token, render_token
from .errors import ValidationError

FORMAT_VERSION = 1
PRE_TOKENIZER_ID = "ws-byte-v1"

#: Bytes the "ws-byte-v1" pre-tokenizer treats as whitespace (ASCII only;
#: multi-byte Unicode whitespace is ordinary text at the byte level).
WHITESPACE_BYTES = frozenset(b"\t\n\x0b\x0c\r ")

# A chunk is a maximal non-whitespace run with its single immediately
# preceding space if one exists; any other whitespace byte is its own chunk.
_CHUNK_RE = re.compile(rb" ?[^ \t\n\x0b\x0c\r]+|[\t\n\x0b\x0c\r]| ")


class MergeRule(NamedTuple):
    """One merge: adjacent ``left`` and ``right`` symbols fuse into one token."""

    left: bytes
    right: bytes

    @property
    def output(self) -> bytes:
        return self.left + self.right

    def render(self) -> str:
        return f"{render_token(self.left)} {render_token(self.right)}"


def pre_tokenize_bytes(data: bytes) -> list[bytes]:
    """Split raw bytes into pre-token chunks; chunks concatenate to the input."""
    return _CHUNK_RE.findall(data)


def pre_tokenize(text: str) -> list[bytes]:
    """Split text into the byte chunks that merges are applied within."""
    return _CHUNK_RE.findall(text.encode("utf-8"))


def is_single_chunk(data: bytes) -> bool:
    """True when the pre-tokenizer keeps ``data`` whole.

    Tokens spanning chunk boundaries could never be produced by encoding, so
    extension candidates must satisfy this predicate.
    """
    return len(_CHUNK_RE.findall(data)) == 1


def apply_merges(chunk: bytes, ranks: Mapping[tuple[bytes, bytes], int]) -> list[bytes]:
    """Segment one pre-token chunk into merge-result symbols.

    At every step the applicable merge with the smallest rank is applied;
    when it matches at several positions, the leftmost goes first. A priority
    queue over candidate positions keeps this near-linear; stale queue
    entries are detected by re-checking the pair's rank on pop (ranks are
    unique per pair, so a rank match identifies the rule exactly).
    """
    n = len(chunk)
    if n < 2:
        return [chunk] if chunk else []
    sym: list[bytes | None] = [chunk[i : i + 1] for i in range(n)]
    nxt = list(range(1, n)) + [-1]
    prv = list(range(-1, n - 1))
    get = ranks.get
    heap = []
    for i in range(n - 1):
        r = get((sym[i], sym[i + 1]))  # type: ignore[arg-type]
        if r is not None:
            heap.append((r, i))
    heapq.heapify(heap)
    while heap:
        r, i = heapq.heappop(heap)
        s = sym[i]
        if s is None:
            continue
        j = nxt[i]
        if j == -1 or get((s, sym[j])) != r:
            continue
        sym[i] = s = s + sym[j]  # type: ignore[operator]
        sym[j] = None
        k = nxt[j]
        nxt[i] = k
        if k != -1:
            prv[k] = i
            r2 = get((s, sym[k]))
            if r2 is not None:
                heapq.heappush(heap, (r2, i))
        p = prv[i]
        if p != -1:
            r2 = get((sym[p], s))
            if r2 is not None:
                heapq.heappush(heap, (r2, p))
    return [s for s in sym if s is not None]


class Tokenizer:
    """A byte-level BPE tokenizer: vocabulary plus ordered merge list.

    Instances are immutable after construction; :meth:`encode` and
    :meth:`decode` hold no shared mutable state and are safe to call from
    many threads concurrently.
    """

    __slots__ = ("vocab", "merges", "pre_tokenizer", "merge_ranks", "_id_to_token")

    def __init__(
        self,
        vocab: Mapping[bytes, int],
        merges: Iterable[tuple[bytes, bytes]],
        pre_tokenizer: str = PRE_TOKENIZER_ID,
    ) -> None:
        self.vocab: dict[bytes, int] = dict(vocab)
        self.merges: tuple[MergeRule, ...] = tuple(MergeRule(l, r) for l, r in merges)
        self.pre_tokenizer = pre_tokenizer
        self.merge_ranks: dict[tuple[bytes, bytes], int] = {
            (m.left, m.right): i for i, m in enumerate(self.merges)
        }
        n = len(self.vocab)
        id_to_token: list[bytes] = [b""] * n
        for token, token_id in self.vocab.items():
            if not token:
                raise ValidationError("vocabulary contains an empty token")
            if not isinstance(token_id, int) or not 0 <= token_id < n:
                raise ValidationError(
                    f"token id {token_id!r} out of range 0..{n - 1}"
                )
            id_to_token[token_id] = token
        if any(not t for t in id_to_token):
            raise ValidationError("token ids are not unique and dense 0..len-1")
        self._id_to_token = id_to_token

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def token_for_id(self, token_id: int) -> bytes:
        if not 0 <= token_id < len(self._id_to_token):
            raise ValidationError(
                f"token id {token_id} out of range for vocabulary of size "
                f"{len(self._id_to_token)}"
            )
        return self._id_to_token[token_id]

    def encode_bytes(self, data: bytes) -> list[int]:
        vocab = self.vocab
        ranks = self.merge_ranks
        ids: list[int] = []
        for chunk in _CHUNK_RE.findall(data):
            if len(chunk) == 1:
                ids.append(vocab[chunk])
            else:
                ids.extend(vocab[s] for s in apply_merges(chunk, ranks))
        return ids

    def encode(self, text: str) -> list[int]:
        """Encode text to token ids; every UTF-8 string is encodable."""
        return self.encode_bytes(text.encode("utf-8"))

    def decode_bytes(self, ids: Iterable[int]) -> bytes:
        id_to_token = self._id_to_token
        n = len(id_to_token)
        parts = []
        for token_id in ids:
            if not 0 <= token_id < n:
                raise ValidationError(
                    f"token id {token_id} out of range for vocabulary of size {n}"
                )
            parts.append(id_to_token[token_id])
        return b"".join(parts)

    def decode(self, ids: Iterable[int]) -> str | bytes:
        """Concatenate token byte strings; raw bytes if not valid UTF-8."""
        raw = self.decode_bytes(ids)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            return raw

    def validate(self) -> None:
        """Check the full invariant set enforced on load; raise on violation."""
        _validate(self, "tokenizer")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tokenizer):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.merges == other.merges
            and self.pre_tokenizer == other.pre_tokenizer
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"Tokenizer(vocab_size={len(self.vocab)}, "
            f"merges={len(self.merges)}, pre_tokenizer={self.pre_tokenizer!r})"
        )


def _validate(tok: Tokenizer, where: str) -> None:
    if tok.pre_tokenizer != PRE_TOKENIZER_ID:
        raise ValidationError(
            f"{where}: unknown pre_tokenizer {tok.pre_tokenizer!r} "
            f"(expected {PRE_TOKENIZER_ID!r})"
        )
    vocab = tok.vocab
    for b in range(256):
        if bytes([b]) not in vocab:
            raise ValidationError(f"{where}: missing single-byte token 0x{b:02x}")
    seen: set[MergeRule] = set()
    for i, rule in enumerate(tok.merges):
        if rule in seen:
            raise ValidationError(
                f"{where}: merges[{i}]: duplicate merge {rule.render()!r}"
            )
        seen.add(rule)
        for side, token in (("left", rule.left), ("right", rule.right)):
            if token not in vocab:
                raise ValidationError(
                    f"{where}: merges[{i}]: {side} token "
                    f"{render_token(token)!r} not in vocabulary"
                )
        output = rule.output
        if output not in vocab:
            raise ValidationError(
                f"{where}: merges[{i}]: merged token "
                f"{render_token(output)!r} not in vocabulary"
            )
        out_id = vocab[output]
        if out_id <= vocab[rule.left] or out_id <= vocab[rule.right]:
            raise ValidationError(
                f"{where}: merges[{i}]: merged token "
                f"{render_token(output)!r} must have a larger id than its parts"
            )


def save_tokenizer(tok: Tokenizer, path) -> None:
    """Write the tokenizer JSON file; output is byte-deterministic."""
    payload = {
        "version": FORMAT_VERSION,
        "pre_tokenizer": tok.pre_tokenizer,
        "vocab": {
            render_token(t): i
            for t, i in sorted(tok.vocab.items(), key=lambda kv: kv[1])
        },
        "merges": [m.render() for m in tok.merges],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def _no_duplicate_keys(pairs):
    out = dict(pairs)
    if len(out) != len(pairs):
        seen: set[str] = set()
        for key, _ in pairs:
            if key in seen:
                raise ValidationError(f"duplicate key {key!r}")
            seen.add(key)
    return out


def load_tokenizer(path) -> Tokenizer:
    """Load and fully validate a tokenizer JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh, object_pairs_hook=_no_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON: {exc}") from exc
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    for key in ("version", "pre_tokenizer", "vocab", "merges"):
        if key not in raw:
            raise ValidationError(f"{path}: missing key {key!r}")
    if raw["version"] != FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported version {raw['version']!r} "
            f"(expected {FORMAT_VERSION})"
        )
    if not isinstance(raw["vocab"], dict):
        raise ValidationError(f"{path}: 'vocab' must be an object")
    vocab: dict[bytes, int] = {}
    for rendered, token_id in raw["vocab"].items():
        try:
            token = parse_token(rendered)
        except ValidationError as exc:
            raise ValidationError(f"{path}: vocab key {rendered!r}: {exc}") from None
        if isinstance(token_id, bool) or not isinstance(token_id, int) or token_id < 0:
            raise ValidationError(
                f"{path}: vocab[{rendered!r}]: id must be a non-negative "
                f"integer, got {token_id!r}"
            )
        vocab[token] = token_id
    if not isinstance(raw["merges"], list):
        raise ValidationError(f"{path}: 'merges' must be an array")
    merges: list[MergeRule] = []
    for i, line in enumerate(raw["merges"]):
        if not isinstance(line, str):
            raise ValidationError(f"{path}: merges[{i}]: must be a string")
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValidationError(
                f"{path}: merges[{i}]: expected 'LEFT RIGHT' with exactly "
                f"one space, got {line!r}"
            )
        try:
            merges.append(MergeRule(parse_token(parts[0]), parse_token(parts[1])))
        except ValidationError as exc:
            raise ValidationError(f"{path}: merges[{i}]: {exc}") from None
    try:
        tok = Tokenizer(vocab, merges, pre_tokenizer=raw["pre_tokenizer"])
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    _validate(tok, str(path))
    return tok
