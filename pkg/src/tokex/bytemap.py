"""Fixed bijection between raw bytes and printable code points.

Token byte strings are rendered through this table whenever they appear in a
JSON tokenizer file, so files stay valid UTF-8 and diff cleanly byte for
byte. Printable ASCII except space maps to itself; space and every
non-printable byte map to a fixed set of distinct printable code points
(the Latin-1 printables, then U+0100 upward). The table is the GPT-2 style
mapping, chosen so rendered vocabularies are interoperable with other
byte-level BPE tooling.
"""

from .errors import ValidationError


def _build_byte_to_char() -> tuple[str, ...]:
    # Bytes that render as themselves: '!'..'~', '¡'..'¬', '®'..'ÿ'.
    identity = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    byte_values = identity[:]
    code_points = identity[:]
    offset = 0
    for b in range(256):
        if b not in identity:
            byte_values.append(b)
            code_points.append(256 + offset)
            offset += 1
    table = [""] * 256
    for b, cp in zip(byte_values, code_points):
        table[b] = chr(cp)
    return tuple(table)


BYTE_TO_CHAR: tuple[str, ...] = _build_byte_to_char()
CHAR_TO_BYTE: dict[str, int] = {c: b for b, c in enumerate(BYTE_TO_CHAR)}


def render_token(token: bytes) -> str:
    """Render a token byte string as its printable on-disk form."""
    return "".join(BYTE_TO_CHAR[b] for b in token)


def parse_token(text: str) -> bytes:
    """Invert :func:`render_token`; reject strings outside the table's image."""
    if not text:
        raise ValidationError("token must not be empty")
    try:
        return bytes(CHAR_TO_BYTE[c] for c in text)
    except KeyError as exc:
        raise ValidationError(
            f"character {exc.args[0]!r} in token {text!r} is not a rendered byte"
        ) from None
