"""Corpus loading: newline-delimited documents or a directory of .txt files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass
class Corpus:
    """A sequence of text documents; empty documents are allowed."""

    documents: list[str]
    source: str = "<inline>"

    def __len__(self) -> int:
        return len(self.documents)

    def total_bytes(self) -> int:
        return sum(len(d.encode("utf-8")) for d in self.documents)

    @classmethod
    def from_file(cls, path) -> "Corpus":
        """One document per line."""
        text = Path(path).read_text(encoding="utf-8")
        return cls(text.splitlines(), source=str(path))

    @classmethod
    def from_dir(cls, path) -> "Corpus":
        """Each *.txt file (sorted by name) is one document."""
        files = sorted(Path(path).glob("*.txt"))
        docs = [f.read_text(encoding="utf-8") for f in files]
        return cls(docs, source=str(path))

    @classmethod
    def from_path(cls, path) -> "Corpus":
        p = Path(path)
        if p.is_dir():
            return cls.from_dir(p)
        return cls.from_file(p)
