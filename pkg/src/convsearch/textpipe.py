"""Text analysis shared by indexing, retrieval, PRF, and rewriting.

The chain is: tokenize -> lowercase -> drop stopwords -> stem.  Stopword
removal happens before stemming, so the stopword list is matched against
surface lowercase forms.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable

from ._porter import porter_stem

# Letters and digits only; underscores, hyphens and all punctuation separate
# tokens, so punctuation-only tokens can never be produced.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

STEMMERS = ("none", "porter")


@dataclass(frozen=True)
class Token:
    """One surface token with its character span in the source text."""

    surface: str
    normalized: str
    start: int
    end: int


@dataclass(frozen=True)
class AnalyzerConfig:
    stopwords: frozenset = frozenset()
    stemmer: str = "porter"
    lowercase: bool = True

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer {self.stemmer!r}; expected one of {STEMMERS}")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        for word in self.stopwords:
            if word != word.lower():
                raise ValueError(f"stopword {word!r} is not lowercase")

    @classmethod
    def default(cls) -> "AnalyzerConfig":
        """Bundled stopword list, Porter stemming, lowercasing."""
        return cls(stopwords=default_stopwords(), stemmer="porter", lowercase=True)

    def fingerprint(self) -> str:
        """Stable digest of the full configuration, for index manifests."""
        h = hashlib.sha256()
        h.update(self.stemmer.encode())
        h.update(b"|%d|" % int(self.lowercase))
        for word in sorted(self.stopwords):
            h.update(word.encode())
            h.update(b"\n")
        return h.hexdigest()


def parse_stopwords(lines: Iterable[str]) -> frozenset:
    """One lowercase term per line; blank lines and '#' comments ignored."""
    words = set()
    for line in lines:
        term = line.strip()
        if not term or term.startswith("#"):
            continue
        words.add(term.lower())
    return frozenset(words)


def load_stopwords(path) -> frozenset:
    with open(path, encoding="utf-8") as fh:
        return parse_stopwords(fh)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset:
    text = resources.files("convsearch.data").joinpath("stopwords.txt").read_text("utf-8")
    return parse_stopwords(text.splitlines())


def tokenize(text: str) -> list[Token]:
    """Split on whitespace/punctuation boundaries, preserving order and spans."""
    return [
        Token(m.group(), m.group().lower(), m.start(), m.end())
        for m in _TOKEN_RE.finditer(text)
    ]


def analyze(text: str, cfg: AnalyzerConfig) -> list[str]:
    """Normalized index/query terms for ``text`` under ``cfg``."""
    out = []
    for token in tokenize(text):
        term = token.normalized if cfg.lowercase else token.surface
        if term in cfg.stopwords:
            continue
        if cfg.stemmer == "porter":
            term = porter_stem(term)
        if term:
            out.append(term)
    return out
