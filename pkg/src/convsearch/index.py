"""Inverted index with the collection statistics needed for Dirichlet
smoothing and RM3: per-term postings, cf(w), df(w), |d|, |C|.

The index is immutable after build.  On disk it is a directory holding a
JSON manifest (format version, analyzer fingerprint, corpus stats, per-file
checksums) plus segment files: term dictionary, postings arrays, document
lengths, document ids, stored passage bodies, and the stopword list.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .textpipe import AnalyzerConfig, analyze, parse_stopwords

FORMAT_VERSION = 1

_SEGMENTS = (
    "terms.txt",
    "postings_offsets.npy",
    "postings_docs.npy",
    "postings_tfs.npy",
    "doc_lengths.npy",
    "doc_ids.txt",
    "docs.jsonl",
    "stopwords.txt",
)


class IndexStorageError(Exception):
    """Base class for on-disk index problems."""


class IndexMissingFileError(IndexStorageError):
    pass


class IndexChecksumError(IndexStorageError):
    pass


class IndexVersionError(IndexStorageError):
    pass


class DuplicateDocumentError(ValueError):
    pass


class EmptyCorpusError(ValueError):
    pass


class AnalyzerMismatchError(ValueError):
    """Query-time analyzer differs from the one the index was built with."""


class Posting(NamedTuple):
    doc_ordinal: int
    term_frequency: int


class Index:
    """Immutable inverted index; safe to share across threads once built."""

    def __init__(self, analyzer, doc_ids, doc_texts, doc_lengths, terms, offsets, post_docs, post_tfs):
        self.analyzer = analyzer
        self.doc_ids = list(doc_ids)
        self.doc_texts = list(doc_texts)
        self.doc_lengths = np.asarray(doc_lengths, dtype=np.int32)
        self.terms = list(terms)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.post_docs = np.asarray(post_docs, dtype=np.int32)
        self.post_tfs = np.asarray(post_tfs, dtype=np.int32)

        self._tid = {t: i for i, t in enumerate(self.terms)}
        self._ordinal = {d: i for i, d in enumerate(self.doc_ids)}
        counts = self.offsets[1:] - self.offsets[:-1]
        self.doc_freq = counts.astype(np.int64)
        self.collection_tf = np.add.reduceat(
            self.post_tfs.astype(np.int64), self.offsets[:-1]
        ) if len(self.terms) else np.zeros(0, dtype=np.int64)
        if len(self.terms):
            self.collection_tf[counts == 0] = 0
        self.total_terms = int(self.doc_lengths.sum())
        # cached forms used by the scoring kernels / tie-breaking
        self._doc_len_f = self.doc_lengths.astype(np.float64)
        self._doc_id_arr = np.asarray(self.doc_ids, dtype=np.str_)

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def vocab_size(self) -> int:
        return len(self.terms)

    def postings(self, term: str) -> list[Posting]:
        """Postings for a normalized term, sorted by doc ordinal; [] if unknown."""
        tid = self._tid.get(term)
        if tid is None:
            return []
        lo, hi = self.offsets[tid], self.offsets[tid + 1]
        return [
            Posting(int(d), int(f))
            for d, f in zip(self.post_docs[lo:hi], self.post_tfs[lo:hi])
        ]

    def term_cf(self, term: str) -> int:
        tid = self._tid.get(term)
        return int(self.collection_tf[tid]) if tid is not None else 0

    def term_df(self, term: str) -> int:
        tid = self._tid.get(term)
        return int(self.doc_freq[tid]) if tid is not None else 0

    def tf(self, term: str, doc_ordinal: int) -> int:
        tid = self._tid.get(term)
        if tid is None:
            return 0
        lo, hi = self.offsets[tid], self.offsets[tid + 1]
        pos = lo + np.searchsorted(self.post_docs[lo:hi], doc_ordinal)
        if pos < hi and self.post_docs[pos] == doc_ordinal:
            return int(self.post_tfs[pos])
        return 0

    def ordinal(self, external_id: str) -> int:
        try:
            return self._ordinal[external_id]
        except KeyError:
            raise KeyError(f"unknown document id: {external_id}") from None

    def doc_id(self, ordinal: int) -> str:
        return self.doc_ids[ordinal]

    def doc_text(self, external_id: str) -> str:
        return self.doc_texts[self.ordinal(external_id)]

    def doc_terms(self, ordinal: int) -> list[str]:
        """Analyzed terms of a stored document (used by RM3 document models)."""
        return analyze(self.doc_texts[ordinal], self.analyzer)

    def analyze(self, text: str) -> list[str]:
        """Analyze query text with the analyzer the index was built with."""
        return analyze(text, self.analyzer)

    def check_analyzer(self, cfg: AnalyzerConfig) -> None:
        if cfg.fingerprint() != self.analyzer.fingerprint():
            raise AnalyzerMismatchError(
                "query analyzer differs from the analyzer this index was built with"
            )

    # persistence -----------------------------------------------------------

    def save(self, path) -> None:
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        (root / "terms.txt").write_text("".join(t + "\n" for t in self.terms), "utf-8")
        np.save(root / "postings_offsets.npy", self.offsets)
        np.save(root / "postings_docs.npy", self.post_docs)
        np.save(root / "postings_tfs.npy", self.post_tfs)
        np.save(root / "doc_lengths.npy", self.doc_lengths)
        (root / "doc_ids.txt").write_text("".join(d + "\n" for d in self.doc_ids), "utf-8")
        with open(root / "docs.jsonl", "w", encoding="utf-8") as fh:
            for doc_id, text in zip(self.doc_ids, self.doc_texts):
                fh.write(json.dumps({"id": doc_id, "text": text}, ensure_ascii=False) + "\n")
        (root / "stopwords.txt").write_text(
            "".join(w + "\n" for w in sorted(self.analyzer.stopwords)), "utf-8"
        )
        manifest = {
            "format_version": FORMAT_VERSION,
            "doc_count": self.doc_count,
            "total_terms": self.total_terms,
            "analyzer": {
                "stemmer": self.analyzer.stemmer,
                "lowercase": self.analyzer.lowercase,
                "fingerprint": self.analyzer.fingerprint(),
            },
            "files": {name: _sha256(root / name) for name in _SEGMENTS},
        }
        (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path) -> "Index":
        root = Path(path)
        manifest_path = root / "manifest.json"
        if not manifest_path.is_file():
            raise IndexMissingFileError(f"missing index manifest: {manifest_path}")
        manifest = json.loads(manifest_path.read_text("utf-8"))
        version = manifest.get("format_version")
        if version != FORMAT_VERSION:
            raise IndexVersionError(
                f"unsupported index format version {version!r} in {manifest_path}"
                f" (expected {FORMAT_VERSION})"
            )
        for name, digest in manifest["files"].items():
            seg = root / name
            if not seg.is_file():
                raise IndexMissingFileError(f"missing index segment: {seg}")
            if _sha256(seg) != digest:
                raise IndexChecksumError(f"checksum mismatch in index segment: {seg}")

        stopwords = parse_stopwords((root / "stopwords.txt").read_text("utf-8").splitlines())
        analyzer = AnalyzerConfig(
            stopwords=stopwords,
            stemmer=manifest["analyzer"]["stemmer"],
            lowercase=manifest["analyzer"]["lowercase"],
        )
        terms = (root / "terms.txt").read_text("utf-8").splitlines()
        doc_ids = (root / "doc_ids.txt").read_text("utf-8").splitlines()
        doc_texts = [""] * len(doc_ids)
        with open(root / "docs.jsonl", encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                doc_texts[i] = json.loads(line)["text"]
        return cls(
            analyzer=analyzer,
            doc_ids=doc_ids,
            doc_texts=doc_texts,
            doc_lengths=np.load(root / "doc_lengths.npy"),
            terms=terms,
            offsets=np.load(root / "postings_offsets.npy"),
            post_docs=np.load(root / "postings_docs.npy"),
            post_tfs=np.load(root / "postings_tfs.npy"),
        )


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_index(corpus: Iterable[tuple[str, str]], analyzer: AnalyzerConfig) -> Index:
    """Build an index from (external_id, text) pairs.

    Ordinals follow input order; duplicate external ids and corpora that
    yield no terms at all are rejected.
    """
    doc_ids: list[str] = []
    doc_texts: list[str] = []
    doc_lengths: list[int] = []
    term_postings: dict[str, list[tuple[int, int]]] = {}
    seen: set[str] = set()

    for external_id, text in corpus:
        if external_id in seen:
            raise DuplicateDocumentError(f"duplicate document id: {external_id}")
        seen.add(external_id)
        ordinal = len(doc_ids)
        doc_ids.append(external_id)
        doc_texts.append(text)
        terms = analyze(text, analyzer)
        doc_lengths.append(len(terms))
        counts: dict[str, int] = {}
        for term in terms:
            counts[term] = counts.get(term, 0) + 1
        for term, tf in counts.items():
            term_postings.setdefault(term, []).append((ordinal, tf))

    if not doc_ids:
        raise EmptyCorpusError("empty corpus: no documents provided")
    if sum(doc_lengths) == 0:
        raise EmptyCorpusError("empty corpus: no document produced any terms")

    terms = sorted(term_postings)
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    for i, term in enumerate(terms):
        offsets[i + 1] = offsets[i] + len(term_postings[term])
    post_docs = np.empty(offsets[-1], dtype=np.int32)
    post_tfs = np.empty(offsets[-1], dtype=np.int32)
    pos = 0
    for term in terms:
        for ordinal, tf in term_postings[term]:
            post_docs[pos] = ordinal
            post_tfs[pos] = tf
            pos += 1

    return Index(
        analyzer=analyzer,
        doc_ids=doc_ids,
        doc_texts=doc_texts,
        doc_lengths=doc_lengths,
        terms=terms,
        offsets=offsets,
        post_docs=post_docs,
        post_tfs=post_tfs,
    )


def read_corpus_tsv(path) -> Iterator[tuple[str, str]]:
    """`id<TAB>text` per line (MS-MARCO collection style)."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>text")
            yield parts[0], parts[1]


def read_corpus_jsonl(path) -> Iterator[tuple[str, str]]:
    """JSONL with fields `id` and `contents`."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield str(obj["id"]), str(obj["contents"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
