"""First-stage ranking: query likelihood with Dirichlet smoothing, plus RM3
pseudo-relevance feedback with KL re-scoring.

Scoring: score(q,d) = sum_{w in q} log((tf(w,d) + mu*cf(w)/|C|) / (|d| + mu)).
Documents matching no query term are never retrieved; query terms absent
from the collection are dropped (logged).  Ties are broken by external id
ascending everywhere.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .index import Index

log = logging.getLogger(__name__)


class EmptyQueryError(ValueError):
    """No query terms remain after dropping terms unknown to the collection."""


@dataclass(frozen=True)
class RetrievalParams:
    mu: float = 2500.0
    k: int = 1000

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class PrfParams:
    fb_docs: int = 20
    fb_terms: int = 20
    gamma: float = 0.5

    def __post_init__(self):
        if self.fb_docs < 1:
            raise ValueError(f"fb_docs must be >= 1, got {self.fb_docs}")
        if self.fb_terms < 1:
            raise ValueError(f"fb_terms must be >= 1, got {self.fb_terms}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class QueryModel:
    """Term distribution p'(w); weights are positive and sum to one."""

    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("empty query model")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"query model weights sum to {total!r}, expected 1")
        for term, w in self.weights.items():
            if not w > 0:
                raise ValueError(f"non-positive weight {w!r} for term {term!r}")


@dataclass
class RankedList:
    """Ordered (external_id, score) results for one turn."""

    turn_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)
    method_tag: str = "convsearch"

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]


def _known_counts(index: Index, query_terms: Iterable[str]) -> Counter:
    counts = Counter(query_terms)
    dropped = [t for t in counts if index.term_cf(t) == 0]
    for term in dropped:
        del counts[term]
    if dropped:
        log.debug("dropped %d unknown query term(s): %s", len(dropped), " ".join(sorted(dropped)))
    return counts


def ql_score(index: Index, external_id: str, query_terms: Sequence[str], mu: float) -> float:
    """Dirichlet-smoothed log probability of the query under one document.

    Duplicate query terms count once per occurrence.  Raises EmptyQueryError
    when every query term is unknown to the collection.
    """
    counts = _known_counts(index, query_terms)
    if not counts:
        raise EmptyQueryError("no known query terms")
    ordinal = index.ordinal(external_id)
    doc_len = int(index.doc_lengths[ordinal])
    total = index.total_terms
    score = 0.0
    for term, qtf in sorted(counts.items()):
        mu_cp = mu * index.term_cf(term) / total
        tf = index.tf(term, ordinal)
        score += qtf * math.log((tf + mu_cp) / (doc_len + mu))
    return score


def _rank(index: Index, weight_map: Mapping[str, float], mu: float, k: int) -> list[tuple[str, float]]:
    """Shared kernel driver: score docs matching >=1 term, return the top k
    by score with ties broken by external id ascending."""
    terms = sorted(weight_map)
    n_terms = len(terms)
    term_lo = np.empty(n_terms, dtype=np.int64)
    term_hi = np.empty(n_terms, dtype=np.int64)
    weights = np.empty(n_terms, dtype=np.float64)
    mu_cp = np.empty(n_terms, dtype=np.float64)
    for i, term in enumerate(terms):
        tid = index._tid[term]
        term_lo[i] = index.offsets[tid]
        term_hi[i] = index.offsets[tid + 1]
        weights[i] = weight_map[term]
        mu_cp[i] = mu * index.collection_tf[tid] / index.total_terms

    hits, scores = _kernels.accumulate_scores(
        index.post_docs, index.post_tfs, term_lo, term_hi,
        weights, mu_cp, index._doc_len_f, float(mu),
    )
    if hits.size == 0:
        return []
    order = np.lexsort((index._doc_id_arr[hits], -scores))[:k]
    return [(index.doc_ids[hits[i]], float(scores[i])) for i in order]


def search(
    index: Index,
    query_terms: Sequence[str],
    params: RetrievalParams = RetrievalParams(),
    turn_id: str = "",
    method_tag: str = "ql",
) -> RankedList:
    """Top-k query-likelihood ranking over documents containing >=1 query term.

    Scoring runs on the query's term distribution (counts / query length) so
    that a gamma=1 expansion followed by ``kl_search`` reproduces this
    ordering bit-for-bit, ties included; reported scores are rescaled back to
    the plain log-likelihood sum (exact up to one rounding of the product).
    """
    counts = _known_counts(index, query_terms)
    if not counts:
        raise EmptyQueryError("no known query terms")
    total = sum(counts.values())
    weights = {t: c / total for t, c in counts.items()}
    entries = _rank(index, weights, params.mu, params.k)
    entries = [(doc_id, score * total) for doc_id, score in entries]
    return RankedList(turn_id=turn_id, entries=entries, method_tag=method_tag)


def rm3_expand(
    index: Index,
    query_terms: Sequence[str],
    first_pass: RankedList,
    prf: PrfParams = PrfParams(),
) -> QueryModel:
    """RM3 expansion of a query against its own first-pass results.

    p'(w) = gamma * p_mle(w|q) + (1 - gamma) * p_rm1(w), where RM1 mixes the
    unsmoothed language models of the top fb_docs feedback documents, each
    weighted by its exponentiated first-pass log score normalized over the
    feedback set, and is restricted to its top fb_terms terms (ties broken
    by term ascending) before renormalization.
    """
    counts = _known_counts(index, query_terms)
    if not counts:
        raise EmptyQueryError("no known query terms")
    if not first_pass.entries:
        raise ValueError("rm3_expand requires a non-empty first-pass ranking")

    total_q = sum(counts.values())
    p_query = {t: c / total_q for t, c in counts.items()}
    if prf.gamma == 1.0:
        return QueryModel(p_query)

    feedback = first_pass.entries[: prf.fb_docs]
    max_score = max(score for _, score in feedback)
    raw = [math.exp(score - max_score) for _, score in feedback]
    denom = math.fsum(raw)
    doc_weights = [r / denom for r in raw]

    rm1: dict[str, float] = {}
    for (doc_id, _), doc_weight in zip(feedback, doc_weights):
        ordinal = index.ordinal(doc_id)
        terms = index.doc_terms(ordinal)
        doc_len = len(terms)
        for term, tf in Counter(terms).items():
            rm1[term] = rm1.get(term, 0.0) + doc_weight * tf / doc_len

    top = sorted(rm1.items(), key=lambda kv: (-kv[1], kv[0]))[: prf.fb_terms]
    rm1_denom = math.fsum(w for _, w in top)
    rm1_top = {t: w / rm1_denom for t, w in top}

    mixed: dict[str, float] = {}
    for term, p in p_query.items():
        mixed[term] = mixed.get(term, 0.0) + prf.gamma * p
    for term, p in rm1_top.items():
        mixed[term] = mixed.get(term, 0.0) + (1.0 - prf.gamma) * p
    mixed = {t: w for t, w in mixed.items() if w > 0.0}
    norm = math.fsum(mixed.values())
    return QueryModel({t: w / norm for t, w in sorted(mixed.items())})


def kl_search(
    index: Index,
    model: QueryModel,
    params: RetrievalParams = RetrievalParams(),
    turn_id: str = "",
    method_tag: str = "ql-rm3",
) -> RankedList:
    """Top-k ranking by sum_w p'(w) * log p_dirichlet(w|d); same tie-break
    rule as ``search``.  Model terms unknown to the collection are dropped."""
    known = {t: w for t, w in model.weights.items() if index.term_cf(t) > 0}
    if not known:
        raise EmptyQueryError("no known model terms")
    if len(known) < len(model.weights):
        log.debug("dropped %d unknown model term(s)", len(model.weights) - len(known))
    entries = _rank(index, known, params.mu, params.k)
    return RankedList(turn_id=turn_id, entries=entries, method_tag=method_tag)
