"""Hot scoring kernels: Dirichlet-smoothed accumulation over posting lists.

Two interchangeable implementations of the same accumulation:

* a numba ``@njit`` kernel (default), and
* a pure-numpy fallback, selected by setting ``CONVSEARCH_NUMBA=0`` (also
  used automatically when numba is unavailable).

Both follow the same per-posting accumulation order.  Results agree to
float64 rounding but are not guaranteed bitwise-identical across the two
paths; determinism guarantees hold within a single path.

For every document matching at least one weighted term the kernel computes

    score(d) = sum_t w_t * log((tf(t,d) + mu*cf(t)/|C|) / (|d| + mu))

with the sum over all weighted terms t (absent terms contribute the
collection probability).  Only matched documents are scored; the result is
(matched doc ordinals ascending, their scores).

``benchmarks/bench_scoring.py`` compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _env_wants_numba() -> bool:
    return os.environ.get("CONVSEARCH_NUMBA", "1").strip().lower() not in {
        "0",
        "false",
        "no",
        "off",
    }


def accumulate_scores_numpy(post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, mu):
    n_docs = doc_lengths.shape[0]
    acc = np.zeros(n_docs, dtype=np.float64)
    matched = np.zeros(n_docs, dtype=np.bool_)
    for t in range(weights.shape[0]):
        lo = term_lo[t]
        hi = term_hi[t]
        if lo == hi:
            continue
        docs = post_docs[lo:hi]
        # Doc ids are unique within one posting list, so fancy-indexed += is safe.
        acc[docs] += weights[t] * (np.log(post_tfs[lo:hi] + mu_cp[t]) - math.log(mu_cp[t]))
        matched[docs] = True
    base = 0.0
    wsum = 0.0
    for t in range(weights.shape[0]):
        base += weights[t] * math.log(mu_cp[t])
        wsum += weights[t]
    hits = np.nonzero(matched)[0]
    scores = base + acc[hits] - wsum * np.log(doc_lengths[hits] + mu)
    return hits, scores


_NUMBA_OK = False
if _env_wants_numba():
    try:
        import numba

        @numba.njit(cache=True)
        def _accumulate_numba(post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, mu):
            n_docs = doc_lengths.shape[0]
            acc = np.zeros(n_docs, dtype=np.float64)
            matched = np.zeros(n_docs, dtype=np.bool_)
            n_hits = 0
            for t in range(weights.shape[0]):
                w = weights[t]
                mcp = mu_cp[t]
                log_mcp = math.log(mcp)
                for j in range(term_lo[t], term_hi[t]):
                    d = post_docs[j]
                    acc[d] += w * (math.log(post_tfs[j] + mcp) - log_mcp)
                    if not matched[d]:
                        matched[d] = True
                        n_hits += 1
            base = 0.0
            wsum = 0.0
            for t in range(weights.shape[0]):
                base += weights[t] * math.log(mu_cp[t])
                wsum += weights[t]
            hits = np.empty(n_hits, dtype=np.int64)
            scores = np.empty(n_hits, dtype=np.float64)
            pos = 0
            for d in range(n_docs):
                if matched[d]:
                    hits[pos] = d
                    scores[pos] = base + acc[d] - wsum * math.log(doc_lengths[d] + mu)
                    pos += 1
            return hits, scores

        _NUMBA_OK = True
    except ImportError:  # pragma: no cover - exercised via env flag tests
        _NUMBA_OK = False

NUMBA_ENABLED = _NUMBA_OK


def accumulate_scores(post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, mu):
    """Dispatch to the numba kernel when enabled, else the numpy fallback."""
    if NUMBA_ENABLED:
        return _accumulate_numba(
            post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, mu
        )
    return accumulate_scores_numpy(
        post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, mu
    )
