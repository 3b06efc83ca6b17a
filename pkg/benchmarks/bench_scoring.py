#!/usr/bin/env python3
"""Benchmark the Dirichlet accumulation kernel: numba @njit vs pure numpy.

At runtime the package picks one path (CONVSEARCH_NUMBA=0 forces the numpy
fallback); here both implementations run side by side on synthetic posting
lists and report per-query latency and posting throughput.

Usage: python benchmarks/bench_scoring.py [--docs N] [--terms V] [--reps R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from convsearch import _kernels


def synth_postings(n_docs: int, n_terms: int, seed: int):
    """Zipf-ish document frequencies, geometric term frequencies."""
    rng = np.random.default_rng(seed)
    doc_freqs = np.maximum(1, (n_docs * 0.5 / np.arange(1, n_terms + 1) ** 0.8).astype(np.int64))
    offsets = np.zeros(n_terms + 1, dtype=np.int64)
    np.cumsum(doc_freqs, out=offsets[1:])
    post_docs = np.empty(offsets[-1], dtype=np.int32)
    post_tfs = np.empty(offsets[-1], dtype=np.int32)
    for t in range(n_terms):
        lo, hi = offsets[t], offsets[t + 1]
        post_docs[lo:hi] = np.sort(rng.choice(n_docs, size=hi - lo, replace=False)).astype(np.int32)
        post_tfs[lo:hi] = rng.geometric(0.55, size=hi - lo).astype(np.int32)
    doc_lengths = rng.integers(20, 400, size=n_docs).astype(np.float64)
    return offsets, post_docs, post_tfs, doc_lengths


def make_query(offsets, n_query_terms: int, total_terms: float, mu: float, seed: int):
    # draw from the heaviest tenth of the vocabulary: real queries hit
    # frequent terms, and those posting lists dominate the traversal
    rng = np.random.default_rng(seed)
    head = max(n_query_terms, (len(offsets) - 1) // 10)
    terms = rng.choice(head, size=n_query_terms, replace=False)
    term_lo = offsets[terms]
    term_hi = offsets[terms + 1]
    weights = np.full(n_query_terms, 1.0 / n_query_terms)
    cf = (term_hi - term_lo).astype(np.float64) * 1.8
    mu_cp = mu * cf / total_terms
    return term_lo, term_hi, weights, mu_cp


def timed(fn, args, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=200_000)
    parser.add_argument("--terms", type=int, default=5_000)
    parser.add_argument("--query-terms", type=int, default=8)
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--mu", type=float, default=2500.0)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    offsets, post_docs, post_tfs, doc_lengths = synth_postings(args.docs, args.terms, args.seed)
    term_lo, term_hi, weights, mu_cp = make_query(
        offsets, args.query_terms, float(post_tfs.sum()), args.mu, args.seed + 1
    )
    kernel_args = (post_docs, post_tfs, term_lo, term_hi, weights, mu_cp, doc_lengths, args.mu)
    n_postings = int((term_hi - term_lo).sum())
    print(
        f"{args.docs} docs, {args.terms} terms, {len(post_docs)} postings total, "
        f"{args.query_terms}-term query touching {n_postings} postings"
    )

    candidates = []
    if _kernels.NUMBA_ENABLED:
        _kernels._accumulate_numba(*kernel_args)  # compile outside the timing
        candidates.append(("numba @njit", _kernels._accumulate_numba))
    else:
        print("numba path unavailable (disabled or not importable); benchmarking numpy only")
    candidates.append(("pure numpy", _kernels.accumulate_scores_numpy))

    results = {}
    for name, fn in candidates:
        best = timed(fn, kernel_args, args.reps)
        results[name] = best
        print(f"{name:12s}  {best * 1e3:8.3f} ms/query  {n_postings / best / 1e6:8.1f} M postings/s")

    if len(results) == 2:
        numba_t = results["numba @njit"]
        numpy_t = results["pure numpy"]
        print(f"speedup: numpy/numba = {numpy_t / numba_t:.2f}x")
        hits1, scores1 = _kernels._accumulate_numba(*kernel_args)
        hits2, scores2 = _kernels.accumulate_scores_numpy(*kernel_args)
        assert (hits1 == hits2).all()
        print(f"max |score diff| on matched docs: {np.abs(scores1 - scores2).max():.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
