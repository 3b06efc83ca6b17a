"""Command-line interface.

Subcommands wrap the module operations one-to-one (index, rewrite, search,
rerank, eval) and `pipeline` wires all stages, optionally driven by a TOML
config file with flag overrides (flags win).  Logs go to standard error;
data goes to files or standard output.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from dataclasses import fields

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import evaluation, pipeline, rerank, retrieval, rewriting
from .index import (
    Index,
    IndexStorageError,
    build_index,
    read_corpus_jsonl,
    read_corpus_tsv,
)
from .textpipe import AnalyzerConfig, default_stopwords, load_stopwords

log = logging.getLogger("convsearch")


@contextlib.contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def cmd_index(args) -> int:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
    analyzer = AnalyzerConfig(
        stopwords=stopwords, stemmer=args.stemmer, lowercase=not args.no_lowercase
    )
    reader = read_corpus_tsv if args.format == "tsv" else read_corpus_jsonl
    index = build_index(reader(args.corpus), analyzer)
    index.save(args.out)
    log.info(
        "indexed %d documents, %d terms (vocabulary %d) -> %s",
        index.doc_count, index.total_terms, index.vocab_size, args.out,
    )
    return 0


def cmd_rewrite(args) -> int:
    conversations = rewriting.load_conversations(args.conversations, args.manual)
    cues = rewriting.load_cues(args.cues) if args.cues else None
    annotations = (
        rewriting.load_annotations(args.annotations, conversations)
        if args.annotations
        else None
    )
    pairs = []
    for conv in conversations:
        pairs.extend(
            rewriting.rewrite_conversation(
                conv, args.method, cues=cues, annotations=annotations
            )
        )
    with _open_out(args.out) as fh:
        rewriting.write_rewrites(pairs, fh)
    return 0


def cmd_search(args) -> int:
    index = Index.load(args.index)
    queries = rewriting.read_rewrites(args.queries)
    params = retrieval.RetrievalParams(mu=args.mu, k=args.k)
    prf_params = (
        retrieval.PrfParams(fb_docs=args.fb_docs, fb_terms=args.fb_terms, gamma=args.gamma)
        if args.prf
        else None
    )
    runs = pipeline.search_queries(index, queries, params, prf_params, args.tag)
    with _open_out(args.out) as fh:
        evaluation.write_run(runs, fh)
    return 0


def cmd_rerank(args) -> int:
    index = Index.load(args.index)
    runs = list(evaluation.parse_run(args.run).values())
    query_map = dict(rewriting.read_rewrites(args.queries))
    reranked = pipeline.rerank_runs(
        index,
        runs,
        query_map,
        args.depth,
        args.engine,
        args.mu,
        sidecar_cmd=args.sidecar or "",
        timeout=args.timeout,
        tag=args.tag,
    )
    with _open_out(args.out) as fh:
        evaluation.write_run(reranked, fh)
    return 0


def cmd_eval(args) -> int:
    judgments = evaluation.parse_qrels(args.qrels)
    run = evaluation.parse_run(args.run)
    metrics = evaluation.METRICS
    if args.metrics:
        metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    report = evaluation.compute(run, judgments, binarize_at=args.binarize_at, metrics=metrics)
    if args.out:
        with _open_out(args.out) as fh:
            evaluation.write_report_tsv(report, fh)
    print(evaluation.format_report(report))
    return 0


_PIPELINE_KEYS = {f.name for f in fields(pipeline.PipelineConfig)}


def cmd_pipeline(args) -> int:
    values = {}
    if args.config:
        with open(args.config, "rb") as fh:
            loaded = tomllib.load(fh)
        unknown = set(loaded) - _PIPELINE_KEYS
        if unknown:
            raise ValueError(f"unknown pipeline config key(s): {', '.join(sorted(unknown))}")
        values.update(loaded)
    overrides = {
        "index_path": args.index,
        "conversations_path": args.conversations,
        "out_dir": args.out_dir,
        "stage1_method": args.stage1,
        "rerank_method": args.rerank_method,
        "mu": args.mu,
        "k": args.k,
        "prf": args.prf,
        "fb_docs": args.fb_docs,
        "fb_terms": args.fb_terms,
        "gamma": args.gamma,
        "depth": args.depth,
        "engine": args.engine,
        "sidecar_cmd": args.sidecar,
        "sidecar_timeout": args.timeout,
        "qrels_path": args.qrels,
        "manual_path": args.manual,
        "cues_path": args.cues,
        "annotations_path": args.annotations,
        "binarize_at": args.binarize_at,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = pipeline.PipelineConfig(**values)
    result = pipeline.run_pipeline(cfg)
    for label in ("stage1", "rerank"):
        report = result.get(f"report_{label}")
        if report is not None:
            print(f"== {label} ==")
            print(evaluation.format_report(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convsearch",
        description="Conversational passage search pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logs on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an inverted index from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--out", required=True, help="index directory")
    p.add_argument("--stopwords", help="stopword list file (default: bundled list)")
    p.add_argument("--stemmer", choices=("porter", "none"), default="porter")
    p.add_argument("--no-lowercase", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("rewrite", help="rewrite conversation utterances")
    p.add_argument("--conversations", required=True, help="conversations JSON")
    p.add_argument("--method", required=True, choices=rewriting.STRATEGIES)
    p.add_argument("--out", default="-", help="output TSV (default stdout)")
    p.add_argument("--manual", help="manual rewrites TSV (turn_id<TAB>text)")
    p.add_argument("--cues", help="cue lexicon file, one phrase per line")
    p.add_argument("--annotations", help="external annotations JSONL")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("search", help="first-stage retrieval for query TSV")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True, help="TSV turn_id<TAB>text")
    p.add_argument("--out", default="-", help="TREC run output (default stdout)")
    p.add_argument("--mu", type=float, default=2500.0)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--prf", action="store_true", help="enable RM3 feedback")
    p.add_argument("--fb-docs", type=int, default=20)
    p.add_argument("--fb-terms", type=int, default=20)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--tag", default="ql", help="run tag written to the TREC output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rerank", help="re-rank the top candidates of a run")
    p.add_argument("--index", required=True)
    p.add_argument("--run", required=True, help="stage-one TREC run file")
    p.add_argument("--queries", required=True, help="re-rank query TSV")
    p.add_argument("--out", default="-")
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--engine", choices=("lexical", "external"), default="lexical")
    p.add_argument("--sidecar", help="sidecar command line (engine=external)")
    p.add_argument("--mu", type=float, default=2500.0)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--tag", default="rerank")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="evaluate a run against qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--metrics", help="comma-separated subset of " + ",".join(evaluation.METRICS))
    p.add_argument("--binarize-at", type=int, default=1)
    p.add_argument("--out", help="also write a per-turn TSV report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run rewrite/search/rerank/eval end to end")
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--index")
    p.add_argument("--conversations")
    p.add_argument("--out-dir")
    p.add_argument("--stage1", help="rewrite method for first-stage retrieval")
    p.add_argument("--rerank-method", help="rewrite method for re-ranking (default: stage1)")
    p.add_argument("--mu", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--prf", action="store_const", const=True, default=None)
    p.add_argument("--fb-docs", type=int)
    p.add_argument("--fb-terms", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--engine", choices=("lexical", "external"))
    p.add_argument("--sidecar")
    p.add_argument("--timeout", type=float)
    p.add_argument("--qrels")
    p.add_argument("--manual")
    p.add_argument("--cues")
    p.add_argument("--annotations")
    p.add_argument("--binarize-at", type=int)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (
        ValueError,
        OSError,
        KeyError,
        IndexStorageError,
        rerank.SidecarError,
        pipeline.StageError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
