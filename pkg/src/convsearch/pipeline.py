"""End-to-end pipeline: rewrite -> first-stage retrieval -> re-rank -> evaluate.

The two stages may use different rewrite methods: ``stage1_method`` feeds
retrieval, ``rerank_method`` supplies the query text paired with the
stage-one candidates.  Turns whose query analyzes to nothing known yield
empty result lists instead of aborting the run.

Evaluation re-parses the emitted run files, so a pipeline invocation is
byte-for-byte equivalent to chaining the CLI subcommands by hand.
"""

from __future__ import annotations

import logging
import shlex
from dataclasses import dataclass
from pathlib import Path

from . import evaluation, rerank, retrieval, rewriting
from .index import Index

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    index_path: str = ""
    conversations_path: str = ""
    out_dir: str = ""
    stage1_method: str = "topic_shift"
    rerank_method: str = ""  # empty -> same as stage1_method
    mu: float = 2500.0
    k: int = 1000
    prf: bool = False
    fb_docs: int = 20
    fb_terms: int = 20
    gamma: float = 0.5
    depth: int = 200
    engine: str = "lexical"
    sidecar_cmd: str = ""
    sidecar_timeout: float = 60.0
    qrels_path: str = ""
    manual_path: str = ""
    cues_path: str = ""
    annotations_path: str = ""
    binarize_at: int = 1

    def resolved_rerank_method(self) -> str:
        return self.rerank_method or self.stage1_method


def _validate(cfg: PipelineConfig) -> None:
    if not cfg.index_path:
        raise StageError("config", "index_path is required")
    if not (Path(cfg.index_path) / "manifest.json").is_file():
        raise StageError("config", f"no index found at {cfg.index_path}")
    if not cfg.conversations_path:
        raise StageError("config", "conversations_path is required")
    if not Path(cfg.conversations_path).is_file():
        raise StageError("config", f"no conversations file at {cfg.conversations_path}")
    if not cfg.out_dir:
        raise StageError("config", "out_dir is required")
    for method in (cfg.stage1_method, cfg.resolved_rerank_method()):
        if method not in rewriting.STRATEGIES:
            raise StageError("config", f"unknown rewrite method {method!r}")
    if cfg.engine not in ("lexical", "external"):
        raise StageError("config", f"unknown rerank engine {cfg.engine!r}")
    if cfg.engine == "external" and not cfg.sidecar_cmd:
        raise StageError("config", "engine=external requires sidecar_cmd")


def _rewrite_all(cfg: PipelineConfig, conversations, method: str):
    cues = rewriting.load_cues(cfg.cues_path) if cfg.cues_path else None
    annotations = (
        rewriting.load_annotations(cfg.annotations_path, conversations)
        if cfg.annotations_path
        else None
    )
    pairs = []
    for conv in conversations:
        pairs.extend(
            rewriting.rewrite_conversation(
                conv, method, cues=cues, annotations=annotations
            )
        )
    return pairs


def search_queries(index, queries, params, prf_params=None, tag="ql"):
    """Run stage-one retrieval for (turn_id, text) pairs; empty queries yield
    empty ranked lists."""
    runs = []
    for turn_id, text in queries:
        terms = index.analyze(text)
        try:
            if prf_params is not None:
                first = retrieval.search(index, terms, params, turn_id, tag)
                model = retrieval.rm3_expand(index, terms, first, prf_params)
                ranked = retrieval.kl_search(index, model, params, turn_id, tag)
            else:
                ranked = retrieval.search(index, terms, params, turn_id, tag)
        except retrieval.EmptyQueryError:
            log.warning("turn %s: query analyzes to no known terms; emitting no results", turn_id)
            ranked = retrieval.RankedList(turn_id=turn_id, entries=[], method_tag=tag)
        runs.append(ranked)
    return runs


def rerank_runs(index, runs, query_map, cfg_depth, engine, mu, sidecar_cmd="", timeout=60.0, tag="rerank"):
    """Re-rank stage-one runs against (possibly different) query texts."""
    out = []
    client = None
    try:
        if engine == "external":
            client = rerank.SidecarClient(shlex.split(sidecar_cmd), timeout=timeout).start()
        for ranked in runs:
            if not ranked.entries:
                out.append(retrieval.RankedList(ranked.turn_id, [], tag))
                continue
            if ranked.turn_id not in query_map:
                raise ValueError(f"no re-rank query for turn {ranked.turn_id!r}")
            cands = rerank.make_candidates(ranked, index, query_map[ranked.turn_id], cfg_depth)
            if engine == "lexical":
                out.append(rerank.rerank_lexical(cands, index, mu, tag))
            else:
                out.append(rerank.rerank_external(cands, client, tag))
    finally:
        if client is not None:
            client.close()
    return out


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Execute all stages; returns paths of emitted artifacts and reports."""
    _validate(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    method1 = cfg.stage1_method
    method2 = cfg.resolved_rerank_method()

    try:
        index = Index.load(cfg.index_path)
    except Exception as exc:
        raise StageError("index", str(exc)) from exc

    try:
        conversations = rewriting.load_conversations(
            cfg.conversations_path, cfg.manual_path or None
        )
        rewrites1 = _rewrite_all(cfg, conversations, method1)
        paths = {"rewrites": {}}
        rewrites1_path = out_dir / f"rewrites_{method1}.tsv"
        with open(rewrites1_path, "w", encoding="utf-8") as fh:
            rewriting.write_rewrites(rewrites1, fh)
        paths["rewrites"][method1] = str(rewrites1_path)
        if method2 == method1:
            rewrites2 = rewrites1
        else:
            rewrites2 = _rewrite_all(cfg, conversations, method2)
            rewrites2_path = out_dir / f"rewrites_{method2}.tsv"
            with open(rewrites2_path, "w", encoding="utf-8") as fh:
                rewriting.write_rewrites(rewrites2, fh)
            paths["rewrites"][method2] = str(rewrites2_path)
    except (OSError, ValueError) as exc:
        raise StageError("rewrite", str(exc)) from exc

    try:
        params = retrieval.RetrievalParams(mu=cfg.mu, k=cfg.k)
        prf_params = (
            retrieval.PrfParams(fb_docs=cfg.fb_docs, fb_terms=cfg.fb_terms, gamma=cfg.gamma)
            if cfg.prf
            else None
        )
        tag1 = f"{method1}-ql-rm3" if cfg.prf else f"{method1}-ql"
        runs1 = search_queries(index, rewrites1, params, prf_params, tag1)
        run1_path = out_dir / "run_stage1.txt"
        with open(run1_path, "w", encoding="utf-8") as fh:
            evaluation.write_run(runs1, fh)
        paths["run_stage1"] = str(run1_path)
    except (OSError, ValueError) as exc:
        raise StageError("search", str(exc)) from exc

    try:
        tag2 = f"{method2}-rerank-{cfg.engine}"
        runs2 = rerank_runs(
            index,
            runs1,
            dict(rewrites2),
            cfg.depth,
            cfg.engine,
            cfg.mu,
            cfg.sidecar_cmd,
            cfg.sidecar_timeout,
            tag2,
        )
        run2_path = out_dir / "run_rerank.txt"
        with open(run2_path, "w", encoding="utf-8") as fh:
            evaluation.write_run(runs2, fh)
        paths["run_rerank"] = str(run2_path)
    except (OSError, ValueError, KeyError, rerank.SidecarError) as exc:
        raise StageError("rerank", str(exc)) from exc

    paths["report_stage1"] = None
    paths["report_rerank"] = None
    if cfg.qrels_path:
        try:
            judgments = evaluation.parse_qrels(cfg.qrels_path)
            for label, run_path in (("stage1", run1_path), ("rerank", run2_path)):
                parsed = evaluation.parse_run(run_path)
                report = evaluation.compute(parsed, judgments, binarize_at=cfg.binarize_at)
                report_path = out_dir / f"report_{label}.tsv"
                with open(report_path, "w", encoding="utf-8") as fh:
                    evaluation.write_report_tsv(report, fh)
                paths[f"report_{label}"] = report
                paths[f"report_{label}_path"] = str(report_path)
        except (OSError, ValueError) as exc:
            raise StageError("eval", str(exc)) from exc

    return paths
