"""TREC-style evaluation: qrels and run parsing, MAP / MRR / nDCG@3 / P@1 /
P@3 / recall@200, per-turn and mean reports.

Conventions follow trec_eval: binary metrics treat grade >= binarize_at as
relevant; nDCG uses linear gain (the raw grade) with 1/log2(rank+1) discount
and an ideal ranking built from all judged documents of the turn; means are
taken over turns that have at least one relevant judgment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .retrieval import RankedList

METRICS = ("map", "mrr", "ndcg@3", "p@1", "p@3", "recall@200")

_NDCG_CUTOFF = 3
_RECALL_CUTOFF = 200


class ParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


@dataclass
class Judgments:
    """Graded relevance on a three-point scale per (turn, passage)."""

    grades: dict = field(default_factory=dict)  # (turn_id, doc_id) -> 0|1|2

    def by_turn(self) -> dict:
        out: dict = {}
        for (turn_id, doc_id), grade in self.grades.items():
            out.setdefault(turn_id, {})[doc_id] = grade
        return out

    def turns(self) -> set:
        return {turn_id for turn_id, _ in self.grades}


@dataclass
class MetricReport:
    per_turn: dict  # metric -> {turn_id: value}
    means: dict  # metric -> value
    evaluated_turns: int
    unjudged_turns: tuple  # in the run but absent from the qrels
    no_relevant_turns: tuple  # judged but nothing at/above the threshold


def parse_qrels(path) -> Judgments:
    """Lines `turn_id 0 docid grade`, whitespace-separated."""
    grades = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(path, lineno, f"expected 4 fields, got {len(parts)}")
            turn_id, _, doc_id, grade_text = parts
            try:
                grade = int(grade_text)
            except ValueError:
                raise ParseError(path, lineno, f"non-integer grade {grade_text!r}") from None
            if grade not in (0, 1, 2):
                raise ParseError(path, lineno, f"grade must be 0, 1, or 2, got {grade}")
            key = (turn_id, doc_id)
            if key in grades:
                raise ParseError(path, lineno, f"duplicate judgment for {turn_id}/{doc_id}")
            grades[key] = grade
    return Judgments(grades=grades)


def parse_run(path) -> dict:
    """Lines `turn_id Q0 docid rank score tag`; entries are re-sorted by
    score descending then docid ascending regardless of the stated rank."""
    per_turn: dict = {}
    tags: dict = {}
    seen: set = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(path, lineno, f"expected 6 fields, got {len(parts)}")
            turn_id, _, doc_id, _, score_text, tag = parts
            try:
                score = float(score_text)
            except ValueError:
                raise ParseError(path, lineno, f"non-numeric score {score_text!r}") from None
            if (turn_id, doc_id) in seen:
                raise ParseError(path, lineno, f"duplicate result for {turn_id}/{doc_id}")
            seen.add((turn_id, doc_id))
            per_turn.setdefault(turn_id, []).append((doc_id, score))
            tags[turn_id] = tag
    out = {}
    for turn_id, entries in per_turn.items():
        entries.sort(key=lambda e: (-e[1], e[0]))
        out[turn_id] = RankedList(turn_id=turn_id, entries=entries, method_tag=tags[turn_id])
    return out


def write_run(ranked_lists: Iterable[RankedList], fh) -> None:
    """TREC run format, rank starting at 1, scores with 6 decimal places."""
    for ranked in ranked_lists:
        tag = ranked.method_tag or "convsearch"
        for rank, (doc_id, score) in enumerate(ranked.entries, 1):
            fh.write(f"{ranked.turn_id} Q0 {doc_id} {rank} {score:.6f} {tag}\n")


def _average_precision(doc_ids, relevant) -> float:
    hits = 0
    total = 0.0
    for rank, doc_id in enumerate(doc_ids, 1):
        if doc_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def _reciprocal_rank(doc_ids, relevant) -> float:
    for rank, doc_id in enumerate(doc_ids, 1):
        if doc_id in relevant:
            return 1.0 / rank
    return 0.0


def _precision_at(doc_ids, relevant, k: int) -> float:
    return sum(1 for d in doc_ids[:k] if d in relevant) / k


def _ndcg_at(doc_ids, grades: Mapping, k: int) -> float:
    dcg = sum(
        grades.get(doc_id, 0) / math.log2(rank + 1)
        for rank, doc_id in enumerate(doc_ids[:k], 1)
    )
    ideal = sorted(grades.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(rank + 1) for rank, g in enumerate(ideal, 1))
    return dcg / idcg if idcg > 0 else 0.0


def _recall_at(doc_ids, relevant, k: int) -> float:
    return sum(1 for d in doc_ids[:k] if d in relevant) / len(relevant)


def compute(
    run,
    judgments: Judgments,
    binarize_at: int = 1,
    metrics: Iterable[str] = METRICS,
) -> MetricReport:
    """Evaluate a run (mapping or iterable of RankedList) against judgments."""
    if binarize_at < 1:
        raise ValueError(f"binarize_at must be >= 1, got {binarize_at}")
    metrics = tuple(metrics)
    for name in metrics:
        if name not in METRICS:
            raise ValueError(f"unknown metric {name!r}; expected one of {METRICS}")

    if isinstance(run, Mapping):
        run_map = dict(run)
    else:
        run_map = {rl.turn_id: rl for rl in run}
    judged = judgments.by_turn()
    if not set(run_map) & set(judged):
        raise ValueError("run and judgments share no turns")

    per_turn: dict = {name: {} for name in metrics}
    unjudged = []
    no_relevant = []
    for turn_id in sorted(run_map):
        turn_grades = judged.get(turn_id)
        if turn_grades is None:
            unjudged.append(turn_id)
            continue
        relevant = {d for d, g in turn_grades.items() if g >= binarize_at}
        if not relevant:
            no_relevant.append(turn_id)
            continue
        doc_ids = run_map[turn_id].doc_ids()
        values = {
            "map": _average_precision(doc_ids, relevant),
            "mrr": _reciprocal_rank(doc_ids, relevant),
            "ndcg@3": _ndcg_at(doc_ids, turn_grades, _NDCG_CUTOFF),
            "p@1": _precision_at(doc_ids, relevant, 1),
            "p@3": _precision_at(doc_ids, relevant, 3),
            "recall@200": _recall_at(doc_ids, relevant, _RECALL_CUTOFF),
        }
        for name in metrics:
            per_turn[name][turn_id] = values[name]

    evaluated = len(next(iter(per_turn.values()))) if metrics else 0
    means = {
        name: (sum(vals.values()) / len(vals) if vals else 0.0)
        for name, vals in per_turn.items()
    }
    return MetricReport(
        per_turn=per_turn,
        means=means,
        evaluated_turns=evaluated,
        unjudged_turns=tuple(unjudged),
        no_relevant_turns=tuple(no_relevant),
    )


def write_report_tsv(report: MetricReport, fh) -> None:
    """`metric<TAB>turn_id|"all"<TAB>value` lines, per-turn then means."""
    for metric, values in report.per_turn.items():
        for turn_id in sorted(values):
            fh.write(f"{metric}\t{turn_id}\t{values[turn_id]:.6f}\n")
    for metric, value in report.means.items():
        fh.write(f"{metric}\tall\t{value:.6f}\n")


def format_report(report: MetricReport) -> str:
    """Pretty table of mean values plus turn accounting."""
    width = max(len(m) for m in report.means)
    lines = [f"{'metric'.ljust(width)}  all"]
    lines.append(f"{'-' * width}  {'-' * 8}")
    for metric, value in report.means.items():
        lines.append(f"{metric.ljust(width)}  {value:.4f}")
    lines.append("")
    lines.append(f"evaluated turns: {report.evaluated_turns}")
    if report.unjudged_turns:
        lines.append(
            f"unjudged turns ({len(report.unjudged_turns)}): "
            + " ".join(report.unjudged_turns)
        )
    if report.no_relevant_turns:
        lines.append(
            f"turns with no relevant judgment ({len(report.no_relevant_turns)}): "
            + " ".join(report.no_relevant_turns)
        )
    return "\n".join(lines)
