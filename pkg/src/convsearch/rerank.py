"""Second-stage re-ranking of the top-k first-stage candidates.

Two engines share one contract (output is a permutation of the candidate
set, ties broken by stage-one rank):

* ``rerank_lexical`` re-scores candidates with the query-likelihood scorer,
  a deterministic stand-in for a neural re-ranker;
* ``rerank_external`` delegates scoring to a sidecar process speaking
  line-delimited JSON over stdin/stdout, one request in flight at a time.

The re-ranking query may come from a different rewrite method than the one
that produced the stage-one run.
"""

from __future__ import annotations

import json
import logging
import os
import selectors
import subprocess
from dataclasses import dataclass

from .index import Index
from .retrieval import EmptyQueryError, RankedList, ql_score

log = logging.getLogger(__name__)


class UnknownDocumentError(KeyError):
    pass


class SidecarError(Exception):
    pass


class SidecarProtocolError(SidecarError):
    pass


class SidecarTimeoutError(SidecarError):
    pass


class SidecarExitError(SidecarError):
    pass


@dataclass(frozen=True)
class RerankParams:
    depth: int = 200
    engine: str = "lexical"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.engine not in ("lexical", "external"):
            raise ValueError(f"unknown rerank engine {self.engine!r}")


@dataclass(frozen=True)
class Candidate:
    external_id: str
    text: str
    stage_score: float


@dataclass
class CandidateSet:
    turn_id: str
    query_text: str
    candidates: list


def make_candidates(run: RankedList, index: Index, query_text: str, depth: int = 200) -> CandidateSet:
    """First min(depth, |run|) stage-one entries with stored texts attached."""
    if not run.entries:
        raise ValueError(f"cannot build candidates from an empty run for turn {run.turn_id!r}")
    candidates = []
    for doc_id, score in run.entries[:depth]:
        try:
            text = index.doc_text(doc_id)
        except KeyError:
            raise UnknownDocumentError(
                f"run for turn {run.turn_id!r} references unknown document {doc_id!r}"
            ) from None
        candidates.append(Candidate(external_id=doc_id, text=text, stage_score=score))
    return CandidateSet(turn_id=run.turn_id, query_text=query_text, candidates=candidates)


def _order_by(scores, cands) -> list:
    """Sort candidate positions by score descending, ties by stage-one rank."""
    return sorted(range(len(cands)), key=lambda i: (-scores[i], i))


def rerank_lexical(
    cands: CandidateSet,
    index: Index,
    mu: float = 2500.0,
    method_tag: str = "rerank-lexical",
) -> RankedList:
    """Re-score candidates by query likelihood of the re-ranking query.

    A query that analyzes to nothing known leaves the stage-one order
    unchanged (identity re-rank, logged).
    """
    terms = index.analyze(cands.query_text)
    try:
        scores = [ql_score(index, c.external_id, terms, mu) for c in cands.candidates]
    except EmptyQueryError:
        log.warning(
            "turn %s: re-rank query analyzes to no known terms; keeping stage-one order",
            cands.turn_id,
        )
        entries = [(c.external_id, c.stage_score) for c in cands.candidates]
        return RankedList(turn_id=cands.turn_id, entries=entries, method_tag=method_tag)

    order = _order_by(scores, cands.candidates)
    entries = [(cands.candidates[i].external_id, scores[i]) for i in order]
    return RankedList(turn_id=cands.turn_id, entries=entries, method_tag=method_tag)


def rerank_external(
    cands: CandidateSet,
    sidecar: "SidecarClient",
    method_tag: str = "rerank-external",
) -> RankedList:
    """Re-rank by sidecar scores; candidates missing from the response get
    -inf and fall to the bottom in stage-one order."""
    response = sidecar.score(
        cands.turn_id,
        cands.query_text,
        [(c.external_id, c.text) for c in cands.candidates],
    )
    missing = [c.external_id for c in cands.candidates if c.external_id not in response]
    if missing:
        log.warning(
            "turn %s: sidecar response missing %d candidate(s): %s",
            cands.turn_id, len(missing), " ".join(missing),
        )
    scores = [response.get(c.external_id, float("-inf")) for c in cands.candidates]
    order = _order_by(scores, cands.candidates)
    entries = [(cands.candidates[i].external_id, scores[i]) for i in order]
    return RankedList(turn_id=cands.turn_id, entries=entries, method_tag=method_tag)


class SidecarClient:
    """One sidecar process; requests are strictly serialized per connection.

    Protocol (line-delimited JSON over the sidecar's stdin/stdout):
      request  {"qid": ..., "query": ..., "candidates": [{"docid", "text"}]}
      response {"qid": ..., "scores": [{"docid", "score"}]}
    """

    def __init__(self, command, timeout: float = 60.0):
        self.command = list(command)
        self.timeout = timeout
        self._proc = None
        self._buffer = b""

    def start(self) -> "SidecarClient":
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                )
            except OSError as exc:
                raise SidecarExitError(f"cannot start sidecar {self.command}: {exc}") from exc
            os.set_blocking(self._proc.stdout.fileno(), False)
        return self

    def __enter__(self) -> "SidecarClient":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def score(self, qid: str, query: str, candidates) -> dict:
        if self._proc is None:
            self.start()
        request = {
            "qid": qid,
            "query": query,
            "candidates": [{"docid": d, "text": t} for d, t in candidates],
        }
        payload = (json.dumps(request, ensure_ascii=False) + "\n").encode("utf-8")
        try:
            self._proc.stdin.write(payload)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            code = self._proc.poll()
            raise SidecarExitError(f"sidecar pipe closed (exit status {code}): {exc}") from exc

        line = self._read_line()
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SidecarProtocolError(f"malformed sidecar response: {line[:200]!r}") from exc
        if not isinstance(obj, dict):
            raise SidecarProtocolError(f"malformed sidecar response: {line[:200]!r}")
        if "error" in obj:
            raise SidecarProtocolError(f"sidecar reported an error for qid {obj.get('qid')!r}: {obj['error']}")
        if obj.get("qid") != qid:
            raise SidecarProtocolError(f"response qid {obj.get('qid')!r} does not match request {qid!r}")
        scores = obj.get("scores")
        if not isinstance(scores, list):
            raise SidecarProtocolError("sidecar response lacks a scores array")
        out = {}
        for item in scores:
            try:
                out[str(item["docid"])] = float(item["score"])
            except (TypeError, KeyError, ValueError) as exc:
                raise SidecarProtocolError(f"bad score entry {item!r}") from exc
        return out

    def _read_line(self) -> bytes:
        sel = selectors.DefaultSelector()
        sel.register(self._proc.stdout, selectors.EVENT_READ)
        try:
            while b"\n" not in self._buffer:
                if not sel.select(self.timeout):
                    raise SidecarTimeoutError(
                        f"no sidecar response within {self.timeout}s"
                    )
                chunk = self._proc.stdout.read(65536)
                if chunk is None:
                    continue
                if chunk == b"":
                    code = self._proc.poll()
                    raise SidecarExitError(
                        f"sidecar exited (status {code}) before responding"
                    )
                self._buffer += chunk
        finally:
            sel.close()
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line
