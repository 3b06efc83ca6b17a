/**
 * Wire protocol types and request validation.
 *
 * Requests arrive one JSON object per line:
 *   {"qid": "...", "query": "...", "candidates": [{"docid": "...", "text": "..."}]}
 * Responses carry one score per candidate (duplicates included, any order):
 *   {"qid": "...", "scores": [{"docid": "...", "score": 1.5}]}
 * A malformed request yields {"qid": ..., "error": "..."} and the server
 * keeps serving.
 */

export interface CandidateInput {
  docid: string;
  text: string;
}

export interface RerankRequest {
  qid: string;
  query: string;
  candidates: CandidateInput[];
}

export interface ScoredCandidate {
  docid: string;
  score: number;
}

export interface RerankResponse {
  qid: string;
  scores: ScoredCandidate[];
}

export interface ErrorResponse {
  qid: string | null;
  error: string;
}

export class ProtocolError extends Error {
  constructor(message: string, readonly qid: string | null = null) {
    super(message);
    this.name = "ProtocolError";
  }
}

/** Best-effort qid extraction so error responses can still name the request. */
export function salvageQid(line: string): string | null {
  try {
    const value = JSON.parse(line);
    if (value && typeof value === "object" && typeof (value as any).qid === "string") {
      return (value as any).qid;
    }
  } catch {
    // not JSON at all
  }
  return null;
}

export function parseRequest(line: string): RerankRequest {
  let value: unknown;
  try {
    value = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`request is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ProtocolError("request must be a JSON object", salvageQid(line));
  }
  const obj = value as Record<string, unknown>;
  const qid = obj.qid;
  if (typeof qid !== "string") {
    throw new ProtocolError("request field 'qid' must be a string");
  }
  if (typeof obj.query !== "string") {
    throw new ProtocolError("request field 'query' must be a string", qid);
  }
  if (!Array.isArray(obj.candidates)) {
    throw new ProtocolError("request field 'candidates' must be an array", qid);
  }
  const candidates: CandidateInput[] = obj.candidates.map((entry, i) => {
    if (typeof entry !== "object" || entry === null) {
      throw new ProtocolError(`candidate ${i} must be an object`, qid);
    }
    const { docid, text } = entry as Record<string, unknown>;
    if (typeof docid !== "string") {
      throw new ProtocolError(`candidate ${i} field 'docid' must be a string`, qid);
    }
    if (typeof text !== "string") {
      throw new ProtocolError(`candidate ${i} field 'text' must be a string`, qid);
    }
    return { docid, text };
  });
  return { qid, query: obj.query as string, candidates };
}
