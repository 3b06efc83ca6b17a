import * as readline from "node:readline";

import type { Scorer } from "./scorer.js";
import {
  ErrorResponse,
  ProtocolError,
  RerankResponse,
  parseRequest,
  salvageQid,
} from "./protocol.js";

/**
 * Serve the line-delimited JSON protocol until the input closes.
 *
 * Requests are handled strictly in order, one at a time (the client
 * serializes requests per connection); each response is written as a single
 * line in one write call.  Malformed requests produce an error object line
 * and the loop continues.
 */
export async function serve(
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
  scorer: Scorer,
): Promise<void> {
  const lines = readline.createInterface({ input, crlfDelay: Infinity });
  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    output.write(JSON.stringify(await handleLine(line, scorer)) + "\n");
  }
}

export async function handleLine(
  line: string,
  scorer: Scorer,
): Promise<RerankResponse | ErrorResponse> {
  let qid: string | null = null;
  try {
    const request = parseRequest(line);
    qid = request.qid;
    const scores = await scorer.score(
      request.query,
      request.candidates.map((c) => c.text),
    );
    if (scores.length !== request.candidates.length) {
      throw new Error(
        `scorer returned ${scores.length} scores for ${request.candidates.length} candidates`,
      );
    }
    for (const score of scores) {
      if (!Number.isFinite(score)) {
        throw new Error(`scorer produced a non-finite score: ${score}`);
      }
    }
    return {
      qid: request.qid,
      scores: request.candidates.map((candidate, i) => ({
        docid: candidate.docid,
        score: scores[i],
      })),
    };
  } catch (err) {
    if (err instanceof ProtocolError && err.qid !== null) {
      qid = err.qid;
    }
    if (qid === null) {
      qid = salvageQid(line);
    }
    return { qid, error: (err as Error).message };
  }
}
