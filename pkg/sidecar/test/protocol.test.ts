import { describe, expect, it } from "vitest";

import { ProtocolError, parseRequest, salvageQid } from "../src/protocol.js";

describe("parseRequest", () => {
  it("accepts a well-formed request", () => {
    const request = parseRequest(
      JSON.stringify({
        qid: "31_1",
        query: "tiger sharks",
        candidates: [{ docid: "d1", text: "about sharks" }],
      }),
    );
    expect(request.qid).toBe("31_1");
    expect(request.candidates).toHaveLength(1);
  });

  it("accepts zero candidates", () => {
    const request = parseRequest(
      JSON.stringify({ qid: "q", query: "x", candidates: [] }),
    );
    expect(request.candidates).toEqual([]);
  });

  it("rejects non-JSON", () => {
    expect(() => parseRequest("not json")).toThrow(ProtocolError);
  });

  it("rejects a missing qid", () => {
    expect(() =>
      parseRequest(JSON.stringify({ query: "x", candidates: [] })),
    ).toThrow(/qid/);
  });

  it("rejects a non-string query but keeps the qid", () => {
    try {
      parseRequest(JSON.stringify({ qid: "q7", query: 5, candidates: [] }));
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ProtocolError);
      expect((err as ProtocolError).qid).toBe("q7");
    }
  });

  it("rejects bad candidate entries with their position", () => {
    expect(() =>
      parseRequest(
        JSON.stringify({
          qid: "q",
          query: "x",
          candidates: [{ docid: "d1", text: "ok" }, { docid: 2, text: "bad" }],
        }),
      ),
    ).toThrow(/candidate 1/);
  });
});

describe("salvageQid", () => {
  it("extracts a qid from broken-but-parseable requests", () => {
    expect(salvageQid(JSON.stringify({ qid: "q1", candidates: 5 }))).toBe("q1");
  });

  it("returns null otherwise", () => {
    expect(salvageQid("garbage")).toBeNull();
    expect(salvageQid(JSON.stringify({ qid: 3 }))).toBeNull();
  });
});
