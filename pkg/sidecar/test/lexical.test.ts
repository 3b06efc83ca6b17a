import { describe, expect, it } from "vitest";

import { LexicalScorer, tokenize } from "../src/lexical.js";

const ON_TOPIC =
  "Tiger sharks patrol warm coastal waters, and divers often photograph " +
  "these large sharks around reefs at dusk.";
const OFF_TOPIC =
  "Maple syrup producers boil sap in early spring and grade the syrup by " +
  "color and flavor.";

describe("tokenize", () => {
  it("lowercases and strips punctuation", () => {
    expect(tokenize("Tiger sharks, sharks!")).toEqual(["tiger", "sharks", "sharks"]);
  });

  it("returns an empty list for empty text", () => {
    expect(tokenize("...")).toEqual([]);
  });
});

describe("LexicalScorer", () => {
  const scorer = new LexicalScorer();

  it("scores the on-topic passage above an off-topic one", () => {
    const query = "Tell me more about tiger sharks. tiger sharks habitats";
    const [onTopic, offTopic] = scorer.score(query, [ON_TOPIC, OFF_TOPIC]);
    expect(onTopic).toBeGreaterThan(offTopic);
  });

  it("is deterministic", () => {
    const query = "tiger sharks";
    const a = scorer.score(query, [ON_TOPIC, OFF_TOPIC]);
    const b = scorer.score(query, [ON_TOPIC, OFF_TOPIC]);
    expect(a).toEqual(b);
  });

  it("gives identical passages identical scores", () => {
    const [a, b] = scorer.score("tiger sharks", [ON_TOPIC, ON_TOPIC]);
    expect(a).toBe(b);
  });

  it("returns finite scores, zero when nothing matches", () => {
    const scores = scorer.score("quantum computers", [ON_TOPIC, OFF_TOPIC, ""]);
    for (const score of scores) {
      expect(Number.isFinite(score)).toBe(true);
    }
    expect(scores[2]).toBe(0);
  });

  it("handles empty inputs", () => {
    expect(scorer.score("anything", [])).toEqual([]);
    expect(scorer.score("", [ON_TOPIC])).toEqual([0]);
  });

  it("truncates passages to maxTokens", () => {
    const short = new LexicalScorer({ maxTokens: 3 });
    const padded = "one two three tiger sharks";
    const [scoreTruncated] = short.score("tiger sharks", [padded]);
    const [scoreFull] = new LexicalScorer().score("tiger sharks", [padded]);
    expect(scoreTruncated).toBe(0);
    expect(scoreFull).toBeGreaterThan(0);
  });

  it("rejects a non-positive truncation length", () => {
    expect(() => new LexicalScorer({ maxTokens: 0 })).toThrow(/maxTokens/);
  });
});
