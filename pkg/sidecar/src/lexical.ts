import type { Scorer } from "./scorer.js";

/**
 * Deterministic lexical query-passage scorer: saturated term frequency with
 * within-request inverse document frequency and length normalization.
 * Needs no model download, so it is the default backend; scores are only
 * meaningful relative to each other within one request.
 */
export interface LexicalOptions {
  /** passages are truncated to this many tokens before scoring */
  maxTokens?: number;
}

const TOKEN_RE = /[a-z0-9]+/g;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN_RE) ?? [];
}

export class LexicalScorer implements Scorer {
  private readonly maxTokens: number;

  constructor(options: LexicalOptions = {}) {
    this.maxTokens = options.maxTokens ?? 256;
    if (this.maxTokens < 1) {
      throw new Error(`maxTokens must be >= 1, got ${this.maxTokens}`);
    }
  }

  score(query: string, passages: string[]): number[] {
    const queryTerms = [...new Set(tokenize(query))];
    const docs = passages.map((p) => tokenize(p).slice(0, this.maxTokens));
    if (queryTerms.length === 0 || docs.length === 0) {
      return docs.map(() => 0);
    }
    const n = docs.length;
    const avgLen = docs.reduce((sum, d) => sum + d.length, 0) / n || 1;

    const termFreqs = docs.map((doc) => {
      const tf = new Map<string, number>();
      for (const token of doc) {
        tf.set(token, (tf.get(token) ?? 0) + 1);
      }
      return tf;
    });
    const idf = new Map<string, number>();
    for (const term of queryTerms) {
      const df = termFreqs.reduce((count, tf) => count + (tf.has(term) ? 1 : 0), 0);
      idf.set(term, Math.log(1 + (n - df + 0.5) / (df + 0.5)));
    }

    return docs.map((doc, i) => {
      let score = 0;
      const norm = 0.5 + 1.5 * (doc.length / avgLen);
      for (const term of queryTerms) {
        const tf = termFreqs[i].get(term) ?? 0;
        if (tf > 0) {
          score += idf.get(term)! * (tf / (tf + norm));
        }
      }
      return score;
    });
  }
}
