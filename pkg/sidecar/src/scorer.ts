/** A relevance model: one score per passage, higher = more relevant. */
export interface Scorer {
  score(query: string, passages: string[]): number[] | Promise<number[]>;
}
