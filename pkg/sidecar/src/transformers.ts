import type { Scorer } from "./scorer.js";

/**
 * Optional cross-encoder backend.  Loads a sequence-classification model
 * (e.g. a ms-marco cross-encoder) through @huggingface/transformers, which
 * must be installed separately and be able to fetch the model weights.
 * Inference-only, no dropout: deterministic for a fixed model.
 */
export async function createTransformersScorer(
  modelId: string,
  maxTokens: number,
): Promise<Scorer> {
  const packageName = "@huggingface/transformers";
  let mod: any;
  try {
    mod = await import(packageName);
  } catch (err) {
    throw new Error(
      `cannot load ${packageName} (install it to use transformer models): ${(err as Error).message}`,
    );
  }
  const tokenizer = await mod.AutoTokenizer.from_pretrained(modelId);
  const model = await mod.AutoModelForSequenceClassification.from_pretrained(modelId);

  return {
    async score(query: string, passages: string[]): Promise<number[]> {
      if (passages.length === 0) {
        return [];
      }
      const inputs = await tokenizer(new Array(passages.length).fill(query), {
        text_pair: passages,
        padding: true,
        truncation: true,
        max_length: maxTokens,
      });
      const { logits } = await model(inputs);
      const flat: number[] = Array.from(logits.data as Iterable<number>);
      const perPassage = flat.length / passages.length;
      // single-logit heads score directly; two-logit heads use the positive class
      return passages.map((_, i) =>
        perPassage === 1 ? flat[i] : flat[i * perPassage + perPassage - 1],
      );
    },
  };
}
