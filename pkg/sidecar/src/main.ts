import { LexicalScorer } from "./lexical.js";
import type { Scorer } from "./scorer.js";
import { serve } from "./server.js";
import { createTransformersScorer } from "./transformers.js";

const USAGE = `usage: node dist/main.js [--model MODEL] [--max-tokens N]

Re-ranking sidecar: reads JSON requests line by line from stdin and writes
one JSON response line per request to stdout.

options:
  --model MODEL       "lexical" (default, built-in deterministic scorer) or
                      "transformers:<model-id>" for a cross-encoder loaded
                      via @huggingface/transformers
  --max-tokens N      passage truncation length (default 256)
  -h, --help          show this help
`;

interface Args {
  model: string;
  maxTokens: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { model: "lexical", maxTokens: 256 };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "-h" || arg === "--help") {
      process.stdout.write(USAGE);
      process.exit(0);
    } else if (arg === "--model") {
      args.model = argv[++i] ?? "";
    } else if (arg === "--max-tokens") {
      args.maxTokens = Number(argv[++i]);
    } else {
      throw new Error(`unknown argument: ${arg}`);
    }
  }
  if (!Number.isInteger(args.maxTokens) || args.maxTokens < 1) {
    throw new Error(`--max-tokens must be a positive integer`);
  }
  return args;
}

async function buildScorer(args: Args): Promise<Scorer> {
  if (args.model === "lexical") {
    return new LexicalScorer({ maxTokens: args.maxTokens });
  }
  if (args.model.startsWith("transformers:")) {
    const modelId = args.model.slice("transformers:".length);
    if (!modelId) {
      throw new Error("--model transformers:<model-id> requires a model id");
    }
    return createTransformersScorer(modelId, args.maxTokens);
  }
  throw new Error(`unknown model ${args.model}`);
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const scorer = await buildScorer(args);
  process.stderr.write(`rerank-sidecar ready (model=${args.model})\n`);
  await serve(process.stdin, process.stdout, scorer);
}

main().catch((err) => {
  process.stderr.write(`error: ${(err as Error).message}\n`);
  process.exit(1);
});
