import type { ServiceConfig } from "./config.js";
import { HashedGaussianEmbedder, type Embedder } from "./embedder.js";
import { PatternExtractor, type Extractor, type Triplet } from "./extractor.js";
import { decodeRebel } from "./rebel.js";

export interface Engines {
  extractor: Extractor;
  embedder: Embedder;
}

/**
 * Real checkpoints load through @xenova/transformers when installed and
 * enabled; otherwise the deterministic fallback engines serve the protocol.
 * /health always reports which engines are actually loaded.
 */
export async function loadEngines(config: ServiceConfig): Promise<Engines> {
  if (config.useTransformers) {
    try {
      return await loadTransformerEngines(config);
    } catch (err) {
      console.error(
        `failed to load transformer checkpoints (${String(err)}); using fallback engines`,
      );
    }
  }
  return {
    extractor: new PatternExtractor(),
    embedder: new HashedGaussianEmbedder(config.dim),
  };
}

async function loadTransformerEngines(config: ServiceConfig): Promise<Engines> {
  // optional dependency: npm install @xenova/transformers
  const mod = "@xenova/transformers";
  const { pipeline } = await import(/* @vite-ignore */ mod);
  const generator = await pipeline("text2text-generation", config.extractorId);
  const featurizer = await pipeline("feature-extraction", config.embedderId);

  const extractor: Extractor = {
    id: config.extractorId,
    relationTypes: null, // checkpoint-defined inventory
    async extract(text: string): Promise<Triplet[]> {
      const [result] = await generator(text, { max_length: 256 });
      return decodeRebel(result.generated_text ?? "");
    },
  };
  const embedder: Embedder = {
    id: config.embedderId,
    dim: config.dim,
    async embed(texts: string[]): Promise<number[][]> {
      const vectors: number[][] = [];
      for (const text of texts) {
        const tensor = await featurizer(text, { pooling: "mean", normalize: true });
        vectors.push(Array.from(tensor.data as Float32Array));
      }
      return vectors;
    },
  };
  return { extractor, embedder };
}
