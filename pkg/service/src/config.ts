import { readFileSync } from "node:fs";

export interface ServiceConfig {
  port: number;
  extractorId: string;
  embedderId: string;
  dim: number;
  maxInputLength: number;
  summaryCap: number;
  device: string;
  /** attempt to load real checkpoints through @xenova/transformers */
  useTransformers: boolean;
}

export const REAL_EXTRACTOR_DEFAULT = "Babelscape/rebel-large";
export const REAL_EMBEDDER_DEFAULT = "Xenova/all-MiniLM-L6-v2";

/**
 * Configuration resolves in order: JSON config file (KGMCQ_SERVICE_CONFIG or
 * first CLI argument), then environment variables, then defaults.
 */
export function configFromEnv(env: NodeJS.ProcessEnv = process.env, filePath?: string): ServiceConfig {
  const fromFile = loadConfigFile(filePath ?? env.KGMCQ_SERVICE_CONFIG);
  const useTransformers = (env.KGMCQ_SERVICE_USE_TRANSFORMERS ?? fromFile.useTransformers) === "1";
  const pick = (envKey: string, fileKey: string, fallback: string): string =>
    env[envKey] ?? fromFile[fileKey] ?? fallback;
  return {
    port: parseInt(pick("PORT", "port", "8763"), 10),
    extractorId: pick(
      "KGMCQ_SERVICE_EXTRACTOR",
      "extractor",
      useTransformers ? REAL_EXTRACTOR_DEFAULT : "pattern-fallback-v1",
    ),
    embedderId: pick(
      "KGMCQ_SERVICE_EMBEDDER",
      "embedder",
      useTransformers ? REAL_EMBEDDER_DEFAULT : "hashed-gaussian-v1",
    ),
    dim: parseInt(pick("KGMCQ_SERVICE_DIM", "dim", "384"), 10),
    maxInputLength: parseInt(pick("KGMCQ_SERVICE_MAX_INPUT", "maxInputLength", "8000"), 10),
    // over-length article text is cut at a sentence boundary, matching the
    // pipeline's own summary cap, and reported via "truncated"
    summaryCap: parseInt(pick("KGMCQ_SERVICE_SUMMARY_CAP", "summaryCap", "1200"), 10),
    device: pick("KGMCQ_SERVICE_DEVICE", "device", "cpu"),
    useTransformers,
  };
}

function loadConfigFile(filePath: string | undefined): Record<string, string> {
  if (!filePath) return {};
  const raw = JSON.parse(readFileSync(filePath, "utf-8")) as Record<string, unknown>;
  return Object.fromEntries(Object.entries(raw).map(([k, v]) => [k, String(v)]));
}

export function truncateAtSentence(text: string, cap: number): { text: string; truncated: boolean } {
  if (text.length <= cap) return { text, truncated: false };
  const head = text.slice(0, cap + 1);
  const marks = [". ", "! ", "? ", ".\n", "!\n", "?\n"];
  let best = -1;
  for (const mark of marks) {
    const at = head.lastIndexOf(mark);
    if (at >= 0) best = Math.max(best, at + mark.length - 1);
  }
  const cut = best > 0 ? head.slice(0, best).trimEnd() : text.slice(0, cap).trimEnd();
  return { text: cut, truncated: true };
}
