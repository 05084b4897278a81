import http from "node:http";
import type { AddressInfo } from "node:net";

import { configFromEnv, truncateAtSentence, type ServiceConfig } from "./config.js";
import { loadEngines, type Engines } from "./engines.js";

const MAX_BODY_BYTES = 1 << 20;

function readBody(req: http.IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    let size = 0;
    req.on("data", (chunk: Buffer) => {
      size += chunk.length;
      if (size > MAX_BODY_BYTES) {
        reject(new PayloadError(413, "request body too large"));
        req.destroy();
        return;
      }
      chunks.push(chunk);
    });
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

class PayloadError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

function sendJson(res: http.ServerResponse, status: number, obj: unknown): void {
  const body = JSON.stringify(obj);
  res.writeHead(status, {
    "Content-Type": "application/json; charset=utf-8",
    "Content-Length": Buffer.byteLength(body),
  });
  res.end(body);
}

/**
 * Single-lane inference queue: requests parse concurrently, model calls run
 * one at a time. Correctness over throughput at desk scale.
 */
class Serializer {
  private tail: Promise<unknown> = Promise.resolve();

  run<T>(task: () => Promise<T>): Promise<T> {
    const next = this.tail.then(task, task);
    this.tail = next.catch(() => undefined);
    return next;
  }
}

export function createServer(config: ServiceConfig, engines: Engines): http.Server {
  const queue = new Serializer();

  return http.createServer(async (req, res) => {
    try {
      if (req.method === "GET" && req.url === "/health") {
        sendJson(res, 200, {
          status: "ok",
          extractor: engines.extractor.id,
          embedder: engines.embedder.id,
          dim: engines.embedder.dim,
          max_input_length: config.maxInputLength,
          relation_types: engines.extractor.relationTypes,
          device: config.device,
        });
        return;
      }
      if (req.method !== "POST" || (req.url !== "/extract" && req.url !== "/embed")) {
        sendJson(res, 404, { error: `no such endpoint: ${req.method} ${req.url}` });
        return;
      }

      let payload: unknown;
      try {
        payload = JSON.parse(await readBody(req));
      } catch (err) {
        if (err instanceof PayloadError) {
          sendJson(res, err.status, { error: err.message });
        } else {
          sendJson(res, 400, { error: "request body is not valid JSON" });
        }
        return;
      }

      if (req.url === "/extract") {
        const text = (payload as { text?: unknown }).text;
        if (typeof text !== "string" || text.trim() === "") {
          sendJson(res, 400, { error: "'text' must be a non-empty string" });
          return;
        }
        if (text.length > config.maxInputLength) {
          sendJson(res, 413, {
            error: `input of ${text.length} chars exceeds limit ${config.maxInputLength}`,
          });
          return;
        }
        const { text: clipped, truncated } = truncateAtSentence(text, config.summaryCap);
        const triplets = await queue.run(() => engines.extractor.extract(clipped));
        sendJson(res, 200, truncated ? { triplets, truncated } : { triplets });
        return;
      }

      // /embed
      const texts = (payload as { texts?: unknown }).texts;
      if (
        !Array.isArray(texts) ||
        texts.length === 0 ||
        texts.some((t) => typeof t !== "string" || t.trim() === "")
      ) {
        sendJson(res, 400, { error: "'texts' must be a non-empty array of non-empty strings" });
        return;
      }
      const oversize = texts.find((t: string) => t.length > config.maxInputLength);
      if (oversize !== undefined) {
        sendJson(res, 413, { error: `an input exceeds limit ${config.maxInputLength}` });
        return;
      }
      const vectors = await queue.run(() => engines.embedder.embed(texts as string[]));
      sendJson(res, 200, { vectors });
    } catch (err) {
      sendJson(res, 500, { error: String(err) });
    }
  });
}

export async function startServer(
  config: ServiceConfig,
): Promise<{ server: http.Server; port: number }> {
  const engines = await loadEngines(config);
  const server = createServer(config, engines);
  await new Promise<void>((resolve) => server.listen(config.port, "127.0.0.1", resolve));
  const port = (server.address() as AddressInfo).port;
  return { server, port };
}

const isMain = process.argv[1]?.endsWith("server.js") || process.argv[1]?.endsWith("server.ts");
if (isMain) {
  const config = configFromEnv(process.env, process.argv[2]);
  startServer(config).then(({ server, port }) => {
    console.log(`kgmcq inference service listening on http://127.0.0.1:${port}`);
    const stop = () => server.close(() => process.exit(0));
    process.on("SIGINT", stop);
    process.on("SIGTERM", stop);
  });
}
