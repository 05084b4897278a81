import type { Triplet } from "./extractor.js";

/**
 * Decode the linearized triplet format emitted by REBEL-style seq2seq
 * relation extractors: "<triplet> subject <subj> object <obj> relation"
 * repeated, with optional <s>/</s>/<pad> wrappers.
 *
 * Pure string processing, so it can be tested without any checkpoint.
 */
export function decodeRebel(generated: string): Triplet[] {
  const text = generated.replace(/<s>|<\/s>|<pad>/g, "").trim();
  const out: Triplet[] = [];
  let subject = "";
  let object = "";
  let relation = "";
  let current: "subject" | "object" | "relation" | null = null;

  const flush = () => {
    const t = { subject: subject.trim(), relation: relation.trim(), object: object.trim() };
    if (t.subject && t.relation && t.object) {
      if (!out.some((x) => x.subject === t.subject && x.relation === t.relation && x.object === t.object)) {
        out.push(t);
      }
    }
  };

  for (const token of text.split(/(<triplet>|<subj>|<obj>)/)) {
    switch (token) {
      case "<triplet>":
        flush();
        subject = object = relation = "";
        current = "subject";
        break;
      case "<subj>":
        current = "object";
        break;
      case "<obj>":
        current = "relation";
        break;
      default:
        if (current === "subject") subject += token;
        else if (current === "object") object += token;
        else if (current === "relation") relation += token;
    }
  }
  flush();
  return out;
}
