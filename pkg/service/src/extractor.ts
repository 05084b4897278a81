export interface Triplet {
  subject: string;
  relation: string;
  object: string;
}

export interface Extractor {
  id: string;
  relationTypes: number | null;
  extract(text: string): Promise<Triplet[]>;
}

const clean = (s: string) =>
  s
    .trim()
    .replace(/\s+/g, " ")
    .replace(/^["'(]+|["',.?!:;)]+$/g, "")
    .trim();

const usable = (s: string) => s.length > 0 && s.length <= 90;

function push(out: Triplet[], subject: string, relation: string, object: string): void {
  const t = { subject: clean(subject), relation, object: clean(object) };
  if (!usable(t.subject) || !usable(t.object)) return;
  if (out.some((x) => x.subject === t.subject && x.relation === t.relation && x.object === t.object)) return;
  out.push(t);
}

interface Rule {
  pattern: RegExp;
  emit(m: RegExpMatchArray, out: Triplet[]): void;
}

// Deterministic surface-pattern rules, applied per sentence in a fixed order.
// Desk-scale stand-in for a learned extractor: same text in, same graph out.
const RULES: Rule[] = [
  {
    pattern: /^(.+?) (?:is|was) an? (.+?) who (?:has )?served as (?:the )?(.+?)(?: from \d.*)?$/i,
    emit: (m, out) => {
      push(out, m[1], "is a", m[2]);
      push(out, m[1], "position held", m[3]);
    },
  },
  {
    pattern: /^(.+?),? who served as (?:the )?(.+?),? (?:was|is) born in (.+)$/i,
    emit: (m, out) => {
      push(out, m[1], "position held", m[2]);
      push(out, m[1], "born in", m[3]);
    },
  },
  {
    pattern: /^(.+?) (?:was|is|were) born in (.+)$/i,
    emit: (m, out) => push(out, m[1], "born in", m[2]),
  },
  {
    pattern: /^the (?:novel|book) (.+?) was written by (?:the )?(?:[a-z]+ )?(?:author|writer) (.+)$/i,
    emit: (m, out) => {
      push(out, m[1], "author", m[2]);
      push(out, m[1], "instance of", "novel");
    },
  },
  {
    pattern: /^(.+?) was written by (.+)$/i,
    emit: (m, out) => push(out, m[1], "author", m[2]),
  },
  {
    pattern: /^the capital of (.+?) is (.+?)(?:, (?:a|an) (.+))?$/i,
    emit: (m, out) => {
      push(out, m[1], "capital", m[2]);
      if (m[3]) push(out, m[2], "instance of", m[3]);
    },
  },
  {
    pattern: /^(.+?) is the capital(?: city)? of (.+)$/i,
    emit: (m, out) => push(out, m[1], "capital of", m[2]),
  },
  {
    // "X, a Y, created ... (the (famous )?painting) called Z"
    pattern: /^(.+?), an? (.+?), (?:created|painted) (.+)$/i,
    emit: (m, out) => {
      push(out, m[1], "is a", m[2]);
      const called = m[3].match(/(?:painting|work|piece) called (.+)$/i);
      if (called) {
        push(out, called[1], "creator", m[1]);
        push(out, called[1], "instance of", "painting");
      }
    },
  },
  {
    pattern: /^(.+?) (?:created|painted|composed) (?:the )?(?:painting |composition )?(.+)$/i,
    emit: (m, out) => {
      if (/ (?:in|by|at|for) /i.test(m[2])) return;
      push(out, m[2], "creator", m[1]);
    },
  },
  {
    // appositive: "X, a Y, ..." (no verb requirement)
    pattern: /^([^,]+), an? ([^,]+),/,
    emit: (m, out) => push(out, m[1], "is a", m[2]),
  },
  {
    pattern: /^(.+?) (?:is|was) an? (.+?)(?:,| which| who| that)/i,
    emit: (m, out) => push(out, m[1], "is a", m[2]),
  },
  {
    pattern: /^(.+?) (?:is|was) an? ([^,]+)$/i,
    emit: (m, out) => push(out, m[1], "is a", m[2]),
  },
];

const RELATION_INVENTORY = new Set([
  "is a",
  "position held",
  "born in",
  "author",
  "instance of",
  "capital",
  "capital of",
  "creator",
]);

export class PatternExtractor implements Extractor {
  readonly id: string = "pattern-fallback-v1";
  readonly relationTypes = RELATION_INVENTORY.size;

  async extract(text: string): Promise<Triplet[]> {
    const out: Triplet[] = [];
    const sentences = text
      .split(/(?<=[.!?])\s+/)
      .map((s) => s.trim().replace(/[.!?]+$/, ""))
      .filter((s) => s.length > 0);
    for (const sentence of sentences) {
      for (const rule of RULES) {
        const m = sentence.match(rule.pattern);
        if (m) rule.emit(m, out);
      }
    }
    return out;
  }
}
