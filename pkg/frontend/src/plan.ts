// Client-side mirror of the sentence-plan grammar, so the editor can
// validate before submitting and point at the failing offset. The
// service stays authoritative; this must accept exactly what it does:
//
//   plan      = "Please generate" INT "sentences" ["in" INT "words"] "."
//               directive*
//   directive = "Cite" "[i]" ("," "[j]")* ("at"|"on") "line" INT "."

export interface CiteDirective {
  line: number;
  cites: number[];
}

export interface SentencePlan {
  numSentences: number;
  numWords: number | null;
  directives: CiteDirective[];
}

export class PlanError extends Error {
  constructor(
    public readonly position: number,
    message: string,
  ) {
    super(`plan syntax error at offset ${position}: ${message}`);
    this.name = "PlanError";
  }
}

const HEADER = /please\s+generate\s+(\d+)\s+sentences(?:\s+in\s+(\d+)\s+words)?\s*\./iy;
const DIRECTIVE = /cite\s+(\[\s*\d+\s*\](?:\s*,\s*\[\s*\d+\s*\])*)\s+(?:at|on)\s+line\s+(\d+)\s*\./iy;
const CITE = /\[\s*(\d+)\s*\]/g;

function skipWhitespace(text: string, pos: number): number {
  while (pos < text.length && /\s/.test(text[pos])) pos += 1;
  return pos;
}

export function parsePlan(text: string): SentencePlan {
  let pos = skipWhitespace(text, 0);
  if (pos >= text.length) {
    throw new PlanError(pos, "plan is empty");
  }
  HEADER.lastIndex = pos;
  const header = HEADER.exec(text);
  if (!header) {
    throw new PlanError(pos, "expected 'Please generate <n> sentences [in <m> words].'");
  }
  const numSentences = parseInt(header[1], 10);
  if (numSentences < 1) {
    throw new PlanError(pos, "sentence count must be positive");
  }
  const numWords = header[2] !== undefined ? parseInt(header[2], 10) : null;
  if (numWords !== null && numWords < 1) {
    throw new PlanError(pos, "word count must be positive");
  }
  pos = HEADER.lastIndex;

  const directives: CiteDirective[] = [];
  const seen = new Set<string>();
  for (;;) {
    pos = skipWhitespace(text, pos);
    if (pos >= text.length) break;
    DIRECTIVE.lastIndex = pos;
    const directive = DIRECTIVE.exec(text);
    if (!directive) {
      throw new PlanError(pos, "expected 'Cite [i] at line <n>.'");
    }
    const cites = [...directive[1].matchAll(CITE)].map((m) => parseInt(m[1], 10));
    const line = parseInt(directive[2], 10);
    if (line < 1 || line > numSentences) {
      throw new PlanError(pos, `line ${line} is outside the planned ${numSentences} sentences`);
    }
    for (const cite of cites) {
      if (cite < 1) {
        throw new PlanError(pos, "citation indices are 1-based");
      }
      const key = `${line}:${cite}`;
      if (seen.has(key)) {
        throw new PlanError(pos, `citation [${cite}] is planned twice for line ${line}`);
      }
      seen.add(key);
    }
    directives.push({ line, cites });
    pos = DIRECTIVE.lastIndex;
  }
  return { numSentences, numWords, directives };
}

/** Canonical surface form ("at line"); inverse of parsePlan. */
export function renderPlan(plan: SentencePlan): string {
  let head = `Please generate ${plan.numSentences} sentences`;
  if (plan.numWords !== null) {
    head += ` in ${plan.numWords} words`;
  }
  const parts = [head + "."];
  for (const directive of plan.directives) {
    const cites = directive.cites.map((c) => `[${c}]`).join(", ");
    parts.push(`Cite ${cites} at line ${directive.line}.`);
  }
  return parts.join(" ");
}

/** Highest citation index the plan mentions (0 when it cites nothing). */
export function maxCite(plan: SentencePlan): number {
  let max = 0;
  for (const directive of plan.directives) {
    for (const cite of directive.cites) {
      if (cite > max) max = cite;
    }
  }
  return max;
}
