// Pure HTML-string renderers. Keeping these free of DOM APIs means the
// test suite can assert on output in plain node, and main.ts stays a
// thin glue layer.

import type { ComplianceReport, Draft, IndexedPaper, Paper } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderQuery(query: string | null): string {
  if (!query) {
    return `<div class="query-banner empty">No search query (seed-only session)</div>`;
  }
  return `<div class="query-banner">Search query: <strong>${escapeHtml(query)}</strong></div>`;
}

function cardMeta(paper: Paper): string {
  const bits: string[] = [];
  if (paper.year !== null) bits.push(String(paper.year));
  if (paper.citation_count !== null) bits.push(`cited by ${paper.citation_count}`);
  if (paper.sources.length) bits.push(paper.sources.join(" + "));
  return bits.map(escapeHtml).join(" &middot; ");
}

/** One card per candidate; ids anchor the citation links in drafts. */
export function renderCandidates(papers: IndexedPaper[]): string {
  const cards = papers.map((paper) => {
    const authors = paper.authors.slice(0, 4).join(", ");
    const abstract = paper.abstract ? escapeHtml(paper.abstract) : "(no abstract)";
    return (
      `<article class="candidate" id="paper-${paper.index}">` +
      `<h3>[${paper.index}] ${escapeHtml(paper.title)}</h3>` +
      `<p class="meta">${cardMeta(paper)}</p>` +
      (authors ? `<p class="authors">${escapeHtml(authors)}</p>` : "") +
      `<p class="abstract">${abstract}</p>` +
      `</article>`
    );
  });
  return `<section class="candidates">${cards.join("")}</section>`;
}

/** Draft text with [i] markers turned into candidate links; markers the
 * compliance report flags as unknown are visually marked instead. */
export function renderDraftText(draft: Draft): string {
  const unknown = new Set<number>([
    ...draft.hallucinated_citations,
    ...(draft.compliance?.unknown_citations ?? []),
  ]);
  const escaped = escapeHtml(draft.text);
  const linked = escaped.replace(/\[(\d+)\]/g, (whole, digits: string) => {
    const index = parseInt(digits, 10);
    if (unknown.has(index)) {
      return `<mark class="cite unknown" title="no such paper in context">${whole}</mark>`;
    }
    return `<a class="cite" href="#paper-${index}">${whole}</a>`;
  });
  const paragraphs = linked
    .split(/\n{2,}/)
    .map((p) => `<p>${p.replaceAll("\n", "<br>")}</p>`)
    .join("");
  return `<div class="draft-text">${paragraphs}</div>`;
}

function badge(ok: boolean, label: string, detail: string): string {
  const state = ok ? "ok" : "fail";
  return `<span class="badge ${state}" title="${escapeHtml(detail)}">${escapeHtml(label)}</span>`;
}

/** Per-directive compliance badges plus the overall checks. */
export function renderBadges(compliance: ComplianceReport | null): string {
  if (!compliance) {
    return `<div class="badges none">no plan attached</div>`;
  }
  const parts: string[] = [];
  parts.push(
    badge(
      compliance.sentence_count_ok,
      `sentences: ${compliance.sentence_count_observed}`,
      "observed sentence count vs plan",
    ),
  );
  parts.push(
    badge(
      compliance.word_count_within,
      `words: ${compliance.word_count_observed}`,
      "word budget is advisory (plus or minus 20%)",
    ),
  );
  for (const check of compliance.per_directive) {
    const cites = check.cites.map((c) => `[${c}]`).join(", ");
    parts.push(
      badge(check.satisfied, `line ${check.line}: ${cites}`, "planned citations on this line"),
    );
  }
  if (compliance.unknown_citations.length) {
    const markers = compliance.unknown_citations.map((c) => `[${c}]`).join(" ");
    parts.push(badge(false, `unknown citations: ${markers}`, "markers citing no known paper"));
  }
  return `<div class="badges">${parts.join("")}</div>`;
}

export interface RenderableError {
  code: string;
  message: string;
  stage?: string | null;
  position?: number | null;
  isRateLimit?: boolean;
}

/** Error banner; plan errors get a caret at the failing offset. */
export function renderError(error: RenderableError, planText?: string): string {
  const stage = error.stage ? ` <span class="stage">(stage: ${escapeHtml(error.stage)})</span>` : "";
  let body = `<strong>${escapeHtml(error.code)}</strong>: ${escapeHtml(error.message)}${stage}`;
  if (error.isRateLimit) {
    body += ` <button class="retry" data-action="retry">Retry</button>`;
  }
  if (planText !== undefined && error.position !== null && error.position !== undefined) {
    const caret = " ".repeat(error.position) + "^";
    body += `<pre class="plan-error">${escapeHtml(planText)}\n${caret}</pre>`;
  }
  return `<div class="error-banner">${body}</div>`;
}
