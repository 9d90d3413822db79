// Shapes of the /v1 API payloads this client consumes.

export interface Paper {
  canonical_id: string;
  title: string;
  best_source_position: number;
  sources: string[];
  abstract: string | null;
  year: number | null;
  citation_count: number | null;
  external_ids: Record<string, string>;
  url: string | null;
  authors: string[];
}

export interface IndexedPaper extends Paper {
  /** 1-based position in the session's stored candidate list. */
  index: number;
}

export interface RankedList {
  order: number[];
  n: number;
  method: string;
  repairs_applied: string[];
}

export interface DirectiveCheck {
  line: number;
  cites: number[];
  satisfied: boolean;
}

export interface ComplianceReport {
  sentence_count_observed: number;
  sentence_count_ok: boolean;
  word_count_observed: number;
  word_count_within: boolean;
  per_directive: DirectiveCheck[];
  unknown_citations: number[];
  fully_compliant: boolean;
}

export interface Draft {
  text: string;
  citations_used: number[];
  hallucinated_citations: number[];
  exchange_ref: string;
  plan_used: unknown | null;
  compliance: ComplianceReport | null;
  warnings: string[];
}

export interface StageErrorEntry {
  stage: string;
  code: string;
  message: string;
}

export interface SessionSummary {
  session_id: string;
  created_at: string;
  query: string | null;
  candidates: Paper[];
  ranked: RankedList | null;
  drafts: Draft[];
  stage_errors: StageErrorEntry[];
  warnings: string[];
}

export interface PapersView {
  session_id: string;
  sort: string;
  papers: IndexedPaper[];
}

export interface DraftResponse {
  session_id: string;
  draft: Draft | null;
  view_order: number[];
  view_sort: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  stage?: string | null;
  position?: number;
}
