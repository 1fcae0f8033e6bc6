// View models mirroring the review service's JSON bodies. The console
// holds no client-only state beyond UI selection; documents change only
// through POST /documents/{id}/feedback.

export interface RunRecord {
  run_id: string;
  stage: string;
  attack: string;
  model_family: string;
  started: string;
  ended: string;
  verdict: string;
  detail: string;
  input_tokens: number;
  output_tokens: number;
  cost_usd: string;
}

export interface RunDetail {
  record: RunRecord | null;
  transcript: TranscriptEvent[];
  transcript_total: number;
  page: number;
}

export interface TranscriptEvent {
  event: string;
  index?: number;
  kind?: string;
  role?: string;
  phase?: string;
  [key: string]: unknown;
}

export interface MetricStatus {
  metric: string;
  status: "Present" | "Missing";
}

export interface GapReport {
  run_id: string;
  attack: string;
  statuses: MetricStatus[];
  notes: string;
}

export interface DocumentSummary {
  doc_id: string;
  family: string;
  attack: string;
  metric_ids: string[];
  title: string;
  revision: number;
  status: string;
}

export interface DocumentRevision {
  revision: number;
  title: string;
  importance: string;
  implementation_guidance: string[];
  placement_guidance: string;
}

export interface DocumentDetail extends DocumentSummary {
  importance: string;
  implementation_guidance: string[];
  placement_guidance: string;
  rendered: string;
  history: DocumentRevision[];
  failed_poc: string | null;
}

export type FeedbackKind = "ADD" | "REMOVE" | "MODIFY";
export type FeedbackSection =
  | "Title"
  | "Importance"
  | "ImplementationGuidance"
  | "PlacementGuidance";

export interface FeedbackBody {
  kind: FeedbackKind;
  section: FeedbackSection;
  content: string;
  anchor: number | null;
  author: string;
}

export interface JobStatus {
  job_id: string;
  doc_id: string;
  state: "running" | "done" | "error";
  runs_done: number;
  passes_so_far: number;
  verdict: "Finalized" | "Refine" | null;
  error: string;
}

export interface JobEvent extends JobStatus {}
