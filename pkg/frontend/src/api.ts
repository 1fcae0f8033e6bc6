// Typed client over the review service. One method per documented
// endpoint, nothing else; non-2xx responses raise ApiError so views can
// surface them inline.

import type {
  DocumentDetail,
  DocumentSummary,
  FeedbackBody,
  GapReport,
  JobStatus,
  RunDetail,
  RunRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listRuns(): Promise<RunRecord[]> {
    return this.request("/runs");
  }

  getRun(runId: string, page = 0): Promise<RunDetail> {
    return this.request(`/runs/${encodeURIComponent(runId)}?page=${page}`);
  }

  getRunReport(runId: string): Promise<GapReport> {
    return this.request(`/runs/${encodeURIComponent(runId)}/report`);
  }

  listDocuments(filter: { family?: string; attack?: string } = {}): Promise<DocumentSummary[]> {
    const params = new URLSearchParams();
    if (filter.family) params.set("family", filter.family);
    if (filter.attack) params.set("attack", filter.attack);
    const query = params.toString();
    return this.request(`/documents${query ? "?" + query : ""}`);
  }

  getDocument(docId: string): Promise<DocumentDetail> {
    return this.request(`/documents/${encodeURIComponent(docId)}`);
  }

  postFeedback(docId: string, body: FeedbackBody): Promise<{ doc_id: string; revision: number }> {
    return this.request(`/documents/${encodeURIComponent(docId)}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  startUnitTest(docId: string): Promise<{ job_id: string }> {
    return this.request(`/documents/${encodeURIComponent(docId)}/unittest`, { method: "POST" });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request(`/jobs/${encodeURIComponent(jobId)}`);
  }
}
