// In-memory stand-in for the review service, speaking the same JSON
// bodies (seeded from the shared fixtures captured off the real thing).
// Lets every console test run with no primary build present.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  DocumentDetail,
  DocumentRevision,
  FeedbackBody,
  GapReport,
  JobStatus,
  RunDetail,
  RunRecord,
} from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class MockService {
  documents = new Map<string, DocumentDetail>();
  runs: RunRecord[] = loadFixture<RunRecord[]>("runs.json");
  runDetail: RunDetail = loadFixture<RunDetail>("run_detail.json");
  gapReport: GapReport = loadFixture<GapReport>("gap_report.json");
  jobs = new Map<string, JobStatus>();
  unitTestInFlight = false;
  calls: string[] = [];

  constructor() {
    const doc = loadFixture<DocumentDetail>("document.json");
    this.documents.set(doc.doc_id, doc);
  }

  /** fetch-compatible entry point for the ApiClient */
  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, "http://mock");
    const path = decodeURIComponent(url.pathname);
    const method = (init?.method ?? "GET").toUpperCase();
    this.calls.push(`${method} ${path}`);

    if (method === "GET" && path === "/runs") return jsonResponse(200, this.runs);
    const runMatch = path.match(/^\/runs\/([^/]+)$/);
    if (method === "GET" && runMatch) {
      const known = this.runs.some((run) => run.run_id === runMatch[1]);
      return known
        ? jsonResponse(200, this.runDetail)
        : jsonResponse(404, { detail: `no run ${runMatch[1]}` });
    }
    const reportMatch = path.match(/^\/runs\/([^/]+)\/report$/);
    if (method === "GET" && reportMatch) {
      const known = this.runs.some((run) => run.run_id === reportMatch[1]);
      return known
        ? jsonResponse(200, this.gapReport)
        : jsonResponse(404, { detail: "run has no gap report" });
    }

    if (method === "GET" && path === "/documents") {
      return jsonResponse(200, [...this.documents.values()]);
    }
    const docMatch = path.match(/^\/documents\/([^/]+)$/);
    if (method === "GET" && docMatch) {
      const doc = this.documents.get(docMatch[1]!);
      return doc ? jsonResponse(200, doc) : jsonResponse(404, { detail: "no such document" });
    }
    const feedbackMatch = path.match(/^\/documents\/([^/]+)\/feedback$/);
    if (method === "POST" && feedbackMatch) {
      if (this.unitTestInFlight) {
        return jsonResponse(409, { detail: "unit test in flight for this document" });
      }
      const doc = this.documents.get(feedbackMatch[1]!);
      if (!doc) return jsonResponse(404, { detail: "no such document" });
      const body = JSON.parse(String(init?.body ?? "{}")) as FeedbackBody;
      if (!["ADD", "REMOVE", "MODIFY"].includes(body.kind)) {
        return jsonResponse(422, { detail: `unknown kind ${body.kind}` });
      }
      if (body.kind !== "REMOVE" && !body.content.trim()) {
        return jsonResponse(422, { detail: `${body.kind} requires content` });
      }
      this.applyFeedback(doc, body);
      return jsonResponse(200, { doc_id: doc.doc_id, revision: doc.revision });
    }
    const unittestMatch = path.match(/^\/documents\/([^/]+)\/unittest$/);
    if (method === "POST" && unittestMatch) {
      if (this.unitTestInFlight) {
        return jsonResponse(409, { detail: "unit test already in flight" });
      }
      const doc = this.documents.get(unittestMatch[1]!);
      if (!doc) return jsonResponse(404, { detail: "no such document" });
      this.unitTestInFlight = true;
      const job: JobStatus = {
        job_id: "job-mock-1",
        doc_id: doc.doc_id,
        state: "running",
        runs_done: 0,
        passes_so_far: 0,
        verdict: null,
        error: "",
      };
      this.jobs.set(job.job_id, job);
      return jsonResponse(200, { job_id: job.job_id });
    }
    const jobMatch = path.match(/^\/jobs\/([^/]+)$/);
    if (method === "GET" && jobMatch) {
      const job = this.jobs.get(jobMatch[1]!);
      return job ? jsonResponse(200, job) : jsonResponse(404, { detail: "no such job" });
    }
    return jsonResponse(404, { detail: `unmapped ${method} ${path}` });
  };

  private applyFeedback(doc: DocumentDetail, body: FeedbackBody): void {
    const prior: DocumentRevision = {
      revision: doc.revision,
      title: doc.title,
      importance: doc.importance,
      implementation_guidance: [...doc.implementation_guidance],
      placement_guidance: doc.placement_guidance,
    };
    doc.history.push(prior);
    if (body.section === "ImplementationGuidance") {
      const steps = body.content
        .split("\n")
        .map((line) => line.replace(/^[-*+]\s+/, "").trim())
        .filter(Boolean);
      if (body.kind === "ADD") {
        const at = body.anchor ?? doc.implementation_guidance.length;
        doc.implementation_guidance.splice(at, 0, ...steps);
      } else if (body.kind === "REMOVE" && body.anchor !== null) {
        doc.implementation_guidance.splice(body.anchor, 1);
      } else if (body.kind === "MODIFY" && body.anchor !== null) {
        doc.implementation_guidance.splice(body.anchor, 1, ...steps);
      }
    } else if (body.section === "Title" && body.kind === "MODIFY") {
      doc.title = body.content.trim();
    } else if (body.section === "Importance") {
      doc.importance = body.kind === "ADD" ? `${doc.importance}\n\n${body.content}` : body.content;
    } else if (body.section === "PlacementGuidance") {
      doc.placement_guidance =
        body.kind === "ADD" ? `${doc.placement_guidance}\n\n${body.content}` : body.content;
    }
    doc.revision += 1;
    doc.status = "UnderTest";
    doc.rendered = renderLikeService(doc);
  }

  finishUnitTest(passes: number): JobStatus {
    const job = this.jobs.get("job-mock-1")!;
    job.state = "done";
    job.runs_done = 5;
    job.passes_so_far = passes;
    job.verdict = passes >= 4 ? "Finalized" : "Refine";
    this.unitTestInFlight = false;
    const doc = this.documents.get(job.doc_id);
    if (doc) doc.status = job.verdict === "Finalized" ? "Finalized" : "UnderTest";
    return job;
  }
}

function renderLikeService(doc: DocumentDetail): string {
  const steps = doc.implementation_guidance.map((step) => `- ${step}`).join("\n");
  return (
    `**Title:** ${doc.title}\n\n**Importance:**\n${doc.importance}\n\n` +
    `**Implementation Guidance:**\n${steps}\n\n` +
    `**Placement Guidance:**\n${doc.placement_guidance}\n`
  );
}
