// Document review: failed PoC beside the current document, the
// section-targeted feedback form, the live unit-test panel, and the
// revision history diff. No optimistic updates anywhere: the view only
// changes after the service answers 200, and a 409 (unit test in
// flight) disables the form behind an explanatory banner.

import { ApiClient, ApiError } from "../api.js";
import { diffLines, renderRevision } from "../diff.js";
import { escapeHtml } from "../html.js";
import type { StreamFactory } from "../sse.js";
import type {
  DocumentDetail,
  FeedbackKind,
  FeedbackSection,
  JobEvent,
} from "../types.js";

const PASSES_TO_FINALIZE = 4;
const RUNS_PER_TEST = 5;

export interface FormState {
  kind: FeedbackKind;
  section: FeedbackSection;
  content: string;
  anchor: number | null;
  author: string;
}

export class DocumentView {
  doc: DocumentDetail | null = null;
  job: JobEvent | null = null;
  errorBanner = "";
  infoBanner = "";
  jobInFlight = false;
  form: FormState = {
    kind: "ADD",
    section: "ImplementationGuidance",
    content: "",
    anchor: null,
    author: "",
  };
  private streamClose: (() => void) | null = null;

  constructor(
    private api: ApiClient,
    private docId: string,
    private streams: StreamFactory,
    private base = "",
  ) {}

  async load(): Promise<void> {
    this.doc = await this.api.getDocument(this.docId);
  }

  async submitFeedback(): Promise<void> {
    if (!this.doc || this.jobInFlight) return;
    this.errorBanner = "";
    this.infoBanner = "";
    try {
      const result = await this.api.postFeedback(this.docId, {
        kind: this.form.kind,
        section: this.form.section,
        content: this.form.content,
        anchor: this.form.anchor,
        author: this.form.author,
      });
      // only after the 200: refetch; never render unconfirmed state
      await this.load();
      this.infoBanner = `Revision ${result.revision} saved.`;
      this.form.content = "";
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.jobInFlight = true;
        this.errorBanner = "A unit test is running for this document; feedback is locked until it finishes.";
      } else if (error instanceof ApiError) {
        this.errorBanner = `Feedback rejected (${error.status}): ${error.message}`;
      } else {
        this.errorBanner = String(error);
      }
    }
  }

  async startUnitTest(): Promise<void> {
    if (!this.doc) return;
    this.errorBanner = "";
    try {
      const { job_id } = await this.api.startUnitTest(this.docId);
      this.jobInFlight = true;
      this.job = {
        job_id,
        doc_id: this.docId,
        state: "running",
        runs_done: 0,
        passes_so_far: 0,
        verdict: null,
        error: "",
      };
      const stream = this.streams(this.base);
      this.streamClose = () => stream.close();
      stream.onJobUpdate((event) => void this.onJobEvent(event));
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.jobInFlight = true;
        this.errorBanner = "A unit test is already running for this document.";
      } else {
        this.errorBanner = String(error);
      }
    }
  }

  async onJobEvent(event: JobEvent): Promise<void> {
    if (!this.job || event.job_id !== this.job.job_id) return;
    this.job = event;
    if (event.state !== "running") {
      this.jobInFlight = false;
      this.streamClose?.();
      this.streamClose = null;
      await this.load(); // pick up the document's new status
    }
    this.onChange?.();
  }

  /** hook for the app shell to re-render on async updates */
  onChange: (() => void) | null = null;

  // -- rendering ------------------------------------------------------------

  render(): string {
    if (!this.doc) return `<p class="loading">Loading document…</p>`;
    const doc = this.doc;
    return `
      <section class="document-view">
        <header>
          <h2>${escapeHtml(doc.title)}</h2>
          <p class="meta">${escapeHtml(doc.doc_id)} · revision ${doc.revision} ·
            <span class="status status-${doc.status.toLowerCase()}">${doc.status}</span></p>
        </header>
        ${this.errorBanner ? `<div class="banner error">${escapeHtml(this.errorBanner)}</div>` : ""}
        ${this.infoBanner ? `<div class="banner info">${escapeHtml(this.infoBanner)}</div>` : ""}
        <div class="side-by-side">
          <article class="pane poc">
            <h3>Failed PoC</h3>
            ${
              doc.failed_poc
                ? `<pre><code>${escapeHtml(doc.failed_poc)}</code></pre>`
                : `<p class="empty">No failed run recorded for this attack yet.</p>`
            }
          </article>
          <article class="pane doc">
            <h3>Document (revision ${doc.revision})</h3>
            <pre class="rendered">${escapeHtml(doc.rendered)}</pre>
          </article>
        </div>
        ${this.renderFeedbackForm()}
        ${this.renderUnitTestPanel()}
        ${this.renderHistory()}
      </section>`;
  }

  renderFeedbackForm(): string {
    const doc = this.doc!;
    const disabled = this.jobInFlight ? "disabled" : "";
    const anchors = doc.implementation_guidance
      .map(
        (step, index) =>
          `<option value="${index}">step ${index}: ${escapeHtml(step.slice(0, 60))}</option>`,
      )
      .join("");
    return `
      <form class="feedback" data-testid="feedback-form">
        ${
          this.jobInFlight
            ? `<div class="banner lock">Unit test in flight: the form unlocks when it finishes.</div>`
            : ""
        }
        <fieldset ${disabled}>
          <label>Kind
            <select name="kind">
              ${(["ADD", "REMOVE", "MODIFY"] as FeedbackKind[])
                .map((kind) => `<option ${kind === this.form.kind ? "selected" : ""}>${kind}</option>`)
                .join("")}
            </select>
          </label>
          <label>Section
            <select name="section">
              ${(
                [
                  "Title",
                  "Importance",
                  "ImplementationGuidance",
                  "PlacementGuidance",
                ] as FeedbackSection[]
              )
                .map(
                  (section) =>
                    `<option ${section === this.form.section ? "selected" : ""}>${section}</option>`,
                )
                .join("")}
            </select>
          </label>
          <label>Anchor (guidance step)
            <select name="anchor">
              <option value="">none</option>
              ${anchors}
            </select>
          </label>
          <label>Content
            <textarea name="content">${escapeHtml(this.form.content)}</textarea>
          </label>
          <button type="submit" name="submit-feedback" ${disabled}>Submit feedback</button>
        </fieldset>
      </form>`;
  }

  renderUnitTestPanel(): string {
    const job = this.job;
    let body: string;
    if (!job) {
      body = `<button name="start-unittest" ${this.jobInFlight ? "disabled" : ""}>Run 5-trial unit test</button>`;
    } else if (job.state === "running") {
      body = `<p class="live">passes <span data-testid="passes">${job.passes_so_far}</span>/${job.runs_done} (target ${PASSES_TO_FINALIZE}/${RUNS_PER_TEST})</p>`;
    } else if (job.state === "done") {
      const badge = job.verdict === "Finalized" ? "finalized" : "refine";
      body = `
        <p class="result">passes <span data-testid="passes">${job.passes_so_far}</span>/${RUNS_PER_TEST}</p>
        <span class="badge badge-${badge}" data-testid="verdict-badge">${job.verdict}</span>
        <button name="start-unittest">Run again</button>`;
    } else {
      body = `<div class="banner error">unit test failed to run: ${escapeHtml(job.error)}</div>`;
    }
    return `<section class="unittest" data-testid="unittest-panel"><h3>Unit test</h3>${body}</section>`;
  }

  renderHistory(): string {
    const doc = this.doc!;
    if (doc.history.length === 0) {
      return `<section class="history"><h3>History</h3><p class="empty">First revision.</p></section>`;
    }
    const chain = [...doc.history, {
      revision: doc.revision,
      title: doc.title,
      importance: doc.importance,
      implementation_guidance: doc.implementation_guidance,
      placement_guidance: doc.placement_guidance,
    }];
    const blocks: string[] = [];
    for (let i = chain.length - 1; i > 0; i--) {
      const newer = chain[i]!;
      const older = chain[i - 1]!;
      const lines = diffLines(renderRevision(older), renderRevision(newer))
        .map((line) => {
          const sigil = line.kind === "add" ? "+" : line.kind === "del" ? "-" : " ";
          return `<div class="diff-${line.kind}">${escapeHtml(sigil + " " + line.text)}</div>`;
        })
        .join("");
      blocks.push(
        `<details class="revision-diff" data-testid="diff-${older.revision}-${newer.revision}">
           <summary>revision ${older.revision} → ${newer.revision}</summary>
           <div class="diff">${lines}</div>
         </details>`,
      );
    }
    return `<section class="history"><h3>History</h3>${blocks.join("")}</section>`;
  }
}
