// Runs list and run detail: the record, a transcript excerpt, and the
// per-metric gap table when the run produced a gap report.

import { ApiClient, ApiError } from "../api.js";
import { escapeHtml } from "../html.js";
import type { GapReport, RunDetail, RunRecord } from "../types.js";

export class RunsView {
  runs: RunRecord[] = [];
  selected: RunDetail | null = null;
  report: GapReport | null = null;
  errorBanner = "";

  constructor(private api: ApiClient) {}

  async load(): Promise<void> {
    this.runs = await this.api.listRuns();
  }

  async select(runId: string): Promise<void> {
    this.errorBanner = "";
    this.selected = await this.api.getRun(runId);
    this.report = null;
    try {
      this.report = await this.api.getRunReport(runId);
    } catch (error) {
      if (!(error instanceof ApiError && error.status === 404)) {
        this.errorBanner = String(error);
      }
    }
  }

  render(): string {
    const rows = this.runs
      .map(
        (run) => `
        <tr data-run-id="${escapeHtml(run.run_id)}">
          <td><a href="#/runs/${encodeURIComponent(run.run_id)}">${escapeHtml(run.run_id)}</a></td>
          <td>${escapeHtml(run.stage)}</td>
          <td>${escapeHtml(run.attack)}</td>
          <td class="verdict-${run.verdict.toLowerCase()}">${escapeHtml(run.verdict)}</td>
          <td>${run.input_tokens + run.output_tokens}</td>
          <td>${escapeHtml(run.cost_usd)}</td>
        </tr>`,
      )
      .join("");
    const table = `
      <table class="runs">
        <thead><tr><th>run</th><th>stage</th><th>attack</th><th>verdict</th><th>tokens</th><th>cost</th></tr></thead>
        <tbody>${rows || `<tr><td colspan="6" class="empty">no runs yet</td></tr>`}</tbody>
      </table>`;
    return `<section class="runs-view"><h2>Runs</h2>${table}${this.renderDetail()}</section>`;
  }

  renderDetail(): string {
    if (!this.selected) return "";
    const record = this.selected.record;
    const header = record
      ? `<p class="meta">${escapeHtml(record.run_id)} · ${escapeHtml(record.verdict)}
         ${record.detail ? "· " + escapeHtml(record.detail) : ""}</p>`
      : "";
    const transcript = this.selected.transcript
      .filter((event) => event.event === "node")
      .slice(0, 50)
      .map(
        (event) =>
          `<li class="node node-${escapeHtml(String(event.kind))}">
             #${event.index} ${escapeHtml(String(event.kind))}${event.role ? " · " + escapeHtml(String(event.role)) : ""}
           </li>`,
      )
      .join("");
    return `
      <section class="run-detail">
        <h3>Run detail</h3>
        ${header}
        ${this.errorBanner ? `<div class="banner error">${escapeHtml(this.errorBanner)}</div>` : ""}
        ${this.renderGapTable()}
        <h4>Transcript (${this.selected.transcript_total} events)</h4>
        <ol class="transcript">${transcript}</ol>
      </section>`;
  }

  renderGapTable(): string {
    if (!this.report) return "";
    const rows = this.report.statuses
      .map(
        (status) => `
        <tr data-metric="${escapeHtml(status.metric)}">
          <td>${escapeHtml(status.metric)}</td>
          <td class="presence-${status.status.toLowerCase()}">${status.status}</td>
        </tr>`,
      )
      .join("");
    return `
      <h4>Gap report</h4>
      <table class="gap-table" data-testid="gap-table">
        <thead><tr><th>metric</th><th>status</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>`;
  }
}
