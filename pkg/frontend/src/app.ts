// Shell: hash routing, DOM wiring, re-render on controller changes.
// Served statically next to dist/; talks to the service on the same
// origin (or ?api=<base> for a split setup).

import { ApiClient } from "./api.js";
import { browserStream } from "./sse.js";
import { DocumentView } from "./views/document.js";
import { RunsView } from "./views/runs.js";
import { escapeHtml } from "./html.js";
import type { FeedbackKind, FeedbackSection } from "./types.js";

const base = new URLSearchParams(location.search).get("api") ?? "";
const api = new ApiClient(base);
const root = document.getElementById("app")!;

async function renderDocuments(): Promise<void> {
  const docs = await api.listDocuments();
  root.innerHTML = `
    <h2>Documents</h2>
    <ul class="documents">
      ${docs
        .map(
          (doc) => `
        <li>
          <a href="#/documents/${encodeURIComponent(doc.doc_id)}">${escapeHtml(doc.title)}</a>
          <span class="meta">${escapeHtml(doc.doc_id)} · r${doc.revision} · ${doc.status}</span>
        </li>`,
        )
        .join("")}
    </ul>`;
}

async function renderDocument(docId: string): Promise<void> {
  const view = new DocumentView(api, docId, browserStream, base);
  await view.load();

  const paint = () => {
    root.innerHTML = view.render();
    const form = root.querySelector<HTMLFormElement>("form.feedback");
    form?.addEventListener("submit", async (event) => {
      event.preventDefault();
      const data = new FormData(form);
      view.form.kind = data.get("kind") as FeedbackKind;
      view.form.section = data.get("section") as FeedbackSection;
      view.form.content = String(data.get("content") ?? "");
      const anchorRaw = String(data.get("anchor") ?? "");
      view.form.anchor = anchorRaw === "" ? null : Number(anchorRaw);
      await view.submitFeedback();
      paint();
    });
    root.querySelector<HTMLButtonElement>("button[name=start-unittest]")?.addEventListener(
      "click",
      async () => {
        await view.startUnitTest();
        paint();
      },
    );
  };
  view.onChange = paint;
  paint();
}

async function renderRuns(selected?: string): Promise<void> {
  const view = new RunsView(api);
  await view.load();
  if (selected) await view.select(selected);
  root.innerHTML = view.render();
}

async function route(): Promise<void> {
  const hash = location.hash || "#/documents";
  try {
    if (hash.startsWith("#/documents/")) {
      await renderDocument(decodeURIComponent(hash.slice("#/documents/".length)));
    } else if (hash.startsWith("#/runs/")) {
      await renderRuns(decodeURIComponent(hash.slice("#/runs/".length)));
    } else if (hash.startsWith("#/runs")) {
      await renderRuns();
    } else {
      await renderDocuments();
    }
  } catch (error) {
    root.innerHTML = `<div class="banner error">${escapeHtml(String(error))}</div>`;
  }
}

window.addEventListener("hashchange", () => void route());
void route();
