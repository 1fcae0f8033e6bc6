// Acceptance-facing console behavior, against the mocked service only:
// feedback produces revision 2 in the UI; the unit-test panel follows a
// 4/5 event stream to a Finalized badge; 409 locks the form.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { scriptedStream } from "../src/sse.js";
import { DocumentView } from "../src/views/document.js";
import type { JobEvent } from "../src/types.js";
import { MockService, loadFixture } from "./mock_service.js";

const M3 = "scripted:spectre-v1:M3";

function makeView(service: MockService, stream: JobEvent[] = []) {
  const api = new ApiClient("", service.fetch);
  return new DocumentView(api, M3, () => scriptedStream(stream));
}

describe("document review", () => {
  it("renders the document beside the failed PoC", async () => {
    const service = new MockService();
    const view = makeView(service);
    await view.load();
    const html = view.render();
    expect(html).toContain("Controlled Branch Misprediction");
    expect(html).toContain("revision 1");
    expect(html).toContain("Failed PoC");
    expect(html).toContain("**Title:**");
  });

  it("submitting ADD feedback shows revision 2 with the new content", async () => {
    const service = new MockService();
    const view = makeView(service);
    await view.load();
    view.form = {
      kind: "ADD",
      section: "ImplementationGuidance",
      content:
        "- Interleave safe and malicious index values within the same loop.\n" +
        "- Example: index = a + cond * (b - a); where cond = !(j % 6).",
      anchor: null,
      author: "expert",
    };
    await view.submitFeedback();
    const html = view.render();
    expect(view.doc?.revision).toBe(2);
    expect(html).toContain("revision 2");
    expect(html).toContain("index = a + cond * (b - a);");
    expect(html).toContain("Revision 2 saved.");
    // revision history carries the r1 -> r2 diff
    expect(html).toContain('data-testid="diff-1-2"');
    expect(html).toContain("diff-add");
  });

  it("never renders unconfirmed state: a 422 leaves the document untouched", async () => {
    const service = new MockService();
    const view = makeView(service);
    await view.load();
    view.form = { kind: "ADD", section: "Importance", content: "   ", anchor: null, author: "" };
    await view.submitFeedback();
    expect(view.doc?.revision).toBe(1);
    const html = view.render();
    expect(html).toContain("Feedback rejected (422)");
    expect(html).toContain("revision 1");
  });

  it("409 during an in-flight unit test disables the form with a banner", async () => {
    const service = new MockService();
    const view = makeView(service);
    await view.load();
    service.unitTestInFlight = true;
    view.form.content = "some refinement";
    await view.submitFeedback();
    expect(view.jobInFlight).toBe(true);
    const html = view.render();
    expect(html).toContain("fieldset disabled");
    expect(html).toContain("Unit test in flight");
    expect(html).toContain("feedback is locked");
    expect(view.doc?.revision).toBe(1);
  });

  it("unit-test panel counts passes live and lands on a Finalized badge at 4/5", async () => {
    const service = new MockService();
    const stream = loadFixture<JobEvent[]>("job_stream.json").map((event) => ({
      ...event,
      job_id: "job-mock-1",
    }));
    const view = makeView(service, stream);
    await view.load();
    const snapshots: Array<{ passes: number; state: string }> = [];
    view.onChange = () => {
      if (view.job) snapshots.push({ passes: view.job.passes_so_far, state: view.job.state });
    };
    await view.startUnitTest();
    // let the scripted stream flush its microtask queue
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(snapshots.map((s) => s.passes)).toEqual([1, 2, 3, 3, 4, 4]);
    const html = view.render();
    expect(html).toContain('data-testid="verdict-badge"');
    expect(html).toContain(">Finalized<");
    expect(html).toContain('data-testid="passes">4</span>/5');
    expect(view.jobInFlight).toBe(false);
  });

  it("a 3/5 stream lands on a Refine badge", async () => {
    const service = new MockService();
    const stream: JobEvent[] = [1, 2, 3, 3, 3].map((passes, index) => ({
      job_id: "job-mock-1",
      doc_id: M3,
      state: "running",
      runs_done: index + 1,
      passes_so_far: passes,
      verdict: null,
      error: "",
    }));
    stream.push({
      job_id: "job-mock-1", doc_id: M3, state: "done",
      runs_done: 5, passes_so_far: 3, verdict: "Refine", error: "",
    });
    const view = makeView(service, stream);
    await view.load();
    await view.startUnitTest();
    await new Promise((resolve) => setTimeout(resolve, 0));
    const html = view.render();
    expect(html).toContain(">Refine<");
  });
});
