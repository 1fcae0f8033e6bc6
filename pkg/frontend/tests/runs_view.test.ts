import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { RunsView } from "../src/views/runs.js";
import { MockService } from "./mock_service.js";

describe("runs view", () => {
  it("lists runs with verdicts", async () => {
    const service = new MockService();
    const view = new RunsView(new ApiClient("", service.fetch));
    await view.load();
    const html = view.render();
    expect(view.runs.length).toBeGreaterThan(0);
    expect(html).toContain(view.runs[0]!.run_id);
    expect(html).toContain("verdict-failure");
  });

  it("run detail shows the per-metric gap table", async () => {
    const service = new MockService();
    const view = new RunsView(new ApiClient("", service.fetch));
    await view.load();
    await view.select(view.runs[0]!.run_id);
    const html = view.render();
    expect(html).toContain('data-testid="gap-table"');
    expect(html).toContain("presence-missing");
    expect(html).toContain("presence-present");
    expect(html).toContain("Transcript");
  });

  it("a run without a gap report renders without the table", async () => {
    const service = new MockService();
    service.gapReport = null as never;
    const originalFetch = service.fetch;
    service.fetch = async (input, init) => {
      if (String(input).endsWith("/report")) {
        return new Response(JSON.stringify({ detail: "run has no gap report" }), { status: 404 });
      }
      return originalFetch(input, init);
    };
    const view = new RunsView(new ApiClient("", service.fetch));
    await view.load();
    await view.select(view.runs[0]!.run_id);
    const html = view.render();
    expect(html).not.toContain('data-testid="gap-table"');
    expect(view.errorBanner).toBe("");
  });
});
