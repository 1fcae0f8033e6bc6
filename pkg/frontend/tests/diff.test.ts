import { describe, expect, it } from "vitest";

import { diffLines, renderRevision } from "../src/diff.js";

describe("diffLines", () => {
  it("marks identical input as all-same", () => {
    const diff = diffLines("a\nb", "a\nb");
    expect(diff).toEqual([
      { kind: "same", text: "a" },
      { kind: "same", text: "b" },
    ]);
  });

  it("classifies an inserted line", () => {
    const diff = diffLines("a\nc", "a\nb\nc");
    expect(diff).toEqual([
      { kind: "same", text: "a" },
      { kind: "add", text: "b" },
      { kind: "same", text: "c" },
    ]);
  });

  it("classifies a removed line", () => {
    const diff = diffLines("a\nb\nc", "a\nc");
    expect(diff).toEqual([
      { kind: "same", text: "a" },
      { kind: "del", text: "b" },
      { kind: "same", text: "c" },
    ]);
  });

  it("round-trips: same+del recovers before, same+add recovers after", () => {
    const before = "one\ntwo\nthree\nfour";
    const after = "one\n2\nthree\nfour\nfive";
    const diff = diffLines(before, after);
    const recoveredBefore = diff
      .filter((line) => line.kind !== "add")
      .map((line) => line.text)
      .join("\n");
    const recoveredAfter = diff
      .filter((line) => line.kind !== "del")
      .map((line) => line.text)
      .join("\n");
    expect(recoveredBefore).toBe(before);
    expect(recoveredAfter).toBe(after);
  });
});

describe("renderRevision", () => {
  it("emits the four-section shape used by the service", () => {
    const text = renderRevision({
      title: "T",
      importance: "Why.",
      implementation_guidance: ["step one", "step two"],
      placement_guidance: "Where.",
    });
    expect(text).toContain("**Title:** T");
    expect(text).toContain("**Importance:**\nWhy.");
    expect(text).toContain("- step one\n- step two");
    expect(text).toContain("**Placement Guidance:**\nWhere.");
  });
});
