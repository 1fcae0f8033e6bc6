// Line diff for the revision-history view: classic LCS over lines,
// small inputs only (documents are under 1500 characters by design).

export interface DiffLine {
  kind: "same" | "add" | "del";
  text: string;
}

export function diffLines(before: string, after: string): DiffLine[] {
  const a = before.split("\n");
  const b = after.split("\n");
  const rows = a.length + 1;
  const cols = b.length + 1;
  const lcs: number[][] = Array.from({ length: rows }, () => new Array(cols).fill(0));
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i]![j] =
        a[i] === b[j]
          ? lcs[i + 1]![j + 1]! + 1
          : Math.max(lcs[i + 1]![j]!, lcs[i]![j + 1]!);
    }
  }
  const out: DiffLine[] = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      out.push({ kind: "same", text: a[i]! });
      i++;
      j++;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      out.push({ kind: "del", text: a[i]! });
      i++;
    } else {
      out.push({ kind: "add", text: b[j]! });
      j++;
    }
  }
  for (; i < a.length; i++) out.push({ kind: "del", text: a[i]! });
  for (; j < b.length; j++) out.push({ kind: "add", text: b[j]! });
  return out;
}

/** Render a revision body in the same four-section shape the service uses,
 * so consecutive revisions diff meaningfully. */
export function renderRevision(rev: {
  title: string;
  importance: string;
  implementation_guidance: string[];
  placement_guidance: string;
}): string {
  const steps = rev.implementation_guidance.map((step) => `- ${step}`).join("\n");
  return (
    `**Title:** ${rev.title}\n\n**Importance:**\n${rev.importance}\n\n` +
    `**Implementation Guidance:**\n${steps}\n\n` +
    `**Placement Guidance:**\n${rev.placement_guidance}\n`
  );
}
