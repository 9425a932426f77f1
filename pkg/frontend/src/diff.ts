export type DiffOp = "equal" | "removed" | "added";

export interface DiffSegment {
  op: DiffOp;
  token: string;
}

/** Token-level diff via longest common subsequence; removed tokens come from
 * `a`, added ones from `b`, in display order. */
export function diffTokens(a: string[], b: string[]): DiffSegment[] {
  const n = a.length;
  const m = b.length;
  // lcs[i][j] = LCS length of a[i:], b[j:]
  const lcs: number[][] = Array.from({ length: n + 1 }, () =>
    new Array<number>(m + 1).fill(0),
  );
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i] === b[j]
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const out: DiffSegment[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j]) {
      out.push({ op: "equal", token: a[i] });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      out.push({ op: "removed", token: a[i] });
      i++;
    } else {
      out.push({ op: "added", token: b[j] });
      j++;
    }
  }
  while (i < n) out.push({ op: "removed", token: a[i++] });
  while (j < m) out.push({ op: "added", token: b[j++] });
  return out;
}

export function words(text: string): string[] {
  return text.split(/\s+/).filter((t) => t.length > 0);
}
