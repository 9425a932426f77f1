import { describe, expect, it } from "vitest";

import { diffTokens, words } from "../src/diff.js";

describe("diffTokens", () => {
  it("marks the single differing token", () => {
    const diff = diffTokens(
      words("Die Sonden werden unerwartet schneller."),
      words("Die Sonden werden erwartet schneller."),
    );
    expect(diff).toEqual([
      { op: "equal", token: "Die" },
      { op: "equal", token: "Sonden" },
      { op: "equal", token: "werden" },
      { op: "removed", token: "unerwartet" },
      { op: "added", token: "erwartet" },
      { op: "equal", token: "schneller." },
    ]);
  });

  it("handles a pure deletion", () => {
    const diff = diffTokens(words("Das ist nicht wahr."), words("Das ist wahr."));
    expect(diff).toEqual([
      { op: "equal", token: "Das" },
      { op: "equal", token: "ist" },
      { op: "removed", token: "nicht" },
      { op: "equal", token: "wahr." },
    ]);
  });

  it("handles disjoint sequences", () => {
    const diff = diffTokens(["a"], ["b"]);
    expect(diff.map((segment) => segment.op)).toEqual(["removed", "added"]);
  });

  it("round-trips: equal+removed tokens rebuild the left side", () => {
    const a = words("Und selbst wenn man das beweisen könnte:");
    const b = words("Und selbst wenn man das für den Menschen beweisen könnte:");
    const diff = diffTokens(a, b);
    const left = diff.filter((segment) => segment.op !== "added").map((segment) => segment.token);
    const right = diff.filter((segment) => segment.op !== "removed").map((segment) => segment.token);
    expect(left).toEqual(a);
    expect(right).toEqual(b);
  });
});
