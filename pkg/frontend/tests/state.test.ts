import { describe, expect, it } from "vitest";

import {
  applyDelta,
  branchGroups,
  emptyStatuses,
  humanCombination,
  parseCombination,
  summarizeStatuses,
  wheelTicks,
} from "../src/state.ts";
import type { NotebookDoc, Snapshot } from "../src/types.ts";

function nbDoc(): NotebookDoc {
  return {
    version: 1,
    title: "t",
    stages: [
      {
        id: "s1",
        alternatives: [
          { id: "w1", label: "a", cells: [{ id: "c1", source: "x = 1" }] },
        ],
      },
      {
        id: "s2",
        alternatives: [
          { id: "w2", label: "b", cells: [{ id: "c2", source: "y = x" }] },
          { id: "w2b", label: "b2", cells: [{ id: "c2b", source: "y = 2" }] },
        ],
      },
      {
        id: "s3",
        alternatives: [
          { id: "w3", label: "c", cells: [{ id: "c3", source: "show(y)" }] },
        ],
      },
    ],
  };
}

function snap(): Snapshot {
  const notebook = nbDoc();
  return {
    server_seq: 0,
    notebook_id: "nb",
    notebook,
    exec: { statuses: emptyStatuses(notebook), outputs: {} },
    layout: { desktop: {}, overrides: {} },
  };
}

describe("applyDelta", () => {
  it("bumps server_seq on every delta", () => {
    const s = snap();
    applyDelta(s, {
      server_seq: 9,
      change: "status_changed",
      cell_id: "c1",
      combination_label: "",
      status: "ok",
    });
    expect(s.server_seq).toBe(9);
    expect(s.exec.statuses.c1).toEqual({ "": "ok" });
  });

  it("upserts output entries by combination", () => {
    const s = snap();
    const mk = (combination: string, items: string[], seq: number) =>
      applyDelta(s, {
        server_seq: seq,
        change: "output_added",
        window_id: "w3",
        entry: { combination, items, error: null, inherited: false },
      });
    mk("s1=0", ["1"], 1);
    mk("s1=1", ["2"], 2);
    mk("s1=0", ["99"], 3);
    expect(s.exec.outputs.w3.map((e) => e.items[0])).toEqual(["99", "2"]);
    expect(s.exec.outputs.w3).toHaveLength(2);
  });

  it("notebook_changed with reset_exec clears exec state", () => {
    const s = snap();
    applyDelta(s, {
      server_seq: 1,
      change: "status_changed",
      cell_id: "c1",
      combination_label: "",
      status: "ok",
    });
    applyDelta(s, {
      server_seq: 2,
      change: "output_added",
      window_id: "w1",
      entry: { combination: "", items: ["1"], error: null, inherited: false },
    });
    const doc = nbDoc();
    applyDelta(s, {
      server_seq: 3,
      change: "notebook_changed",
      notebook: doc,
      reset_exec: true,
    });
    expect(s.notebook).toBe(doc);
    expect(s.exec.outputs).toEqual({});
    expect(s.exec.statuses).toEqual({ c1: {}, c2: {}, c2b: {}, c3: {} });
  });

  it("notebook_changed without reset keeps exec state", () => {
    const s = snap();
    applyDelta(s, {
      server_seq: 1,
      change: "output_added",
      window_id: "w1",
      entry: { combination: "", items: ["1"], error: null, inherited: false },
    });
    applyDelta(s, {
      server_seq: 2,
      change: "notebook_changed",
      notebook: nbDoc(),
      reset_exec: false,
    });
    expect(s.exec.outputs.w1).toHaveLength(1);
  });

  it("layout deltas set rects, poses, and clear both on rect null", () => {
    const s = snap();
    const rect = { x: 0, y: 0, width: 10, height: 5, column: 0 };
    applyDelta(s, {
      server_seq: 1,
      change: "layout_changed",
      window_id: "w1",
      rect,
    });
    expect(s.layout.desktop.w1).toEqual(rect);
    applyDelta(s, {
      server_seq: 2,
      change: "layout_changed",
      window_id: "w1",
      pose: { x: 7, y: -2 },
    });
    expect(s.layout.overrides.w1).toEqual({ x: 7, y: -2 });
    expect(s.layout.desktop.w1).toEqual(rect);
    applyDelta(s, {
      server_seq: 3,
      change: "layout_changed",
      window_id: "w1",
      rect: null,
    });
    expect(s.layout.desktop.w1).toBeUndefined();
    expect(s.layout.overrides.w1).toBeUndefined();
  });
});

describe("combination labels", () => {
  it("parses service labels", () => {
    expect(parseCombination("")).toEqual([]);
    expect(parseCombination("s1=0;s3=2")).toEqual([
      { stage: 1, alt: 0 },
      { stage: 3, alt: 2 },
    ]);
  });

  it("renders group letters and 1-based alternatives", () => {
    const nb = nbDoc();
    // only stage 1 is a group here
    expect(branchGroups(nb)).toEqual([1]);
    expect(humanCombination("s1=1", nb)).toBe("branch A: alt 2");
  });

  it("letters groups in stage order across multiple groups", () => {
    const nb = nbDoc();
    nb.stages[2].alternatives.push({
      id: "w3b",
      label: "c2",
      cells: [{ id: "c3b", source: "show(1)" }],
    });
    expect(humanCombination("s1=0;s2=1", nb)).toBe(
      "branch A: alt 1 × branch B: alt 2",
    );
  });

  it("falls back to the raw stage for non-group labels", () => {
    expect(humanCombination("s7=2", nbDoc())).toBe("s7: alt 3");
  });
});

describe("summarizeStatuses", () => {
  it("picks the most urgent status across combinations", () => {
    expect(summarizeStatuses({})).toBe("idle");
    expect(summarizeStatuses({ "s1=0": "ok", "s1=1": "ok" })).toBe("ok");
    expect(summarizeStatuses({ "s1=0": "ok", "s1=1": "stale" })).toBe("stale");
    expect(summarizeStatuses({ "s1=0": "skipped", "s1=1": "error" })).toBe(
      "error",
    );
  });
});

describe("wheelTicks", () => {
  it("converts pixel deltas at ~100px per tick, minimum one", () => {
    expect(wheelTicks(1000)).toBe(10);
    expect(wheelTicks(-400)).toBe(-4);
    expect(wheelTicks(1)).toBe(1);
    expect(wheelTicks(-30)).toBe(-1);
    expect(wheelTicks(0)).toBe(0);
  });

  it("handles line and page delta modes", () => {
    expect(wheelTicks(3, 1)).toBe(1);
    expect(wheelTicks(-9, 1)).toBe(-3);
    expect(wheelTicks(123, 2)).toBe(123);
    expect(wheelTicks(-5, 2)).toBe(-5);
  });
});
