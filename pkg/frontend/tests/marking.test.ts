import { describe, expect, it } from "vitest";

import {
  addInstance,
  emptyInstance,
  instanceToSegments,
  markBoundary,
  MarkingError,
  removeInstanceAt,
} from "../src/marking.js";
import type { AnnotationDoc } from "../src/types.js";

function doc(level: "set" | "element" = "set"): AnnotationDoc {
  return {
    sequence_id: "seq0",
    level,
    total_frames: 500,
    version: 0,
    segments: [],
  };
}

describe("markBoundary", () => {
  it("builds the three intervals from four marks", () => {
    let pending = emptyInstance("Axel");
    pending = markBoundary(pending, "entry_start", 100);
    pending = markBoundary(pending, "takeoff", 110);
    pending = markBoundary(pending, "landing_start", 126);
    pending = markBoundary(pending, "landing_end", 140);
    const segments = instanceToSegments(pending, "set");
    expect(segments).toEqual([
      { label: "Axel entry", start: 100, end: 110 },
      { label: "Axel jump", start: 110, end: 126 },
      { label: "landing", start: 126, end: 140 },
    ]);
    expect(segments[1].end - segments[1].start).toBe(16);
  });

  it("rejects a takeoff before the entry start", () => {
    let pending = emptyInstance("Axel");
    pending = markBoundary(pending, "entry_start", 100);
    expect(() => markBoundary(pending, "takeoff", 90)).toThrow(MarkingError);
    expect(() => markBoundary(pending, "takeoff", 100)).toThrow(MarkingError);
  });

  it("rejects marks that invert later boundaries", () => {
    let pending = emptyInstance("Lutz");
    pending = markBoundary(pending, "takeoff", 200);
    pending = markBoundary(pending, "landing_start", 216);
    expect(() => markBoundary(pending, "entry_start", 250)).toThrow(
      MarkingError,
    );
    expect(() => markBoundary(pending, "landing_end", 210)).toThrow(
      MarkingError,
    );
  });

  it("allows re-marking a boundary while order holds", () => {
    let pending = emptyInstance("Flip");
    pending = markBoundary(pending, "takeoff", 200);
    pending = markBoundary(pending, "landing_start", 216);
    pending = markBoundary(pending, "takeoff", 205);
    expect(pending.takeoff).toBe(205);
  });

  it("marks in any order as long as values are consistent", () => {
    let pending = emptyInstance("Loop");
    pending = markBoundary(pending, "landing_end", 140);
    pending = markBoundary(pending, "entry_start", 100);
    pending = markBoundary(pending, "landing_start", 126);
    pending = markBoundary(pending, "takeoff", 110);
    expect(instanceToSegments(pending, "set")).toHaveLength(3);
  });
});

describe("instanceToSegments", () => {
  it("entry is optional, the other marks are not", () => {
    let pending = emptyInstance("Salchow");
    pending = markBoundary(pending, "takeoff", 50);
    pending = markBoundary(pending, "landing_start", 66);
    pending = markBoundary(pending, "landing_end", 80);
    const segments = instanceToSegments(pending, "set");
    expect(segments.map((s) => s.label)).toEqual(["Salchow jump", "landing"]);
    expect(() =>
      instanceToSegments(emptyInstance("Salchow"), "set"),
    ).toThrow(MarkingError);
  });

  it("synthesizes element-level labels from type and rotations", () => {
    let pending = emptyInstance("Salchow", 4);
    pending = markBoundary(pending, "takeoff", 50);
    pending = markBoundary(pending, "landing_start", 66);
    pending = markBoundary(pending, "landing_end", 80);
    const segments = instanceToSegments(pending, "element");
    expect(segments[0].label).toBe("4 Salchow jump");
    const missing = { ...pending, rotations: null };
    expect(() => instanceToSegments(missing, "element")).toThrow(MarkingError);
  });
});

describe("addInstance", () => {
  function completed(start: number) {
    let pending = emptyInstance("Axel");
    pending = markBoundary(pending, "entry_start", start);
    pending = markBoundary(pending, "takeoff", start + 10);
    pending = markBoundary(pending, "landing_start", start + 26);
    pending = markBoundary(pending, "landing_end", start + 40);
    return pending;
  }

  it("merges sorted and rejects overlaps with existing instances", () => {
    let annotation = addInstance(doc(), completed(100));
    expect(annotation.segments).toHaveLength(3);
    expect(() => addInstance(annotation, completed(120))).toThrow(
      MarkingError,
    );
    annotation = addInstance(annotation, completed(300));
    expect(annotation.segments.map((s) => s.start)).toEqual(
      [100, 110, 126, 300, 310, 326],
    );
  });

  it("rejects instances that run past the sequence end", () => {
    expect(() => addInstance(doc(), completed(480))).toThrow(MarkingError);
  });

  it("removeInstanceAt drops the whole adjacent chain", () => {
    const annotation = addInstance(addInstance(doc(), completed(100)),
      completed(300));
    const trimmed = removeInstanceAt(annotation, 115);
    expect(trimmed.segments.map((s) => s.start)).toEqual([300, 310, 326]);
    expect(removeInstanceAt(trimmed, 50)).toEqual(trimmed);
  });
});
