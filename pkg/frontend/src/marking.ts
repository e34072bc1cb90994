/**
 * Incremental construction of one jump instance from boundary marks.
 *
 * The four marks build half-open intervals: entry [entry_start, takeoff),
 * jump [takeoff, landing_start), landing [landing_start, landing_end).
 * Marks must stay in temporal order; a violating mark is rejected with a
 * message the UI surfaces instead of applying it.
 */
import type { AnnotationDoc, SegmentDTO } from "./types.js";

export type BoundaryKind =
  | "entry_start"
  | "takeoff"
  | "landing_start"
  | "landing_end";

export const BOUNDARY_ORDER: BoundaryKind[] = [
  "entry_start",
  "takeoff",
  "landing_start",
  "landing_end",
];

export interface PendingInstance {
  jumpType: string; // "Axel", "Salchow", "Toe Loop", "Loop", "Flip", "Lutz"
  rotations: number | null; // required at element level
  entry_start: number | null;
  takeoff: number | null;
  landing_start: number | null;
  landing_end: number | null;
}

export class MarkingError extends Error {}

export function emptyInstance(
  jumpType: string,
  rotations: number | null = null,
): PendingInstance {
  return {
    jumpType,
    rotations,
    entry_start: null,
    takeoff: null,
    landing_start: null,
    landing_end: null,
  };
}

/** Apply one boundary mark, enforcing strict temporal order. */
export function markBoundary(
  pending: PendingInstance,
  kind: BoundaryKind,
  frame: number,
): PendingInstance {
  if (!Number.isInteger(frame) || frame < 0) {
    throw new MarkingError(`frame must be a non-negative integer, got ${frame}`);
  }
  const index = BOUNDARY_ORDER.indexOf(kind);
  for (let i = 0; i < BOUNDARY_ORDER.length; i++) {
    const other = pending[BOUNDARY_ORDER[i]];
    if (other === null || i === index) {
      continue;
    }
    if (i < index && other >= frame) {
      throw new MarkingError(
        `${kind}@${frame} must come after ${BOUNDARY_ORDER[i]}@${other}`,
      );
    }
    if (i > index && other <= frame) {
      throw new MarkingError(
        `${kind}@${frame} must come before ${BOUNDARY_ORDER[i]}@${other}`,
      );
    }
  }
  return { ...pending, [kind]: frame };
}

export function isComplete(pending: PendingInstance): boolean {
  return (
    pending.takeoff !== null &&
    pending.landing_start !== null &&
    pending.landing_end !== null
  );
}

function jumpLabel(pending: PendingInstance, level: "set" | "element"): string {
  if (level === "element") {
    if (pending.rotations === null || pending.rotations < 1) {
      throw new MarkingError("element-level jumps need a rotation count");
    }
    return `${pending.rotations} ${pending.jumpType} jump`;
  }
  return `${pending.jumpType} jump`;
}

/**
 * Turn a completed instance into segments. The entry mark is optional;
 * takeoff, landing start and landing end are required.
 */
export function instanceToSegments(
  pending: PendingInstance,
  level: "set" | "element",
): SegmentDTO[] {
  if (!isComplete(pending)) {
    const missing = BOUNDARY_ORDER.filter(
      (kind) => kind !== "entry_start" && pending[kind] === null,
    );
    throw new MarkingError(`instance incomplete: missing ${missing.join(", ")}`);
  }
  const segments: SegmentDTO[] = [];
  if (pending.entry_start !== null) {
    segments.push({
      label: `${pending.jumpType} entry`,
      start: pending.entry_start,
      end: pending.takeoff!,
    });
  }
  segments.push({
    label: jumpLabel(pending, level),
    start: pending.takeoff!,
    end: pending.landing_start!,
  });
  segments.push({
    label: "landing",
    start: pending.landing_start!,
    end: pending.landing_end!,
  });
  return segments;
}

function overlaps(a: SegmentDTO, b: SegmentDTO): boolean {
  return a.start < b.end && b.start < a.end;
}

/**
 * Merge a finished instance into an annotation, rejecting overlaps with
 * existing segments and out-of-range intervals.
 */
export function addInstance(
  doc: AnnotationDoc,
  pending: PendingInstance,
): AnnotationDoc {
  const added = instanceToSegments(pending, doc.level);
  for (const fresh of added) {
    if (fresh.end > doc.total_frames) {
      throw new MarkingError(
        `segment [${fresh.start}, ${fresh.end}) exceeds T=${doc.total_frames}`,
      );
    }
    for (const existing of doc.segments) {
      if (overlaps(fresh, existing)) {
        throw new MarkingError(
          `segment [${fresh.start}, ${fresh.end}) overlaps existing ` +
            `"${existing.label}" [${existing.start}, ${existing.end})`,
        );
      }
    }
  }
  const segments = [...doc.segments, ...added].sort(
    (a, b) => a.start - b.start || a.end - b.end,
  );
  return { ...doc, segments };
}

/** Remove every segment of the instance containing the given frame. */
export function removeInstanceAt(
  doc: AnnotationDoc,
  frame: number,
): AnnotationDoc {
  const hit = doc.segments.findIndex(
    (segment) => segment.start <= frame && frame < segment.end,
  );
  if (hit < 0) {
    return doc;
  }
  // expand to the adjacent chain (entry/jump/landing touch boundaries)
  let lo = hit;
  let hi = hit;
  while (lo > 0 && doc.segments[lo - 1].end === doc.segments[lo].start) {
    lo -= 1;
  }
  while (
    hi + 1 < doc.segments.length &&
    doc.segments[hi].end === doc.segments[hi + 1].start
  ) {
    hi += 1;
  }
  const segments = doc.segments.filter((_, i) => i < lo || i > hi);
  return { ...doc, segments };
}
