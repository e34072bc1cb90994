/**
 * Timeline strip: segment bars over the zoom window, the playhead, and
 * pending boundary marks. Pure drawing; interaction lives in app.ts.
 */
import type { Draw2D } from "./skeleton.js";
import type { SegmentDTO } from "./types.js";
import type { TimelineViewState } from "./state.js";
import type { PendingInstance } from "./marking.js";
import { BOUNDARY_ORDER } from "./marking.js";

const CATEGORY_COLORS: Record<string, string> = {
  entry: "#f2a65a",
  jump: "#e4572e",
  landing: "#5a9ff2",
};

export function segmentCategory(label: string): string {
  if (label === "landing") {
    return "landing";
  }
  if (label.endsWith("entry")) {
    return "entry";
  }
  return "jump";
}

export function frameToX(
  state: TimelineViewState,
  frame: number,
  width: number,
): number {
  const span = state.zoomTo - state.zoomFrom;
  return ((frame - state.zoomFrom) / span) * width;
}

export function xToFrame(
  state: TimelineViewState,
  x: number,
  width: number,
): number {
  const span = state.zoomTo - state.zoomFrom;
  const frame = state.zoomFrom + Math.floor((x / width) * span);
  return Math.min(state.totalFrames - 1, Math.max(0, frame));
}

export function drawTimeline(
  ctx: Draw2D,
  state: TimelineViewState,
  segments: SegmentDTO[],
  pending: PendingInstance | null,
  width: number,
  height: number,
  violationIndices: Set<number> = new Set(),
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1d2126";
  ctx.beginPath();
  ctx.moveTo(0, 0);
  ctx.lineTo(width, 0);
  ctx.lineTo(width, height);
  ctx.lineTo(0, height);
  ctx.fill();

  const barTop = height * 0.25;
  const barBottom = height * 0.8;
  segments.forEach((segment, index) => {
    const x0 = frameToX(state, segment.start, width);
    const x1 = frameToX(state, segment.end, width);
    if (x1 < 0 || x0 > width) {
      return;
    }
    ctx.fillStyle = CATEGORY_COLORS[segmentCategory(segment.label)];
    ctx.beginPath();
    ctx.moveTo(x0, barTop);
    ctx.lineTo(x1, barTop);
    ctx.lineTo(x1, barBottom);
    ctx.lineTo(x0, barBottom);
    ctx.fill();
    if (violationIndices.has(index)) {
      ctx.strokeStyle = "#ff2d55";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(x0, barTop - 3);
      ctx.lineTo(x1, barTop - 3);
      ctx.stroke();
    }
  });

  if (pending !== null) {
    ctx.strokeStyle = "#ffd166";
    ctx.lineWidth = 1;
    for (const kind of BOUNDARY_ORDER) {
      const frame = pending[kind];
      if (frame === null) {
        continue;
      }
      const x = frameToX(state, frame, width);
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
    }
  }

  const playhead = frameToX(state, state.currentFrame + 0.5, width);
  ctx.strokeStyle = "#ffffff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(playhead, 0);
  ctx.lineTo(playhead, height);
  ctx.stroke();
}
