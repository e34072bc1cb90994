import { describe, expect, it } from "vitest";

import { projectPoint, VIEW_PRESETS } from "../src/projection.js";
import { Draw2D, drawSkeleton, DEFAULT_STYLE, sideColor } from "../src/skeleton.js";

describe("projection", () => {
  it("front view maps +Y to screen-x and +Z upward", () => {
    const lateral = projectPoint([0, 1, 0], VIEW_PRESETS.front);
    expect(lateral.x).toBe(1);
    expect(lateral.y).toBeCloseTo(0, 12);
    const up = projectPoint([0, 0, 1], VIEW_PRESETS.front);
    expect(up.x).toBeCloseTo(0, 12);
    expect(up.y).toBe(-1); // canvas y grows downward
    // depth along +X is invisible from the front
    const depth = projectPoint([5, 0, 0], VIEW_PRESETS.front);
    expect(depth.x).toBeCloseTo(0, 12);
    expect(depth.y).toBeCloseTo(0, 12);
  });

  it("side view hides the lateral axis", () => {
    const p = projectPoint([0, 7, 0], VIEW_PRESETS.side);
    expect(Math.abs(p.x)).toBeCloseTo(0, 12);
    expect(Math.abs(projectPoint([3, 0, 0], VIEW_PRESETS.side).x)).toBe(3);
  });

  it("top view flattens height", () => {
    const p = projectPoint([0, 0, 9], VIEW_PRESETS.top);
    expect(p.x).toBeCloseTo(0, 12);
    expect(p.y).toBeCloseTo(0, 12);
  });

  it("orbit is continuous in the azimuth", () => {
    const a = projectPoint([1, 2, 3], { azimuthDeg: 30, elevationDeg: 20 });
    const b = projectPoint([1, 2, 3], { azimuthDeg: 30.01, elevationDeg: 20 });
    expect(Math.hypot(a.x - b.x, a.y - b.y)).toBeLessThan(1e-3);
  });
});

/** Records draw commands instead of rasterizing. */
class RecordingContext implements Draw2D {
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  events: string[] = [];
  private pendingArc = false;

  beginPath(): void {
    this.pendingArc = false;
  }
  moveTo(): void {}
  lineTo(): void {
    this.events.push("bone");
  }
  arc(): void {
    this.pendingArc = true;
  }
  stroke(): void {
    if (this.pendingArc) {
      this.events.push(`hollow:${String(this.strokeStyle)}`);
      this.pendingArc = false;
    }
  }
  fill(): void {
    if (this.pendingArc) {
      this.events.push(`solid:${String(this.fillStyle)}`);
      this.pendingArc = false;
    }
  }
  clearRect(): void {
    this.events.push("clear");
  }
}

const rig = {
  joint_names: ["pelvis", "right_hip", "left_hip", "left_knee"],
  parents: [-1, 0, 0, 2],
};

const frame = [
  [0, 0, 1000],
  [0, -130, 1000],
  [0, 130, 1000],
  [0, 140, 550],
];

describe("drawSkeleton", () => {
  it("draws bones for every parented joint and solid joints by default", () => {
    const ctx = new RecordingContext();
    drawSkeleton(ctx, frame, rig, {
      width: 200,
      height: 200,
      angles: VIEW_PRESETS.front,
    });
    expect(ctx.events.filter((e) => e === "bone")).toHaveLength(3);
    expect(ctx.events.filter((e) => e.startsWith("solid:"))).toHaveLength(4);
    expect(ctx.events.filter((e) => e.startsWith("hollow:"))).toHaveLength(0);
  });

  it("renders masked joints hollow and skips their bones", () => {
    const ctx = new RecordingContext();
    drawSkeleton(ctx, frame, rig, {
      width: 200,
      height: 200,
      angles: VIEW_PRESETS.front,
      mask: [true, true, true, false],
    });
    expect(ctx.events.filter((e) => e === "bone")).toHaveLength(2);
    expect(ctx.events.filter((e) => e.startsWith("hollow:"))).toHaveLength(1);
    expect(ctx.events.filter((e) => e.startsWith("solid:"))).toHaveLength(3);
  });

  it("color-codes left and right joints", () => {
    expect(sideColor("left_knee", DEFAULT_STYLE)).toBe(DEFAULT_STYLE.leftColor);
    expect(sideColor("right_hip", DEFAULT_STYLE)).toBe(DEFAULT_STYLE.rightColor);
    expect(sideColor("pelvis", DEFAULT_STYLE)).toBe(DEFAULT_STYLE.centerColor);
  });

  it("returns projected pixel positions inside the viewport", () => {
    const ctx = new RecordingContext();
    const points = drawSkeleton(ctx, frame, rig, {
      width: 320,
      height: 240,
      angles: VIEW_PRESETS.front,
    });
    expect(points).toHaveLength(4);
    for (const p of points) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(320);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(240);
    }
  });
});
