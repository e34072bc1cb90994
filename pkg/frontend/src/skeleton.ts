/**
 * Canvas skeleton rendering: bones from the rig's parent pointers,
 * left/right color coding from joint names, hollow markers for masked
 * joints. Pose data is never mutated; drawing works on projected copies.
 */
import { fitToViewport, projectFrame, ViewAngles } from "./projection.js";

/** The subset of CanvasRenderingContext2D the renderer needs. */
export interface Draw2D {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface RigInfo {
  joint_names: string[];
  parents: number[];
}

export interface SkeletonStyle {
  leftColor: string;
  rightColor: string;
  centerColor: string;
  jointRadius: number;
  boneWidth: number;
}

export const DEFAULT_STYLE: SkeletonStyle = {
  leftColor: "#e4572e",
  rightColor: "#17bebb",
  centerColor: "#c9cdd3",
  jointRadius: 4,
  boneWidth: 2,
};

export function sideColor(name: string, style: SkeletonStyle): string {
  if (name.startsWith("left")) {
    return style.leftColor;
  }
  if (name.startsWith("right")) {
    return style.rightColor;
  }
  return style.centerColor;
}

export interface RenderOptions {
  width: number;
  height: number;
  angles: ViewAngles;
  mask?: boolean[] | null; // per joint, true = valid
  style?: SkeletonStyle;
}

/**
 * Draw one pose frame. Returns the projected pixel positions so callers
 * can hit-test joints. Missing frames are the caller's concern (render
 * a placeholder instead of calling this).
 */
export function drawSkeleton(
  ctx: Draw2D,
  frame: ReadonlyArray<readonly number[]>,
  rig: RigInfo,
  options: RenderOptions,
): { x: number; y: number }[] {
  const style = options.style ?? DEFAULT_STYLE;
  const projected = fitToViewport(
    projectFrame(frame, options.angles),
    options.width,
    options.height,
  );
  ctx.clearRect(0, 0, options.width, options.height);

  const masked = (j: number) => options.mask != null && !options.mask[j];

  ctx.lineWidth = style.boneWidth;
  for (let j = 0; j < rig.parents.length; j++) {
    const parent = rig.parents[j];
    if (parent < 0 || masked(j) || masked(parent)) {
      continue;
    }
    ctx.strokeStyle = sideColor(rig.joint_names[j], style);
    ctx.beginPath();
    ctx.moveTo(projected[parent].x, projected[parent].y);
    ctx.lineTo(projected[j].x, projected[j].y);
    ctx.stroke();
  }

  for (let j = 0; j < projected.length; j++) {
    const color = sideColor(rig.joint_names[j], style);
    ctx.beginPath();
    ctx.arc(
      projected[j].x,
      projected[j].y,
      style.jointRadius,
      0,
      2 * Math.PI,
    );
    if (masked(j)) {
      // hollow marker for joints zeroed by confidence masking
      ctx.strokeStyle = color;
      ctx.stroke();
    } else {
      ctx.fillStyle = color;
      ctx.fill();
    }
  }
  return projected;
}
