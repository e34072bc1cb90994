/**
 * Orthographic projections of 3D joint positions onto the canvas plane.
 *
 * The service serves facing-aligned poses (Z up, body facing +X), so the
 * canonical views are fixed camera directions; free orbit interpolates
 * between them. All views look at the origin of the centered pose.
 */

export type ViewName = "front" | "side" | "top" | "orbit";

export interface ViewAngles {
  azimuthDeg: number;   // rotation about the up axis
  elevationDeg: number; // 0 = horizontal, 90 = straight down
}

export const VIEW_PRESETS: Record<Exclude<ViewName, "orbit">, ViewAngles> = {
  front: { azimuthDeg: 0, elevationDeg: 0 },
  side: { azimuthDeg: 90, elevationDeg: 0 },
  top: { azimuthDeg: 0, elevationDeg: 90 },
};

export interface Point2D {
  x: number;
  y: number;
}

/** Project one (x, y, z) point for the given camera angles. */
export function projectPoint(
  point: readonly number[],
  angles: ViewAngles,
): Point2D {
  const az = (angles.azimuthDeg * Math.PI) / 180;
  const el = (angles.elevationDeg * Math.PI) / 180;
  const [x, y, z] = point;
  // camera right = (-sin az, cos az, 0), camera up = d x right where
  // d = (cos el cos az, cos el sin az, sin el) points from origin to camera
  const rightX = -Math.sin(az);
  const rightY = Math.cos(az);
  const upX = -Math.sin(el) * Math.cos(az);
  const upY = -Math.sin(el) * Math.sin(az);
  const upZ = Math.cos(el);
  return {
    x: x * rightX + y * rightY,
    y: -(x * upX + y * upY + z * upZ),
  };
}

export function projectFrame(
  frame: ReadonlyArray<readonly number[]>,
  angles: ViewAngles,
): Point2D[] {
  return frame.map((p) => projectPoint(p, angles));
}

/**
 * Map projected points into pixel coordinates, centered and scaled so
 * the pose fills the viewport at a stable size.
 */
export function fitToViewport(
  points: Point2D[],
  width: number,
  height: number,
  margin = 0.1,
): Point2D[] {
  let radius = 0;
  for (const p of points) {
    radius = Math.max(radius, Math.abs(p.x), Math.abs(p.y));
  }
  const scale =
    radius > 0 ? (Math.min(width, height) * (0.5 - margin)) / radius : 1;
  return points.map((p) => ({
    x: width / 2 + p.x * scale,
    y: height / 2 + p.y * scale,
  }));
}
