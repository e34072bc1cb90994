/** Payload shapes of the annotation service API. */

export interface SequenceInfo {
  sequence_id: string;
  total_frames: number;
  fps: number;
  competition_id: string;
  annotated: boolean;
  version: number;
  level: string | null;
}

export interface PoseResponse {
  sequence_id: string;
  from: number;
  to: number;
  fps: number;
  dims: number;
  units: string;
  aligned: boolean;
  joint_names: string[];
  parents: number[];
  left_hip_index: number;
  right_hip_index: number;
  up_axis: string;
  frames: number[][][]; // (to-from) x J x dims
  mask: boolean[][] | null;
}

export interface SegmentDTO {
  label: string;
  start: number; // inclusive
  end: number;   // exclusive
}

export interface AnnotationDoc {
  sequence_id: string;
  level: "set" | "element";
  total_frames: number;
  version: number;
  mode?: "strict" | "lenient";
  segments: SegmentDTO[];
}

export interface Violation {
  kind: string;
  message: string;
  segment_index: number | null;
}

export interface TaxonomyLabel {
  id: number;
  name: string;
  category: "entry" | "jump" | "landing" | "none";
  jump_type: string | null;
  rotations: number | null;
}

export interface TaxonomyResponse {
  level: string;
  labels: TaxonomyLabel[];
}

export type SaveResult =
  | { ok: true; version: number }
  | { ok: false; kind: "conflict"; currentVersion: number }
  | { ok: false; kind: "invalid"; violations: Violation[]; message: string }
  | { ok: false; kind: "error"; status: number; message: string };
