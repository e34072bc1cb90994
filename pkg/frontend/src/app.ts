/**
 * Annotation workbench wiring: sequence picker, pose viewport with view
 * presets and free orbit, timeline scrubbing, boundary marking, and the
 * save flow with explicit conflict resolution (never a silent overwrite).
 */
import { ApiClient } from "./api.js";
import {
  addInstance,
  emptyInstance,
  markBoundary,
  MarkingError,
  PendingInstance,
  removeInstanceAt,
} from "./marking.js";
import { VIEW_PRESETS, ViewAngles, ViewName } from "./projection.js";
import { drawSkeleton, RigInfo } from "./skeleton.js";
import {
  initialState,
  setFrame,
  stepFrame,
  tick,
  TimelineViewState,
  zoomAroundCurrent,
} from "./state.js";
import { drawTimeline, xToFrame } from "./timeline.js";
import type { AnnotationDoc, PoseResponse, SequenceInfo, Violation } from "./types.js";

const POSE_CHUNK = 256;

const JUMP_TYPES = ["Axel", "Salchow", "Toe Loop", "Loop", "Flip", "Lutz"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export class App {
  private readonly api: ApiClient;
  private sequences: SequenceInfo[] = [];
  private rig: RigInfo | null = null;
  private chunks = new Map<number, PoseResponse>();
  private loading = new Set<number>();
  private fps = 30;
  private state: TimelineViewState = initialState(1);
  private doc: AnnotationDoc | null = null;
  private pending: PendingInstance | null = null;
  private view: ViewName = "front";
  private orbit: ViewAngles = { azimuthDeg: 30, elevationDeg: 20 };
  private aligned = true;
  private violations: Violation[] = [];
  private lastTick = performance.now();

  constructor(api: ApiClient) {
    this.api = api;
  }

  async start(): Promise<void> {
    this.sequences = await this.api.listSequences();
    const picker = el<HTMLSelectElement>("sequence-picker");
    picker.innerHTML = "";
    for (const info of this.sequences) {
      const option = document.createElement("option");
      option.value = info.sequence_id;
      option.textContent =
        `${info.sequence_id} (${info.total_frames}f, ${info.competition_id}` +
        `${info.annotated ? ", annotated" : ""})`;
      picker.appendChild(option);
    }
    this.bindControls();
    if (this.sequences.length > 0) {
      await this.loadSequence(this.sequences[0].sequence_id);
    }
    requestAnimationFrame(() => this.frameLoop());
  }

  private bindControls(): void {
    el<HTMLSelectElement>("sequence-picker").addEventListener("change", (e) => {
      void this.loadSequence((e.target as HTMLSelectElement).value);
    });
    const typePicker = el<HTMLSelectElement>("jump-type");
    typePicker.innerHTML = "";
    for (const type of JUMP_TYPES) {
      const option = document.createElement("option");
      option.value = type;
      option.textContent = type;
      typePicker.appendChild(option);
    }
    for (const name of ["front", "side", "top", "orbit"] as ViewName[]) {
      el<HTMLButtonElement>(`view-${name}`).addEventListener("click", () => {
        this.view = name;
        this.render();
      });
    }
    el<HTMLInputElement>("aligned-toggle").addEventListener("change", (e) => {
      this.aligned = (e.target as HTMLInputElement).checked;
      this.chunks.clear();
      this.loading.clear();
      this.render();
    });
    el<HTMLSelectElement>("level-picker").addEventListener("change", (e) => {
      const level = (e.target as HTMLSelectElement).value as "set" | "element";
      if (this.doc === null || this.doc.level === level) {
        return;
      }
      if (this.doc.segments.length > 0) {
        const wipe = window.confirm(
          "Switching the level clears the current segments (labels are " +
            "level-specific). Continue?",
        );
        if (!wipe) {
          (e.target as HTMLSelectElement).value = this.doc.level;
          return;
        }
      }
      this.doc = { ...this.doc, level, segments: [] };
      this.pending = null;
      this.render();
    });
    for (const [id, kind] of [
      ["mark-entry", "entry_start"],
      ["mark-takeoff", "takeoff"],
      ["mark-landing-start", "landing_start"],
      ["mark-landing-end", "landing_end"],
    ] as const) {
      el<HTMLButtonElement>(id).addEventListener("click", () =>
        this.mark(kind),
      );
    }
    el<HTMLButtonElement>("add-instance").addEventListener("click", () =>
      this.commitInstance(),
    );
    el<HTMLButtonElement>("clear-marks").addEventListener("click", () => {
      this.pending = null;
      this.setStatus("marks cleared");
      this.render();
    });
    el<HTMLButtonElement>("delete-instance").addEventListener("click", () => {
      if (this.doc !== null) {
        this.doc = removeInstanceAt(this.doc, this.state.currentFrame);
        this.render();
      }
    });
    el<HTMLButtonElement>("save").addEventListener("click", () =>
      void this.save(),
    );
    const timeline = el<HTMLCanvasElement>("timeline");
    timeline.addEventListener("pointerdown", (e) => {
      const rect = timeline.getBoundingClientRect();
      const frame = xToFrame(this.state, e.clientX - rect.left, rect.width);
      this.state = setFrame(this.state, frame);
      this.render();
    });
    const viewport = el<HTMLCanvasElement>("viewport");
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    viewport.addEventListener("pointerdown", (e) => {
      dragging = true;
      lastX = e.clientX;
      lastY = e.clientY;
      viewport.setPointerCapture(e.pointerId);
    });
    viewport.addEventListener("pointermove", (e) => {
      if (!dragging) {
        return;
      }
      this.view = "orbit";
      this.orbit = {
        azimuthDeg: this.orbit.azimuthDeg + (e.clientX - lastX) * 0.5,
        elevationDeg: Math.min(
          89,
          Math.max(-89, this.orbit.elevationDeg + (e.clientY - lastY) * 0.5),
        ),
      };
      lastX = e.clientX;
      lastY = e.clientY;
      this.render();
    });
    viewport.addEventListener("pointerup", () => {
      dragging = false;
    });
    document.addEventListener("keydown", (e) => {
      const tag = (e.target as HTMLElement).tagName;
      if (tag === "INPUT" || tag === "SELECT") {
        return;
      }
      const step = e.shiftKey ? 10 : 1;
      if (e.key === "ArrowRight") {
        this.state = stepFrame(this.state, step);
      } else if (e.key === "ArrowLeft") {
        this.state = stepFrame(this.state, -step);
      } else if (e.key === " ") {
        this.state = { ...this.state, playing: !this.state.playing };
        e.preventDefault();
      } else if (e.key === "1") {
        this.mark("entry_start");
      } else if (e.key === "2") {
        this.mark("takeoff");
      } else if (e.key === "3") {
        this.mark("landing_start");
      } else if (e.key === "4") {
        this.mark("landing_end");
      } else if (e.key === "+") {
        this.state = zoomAroundCurrent(this.state, 0.5);
      } else if (e.key === "-") {
        this.state = zoomAroundCurrent(this.state, 2.0);
      } else {
        return;
      }
      this.render();
    });
  }

  private async loadSequence(sequenceId: string): Promise<void> {
    this.chunks.clear();
    this.loading.clear();
    this.pending = null;
    this.violations = [];
    this.doc = await this.api.getAnnotation(sequenceId);
    el<HTMLSelectElement>("level-picker").value = this.doc.level;
    const info = this.sequences.find((s) => s.sequence_id === sequenceId);
    this.fps = info?.fps ?? 30;
    this.state = initialState(this.doc.total_frames);
    this.state = { ...this.state, lastKnownVersion: this.doc.version };
    this.setStatus(`loaded ${sequenceId} (version ${this.doc.version})`);
    this.render();
  }

  private mark(kind: Parameters<typeof markBoundary>[1]): void {
    if (this.doc === null) {
      return;
    }
    const typePicker = el<HTMLSelectElement>("jump-type");
    const rotations =
      this.doc.level === "element"
        ? Number(el<HTMLInputElement>("rotations").value)
        : null;
    if (this.pending === null) {
      this.pending = emptyInstance(typePicker.value, rotations);
    } else {
      this.pending = {
        ...this.pending,
        jumpType: typePicker.value,
        rotations,
      };
    }
    try {
      this.pending = markBoundary(this.pending, kind, this.state.currentFrame);
      this.setStatus(`${kind} marked at frame ${this.state.currentFrame}`);
    } catch (err) {
      if (err instanceof MarkingError) {
        this.setStatus(`rejected: ${err.message}`);
      } else {
        throw err;
      }
    }
    this.render();
  }

  private commitInstance(): void {
    if (this.doc === null || this.pending === null) {
      return;
    }
    try {
      this.doc = addInstance(this.doc, this.pending);
      this.pending = null;
      this.violations = [];
      this.setStatus("instance added (unsaved)");
    } catch (err) {
      if (err instanceof MarkingError) {
        this.setStatus(`rejected: ${err.message}`);
      } else {
        throw err;
      }
    }
    this.render();
  }

  private async save(): Promise<void> {
    if (this.doc === null) {
      return;
    }
    const result = await this.api.putAnnotation(
      this.doc.sequence_id,
      this.doc,
      this.state.lastKnownVersion,
      "strict",
    );
    if (result.ok) {
      this.state = { ...this.state, lastKnownVersion: result.version };
      this.doc = { ...this.doc, version: result.version };
      this.violations = [];
      this.setStatus(`saved as version ${result.version}`);
    } else if (result.kind === "conflict") {
      await this.resolveConflict(result.currentVersion);
    } else if (result.kind === "invalid") {
      this.violations = result.violations;
      const lines = result.violations
        .map((v) => `${v.kind}: ${v.message}`)
        .join("; ");
      this.setStatus(`validation failed: ${lines || result.message}`);
    } else {
      this.setStatus(`save failed (${result.status}): ${result.message}`);
    }
    this.render();
  }

  private async resolveConflict(currentVersion: number): Promise<void> {
    if (this.doc === null) {
      return;
    }
    const server = await this.api.getAnnotation(this.doc.sequence_id);
    const mine = this.doc.segments.length;
    const theirs = server.segments.length;
    const reload = window.confirm(
      `Version conflict: the server is at version ${currentVersion} ` +
        `(${theirs} segments), your copy is based on version ` +
        `${this.state.lastKnownVersion} (${mine} segments).\n\n` +
        `OK = discard your edits and reload the server copy.\n` +
        `Cancel = keep your edits to overwrite on the next save.`,
    );
    if (reload) {
      this.doc = server;
      this.state = { ...this.state, lastKnownVersion: server.version };
      this.setStatus(`reloaded server version ${server.version}`);
    } else {
      this.state = { ...this.state, lastKnownVersion: currentVersion };
      this.setStatus(
        `kept local edits; next save overwrites version ${currentVersion}`,
      );
    }
  }

  private chunkFor(frame: number): PoseResponse | null {
    const index = Math.floor(frame / POSE_CHUNK);
    const chunk = this.chunks.get(index);
    if (chunk !== undefined) {
      return chunk;
    }
    if (this.doc !== null && !this.loading.has(index)) {
      this.loading.add(index);
      const from = index * POSE_CHUNK;
      const to = Math.min(this.doc.total_frames, from + POSE_CHUNK);
      void this.api
        .getPoses(this.doc.sequence_id, from, to, this.aligned)
        .then((poses) => {
          this.rig = poses;
          this.chunks.set(index, poses);
          this.loading.delete(index);
          this.render();
        })
        .catch(() => {
          this.loading.delete(index);
          this.setStatus(`failed to load frames ${from}..${to}`);
        });
    }
    return null;
  }

  private frameLoop(): void {
    const now = performance.now();
    const next = tick(this.state, (now - this.lastTick) / 1000, this.fps);
    this.lastTick = now;
    if (next !== this.state) {
      this.state = next;
      this.render();
    }
    requestAnimationFrame(() => this.frameLoop());
  }

  private setStatus(message: string): void {
    el<HTMLDivElement>("status").textContent = message;
  }

  render(): void {
    if (this.doc === null) {
      return;
    }
    const viewport = el<HTMLCanvasElement>("viewport");
    const ctx = viewport.getContext("2d");
    const chunk = this.chunkFor(this.state.currentFrame);
    if (ctx !== null) {
      if (chunk !== null && this.rig !== null) {
        const local = this.state.currentFrame - chunk.from;
        const frame = chunk.frames[local];
        const mask = chunk.mask === null ? null : chunk.mask[local];
        const angles =
          this.view === "orbit" ? this.orbit : VIEW_PRESETS[this.view];
        drawSkeleton(ctx, frame, this.rig, {
          width: viewport.width,
          height: viewport.height,
          angles,
          mask,
        });
      } else {
        ctx.clearRect(0, 0, viewport.width, viewport.height);
        ctx.fillStyle = "#666";
        ctx.fillText("loading pose...", 20, 20);
      }
    }
    const timeline = el<HTMLCanvasElement>("timeline");
    const tctx = timeline.getContext("2d");
    if (tctx !== null) {
      const bad = new Set<number>();
      for (const violation of this.violations) {
        if (violation.segment_index !== null) {
          bad.add(violation.segment_index);
        }
      }
      drawTimeline(tctx, this.state, this.doc.segments, this.pending,
        timeline.width, timeline.height, bad);
    }
    el<HTMLSpanElement>("frame-indicator").textContent =
      `frame ${this.state.currentFrame} / ${this.state.totalFrames - 1}` +
      ` | version ${this.state.lastKnownVersion}` +
      ` | ${this.doc.segments.length} segments`;
    el<HTMLInputElement>("rotations").disabled = this.doc.level !== "element";
  }
}
