/**
 * Timeline view state and its transitions.
 *
 * Frame stepping is integer-exact: the displayed index is the requested
 * index, and stepping never drifts no matter how often it runs.
 */

export interface TimelineViewState {
  totalFrames: number;
  currentFrame: number;
  zoomFrom: number;
  zoomTo: number; // exclusive; zoomFrom < zoomTo <= totalFrames
  playbackRate: number;
  playing: boolean;
  selectedSegment: number | null;
  lastKnownVersion: number;
}

export function initialState(totalFrames: number): TimelineViewState {
  if (totalFrames < 1) {
    throw new Error("sequence must have at least one frame");
  }
  return {
    totalFrames,
    currentFrame: 0,
    zoomFrom: 0,
    zoomTo: totalFrames,
    playbackRate: 1,
    playing: false,
    selectedSegment: null,
    lastKnownVersion: 0,
  };
}

function clampFrame(state: TimelineViewState, frame: number): number {
  return Math.min(state.totalFrames - 1, Math.max(0, Math.round(frame)));
}

export function setFrame(
  state: TimelineViewState,
  frame: number,
): TimelineViewState {
  return { ...state, currentFrame: clampFrame(state, frame) };
}

export function stepFrame(
  state: TimelineViewState,
  delta: number,
): TimelineViewState {
  if (!Number.isInteger(delta)) {
    throw new Error("frame steps must be whole frames");
  }
  return setFrame(state, state.currentFrame + delta);
}

export function setZoom(
  state: TimelineViewState,
  from: number,
  to: number,
): TimelineViewState {
  const lo = Math.max(0, Math.floor(from));
  const hi = Math.min(state.totalFrames, Math.ceil(to));
  if (lo >= hi) {
    throw new Error(`empty zoom window [${from}, ${to})`);
  }
  return { ...state, zoomFrom: lo, zoomTo: hi };
}

/** Zoom by a factor around the current frame (factor < 1 zooms in). */
export function zoomAroundCurrent(
  state: TimelineViewState,
  factor: number,
): TimelineViewState {
  const width = Math.max(8, Math.round((state.zoomTo - state.zoomFrom) * factor));
  let lo = state.currentFrame - Math.floor(width / 2);
  let hi = lo + width;
  if (lo < 0) {
    hi -= lo;
    lo = 0;
  }
  if (hi > state.totalFrames) {
    lo = Math.max(0, lo - (hi - state.totalFrames));
    hi = state.totalFrames;
  }
  return setZoom(state, lo, hi);
}

/** Advance playback by elapsed wall time; returns the new state. */
export function tick(
  state: TimelineViewState,
  elapsedSeconds: number,
  fps: number,
): TimelineViewState {
  if (!state.playing) {
    return state;
  }
  const advance = Math.round(elapsedSeconds * fps * state.playbackRate);
  if (advance === 0) {
    return state;
  }
  const next = state.currentFrame + advance;
  if (next >= state.totalFrames) {
    return { ...setFrame(state, state.totalFrames - 1), playing: false };
  }
  return setFrame(state, next);
}
