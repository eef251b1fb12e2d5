/**
 * Editor state and its transition rules.
 *
 * Invariants enforced here:
 * - the pending batch empties immediately on a successful PATCH ack, and
 *   the displayed revision becomes the acknowledged server revision;
 * - local previews are only ever tagged with the revision they were made
 *   against; a mismatch on fetch discards them;
 * - editing tools are disabled while a job runs (the server would answer
 *   ProjectLocked anyway);
 * - switching tools with a non-empty batch requires a flush-or-discard
 *   decision from the user.
 */

export type Tool = "brush" | "polygon" | "merge-pick" | "seed-label" | "control-point";

export type EditOp =
  | { op: "paint"; polyline: [number, number][]; radius: number; target: number }
  | { op: "merge"; ids: number[] }
  | { op: "polygon"; ring: [number, number][] }
  | { op: "fill" };

export interface LayerVisibility {
  image: boolean;
  segments: boolean;
  classes: boolean;
  mapOverlay: boolean;
}

export interface Viewport {
  lat: number;
  lon: number;
  zoom: number;
}

export interface EditorState {
  projectId: string | null;
  revision: number;
  tool: Tool;
  brushRadius: number;
  selectedClass: number;
  pendingOps: EditOp[];
  previewRevision: number | null;
  layers: LayerVisibility;
  viewport: Viewport;
  jobRunning: boolean;
}

export function initialState(): EditorState {
  return {
    projectId: null,
    revision: 0,
    tool: "brush",
    brushRadius: 3,
    selectedClass: 1,
    pendingOps: [],
    previewRevision: null,
    layers: { image: true, segments: true, classes: true, mapOverlay: true },
    viewport: { lat: 0, lon: 0, zoom: 2 },
    jobRunning: false,
  };
}

export function editingEnabled(state: EditorState): boolean {
  return state.projectId !== null && !state.jobRunning;
}

export function queueOp(state: EditorState, op: EditOp): EditorState {
  if (!editingEnabled(state)) {
    throw new Error("editing is disabled while a job is running");
  }
  return {
    ...state,
    pendingOps: [...state.pendingOps, op],
    previewRevision: state.previewRevision ?? state.revision,
  };
}

export type ToolSwitch =
  | { kind: "switched"; state: EditorState }
  | { kind: "flush-or-discard"; requested: Tool };

/** Tool switches with a pending batch must not silently lose edits. */
export function requestToolSwitch(state: EditorState, tool: Tool): ToolSwitch {
  if (tool === state.tool) return { kind: "switched", state };
  if (state.pendingOps.length > 0) return { kind: "flush-or-discard", requested: tool };
  return { kind: "switched", state: { ...state, tool } };
}

export function discardBatch(state: EditorState): EditorState {
  return { ...state, pendingOps: [], previewRevision: null };
}

/** A successful PATCH ack: batch emptied, revision adopted. */
export function acknowledgePatch(state: EditorState, revision: number): EditorState {
  return { ...state, pendingOps: [], previewRevision: null, revision };
}

/** Raster fetched at `revision`: is the local preview still valid? */
export function previewValidFor(state: EditorState, revision: number): boolean {
  return state.previewRevision === null || state.previewRevision === revision;
}

export function setJobRunning(state: EditorState, running: boolean): EditorState {
  return { ...state, jobRunning: running };
}

let batchCounter = 0;

/** Client-generated batch ids make PATCH retries idempotent. */
export function nextBatchId(): string {
  batchCounter += 1;
  return `batch-${Date.now().toString(36)}-${batchCounter}`;
}
