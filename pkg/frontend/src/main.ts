/** App bootstrap: wires the editor canvas, panels and map to the backend. */

import { BackendError, BoscClient, type ClassDef } from "./api.js";
import { clusterRequestBody, defaultControls, legendRows, toggleSeed } from "./classes.js";
import { composeEditorFrame, previewPixels, segmentAt } from "./editor.js";
import {
  addGeoPoint,
  addImagePoint,
  applyServerError,
  deletePair,
  initialWizard,
  submitBody,
  submitEnabled,
} from "./georef.js";
import {
  DEFAULT_BASEMAP_TEMPLATE,
  renderMap,
  type DrawTarget,
  type MapLayersConfig,
} from "./map.js";
import { worldPxToLatLon, latLonToWorldPx, TILE_SIZE } from "./mercator.js";
import { decodeSegmentRaster, type SegmentRaster } from "./segraster.js";
import {
  acknowledgePatch,
  discardBatch,
  editingEnabled,
  initialState,
  nextBatchId,
  previewValidFor,
  queueOp,
  requestToolSwitch,
  setJobRunning,
  type EditOp,
  type EditorState,
  type Tool,
} from "./state.js";

const client = new BoscClient("");
let state: EditorState = initialState();
let raster: SegmentRaster | null = null;
let imageRgb: Uint8ClampedArray | null = null;
let imageSize: [number, number] | null = null;
let classes: ClassDef[] = [];
let assignment: Record<string, number> = {};
let seeds: Record<string, number> = {};
let mergeSelection: number[] = [];
let wizard = initialWizard();
let controls = defaultControls();
let overlayVisible = false;
let statsCache: Record<string, { instance_count: number; pixel_count: number; area_m2?: number }> = {};

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

const editorCanvas = $<HTMLCanvasElement>("#editor-canvas");
const mapCanvas = $<HTMLCanvasElement>("#map-canvas");
const editorError = $("#editor-error");
const georefError = $("#georef-error");

// ---------------------------------------------------------------------------
// editor rendering

let frame: Uint8ClampedArray<ArrayBuffer> | null = null;

function redrawEditor(): void {
  if (!imageSize) return;
  const [w, h] = imageSize;
  editorCanvas.width = w;
  editorCanvas.height = h;
  if (!frame || frame.length !== w * h * 4) frame = new Uint8ClampedArray(w * h * 4);
  const colorTable: Record<number, [number, number, number, number]> = {};
  for (const c of classes) colorTable[c.class_id] = c.color;
  composeEditorFrame(
    frame,
    imageRgb,
    raster,
    assignment,
    colorTable,
    state.layers,
    previewPixels(state.pendingOps, w, h),
    w,
    h,
  );
  const ctx = editorCanvas.getContext("2d")!;
  ctx.putImageData(new ImageData(frame, w, h), 0, 0);
  // control point markers
  ctx.fillStyle = "#ffd84d";
  ctx.font = "10px sans-serif";
  wizard.pairs.forEach((p, i) => {
    if (!p.image) return;
    ctx.beginPath();
    ctx.arc(p.image[0], p.image[1], 3, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillText(String(i + 1), p.image[0] + 4, p.image[1] - 4);
  });
  $("#revision-label").textContent = state.projectId
    ? `rev ${state.revision}${state.jobRunning ? " (job running)" : ""}`
    : "";
  updateButtons();
}

function updateButtons(): void {
  const enabled = editingEnabled(state);
  document.querySelectorAll<HTMLButtonElement>("#toolbar .tool").forEach((btn) => {
    btn.disabled = !enabled;
    btn.classList.toggle("active", btn.dataset.tool === state.tool);
  });
  $<HTMLButtonElement>("#btn-apply").disabled = !enabled || state.pendingOps.length === 0;
  $<HTMLButtonElement>("#btn-discard").disabled = state.pendingOps.length === 0;
  $<HTMLButtonElement>("#btn-merge-selected").disabled = !enabled || mergeSelection.length < 2;
  $<HTMLButtonElement>("#btn-segment").disabled = !state.projectId || state.jobRunning;
  $<HTMLButtonElement>("#btn-cluster").disabled = !state.projectId || state.jobRunning;
  $<HTMLButtonElement>("#btn-georef-submit").disabled = !state.projectId || !submitEnabled(wizard);
}

async function refetchRaster(): Promise<void> {
  const pid = state.projectId;
  if (!pid) return;
  const { buffer, revision } = await client.fetchSegments(pid);
  raster = decodeSegmentRaster(buffer);
  if (!previewValidFor(state, revision)) {
    state = discardBatch(state); // stale preview: server moved on without us
  }
  state = { ...state, revision };
  const doc = await client.getClasses(pid);
  classes = doc.classes;
  assignment = doc.assignment;
  renderClassSelect();
  await refreshStats();
  redrawEditor();
}

// ---------------------------------------------------------------------------
// project lifecycle

$("#btn-create").addEventListener("click", async () => {
  const name = $<HTMLInputElement>("#project-name").value || "untitled";
  const summary = await client.createProject(name);
  state = { ...initialState(), projectId: summary.project_id, revision: summary.revision };
  raster = null;
  imageRgb = null;
  imageSize = null;
  seeds = {};
  wizard = initialWizard();
  overlayVisible = false;
  redrawEditor();
});

$<HTMLInputElement>("#image-file").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  if (!input.files?.length || !state.projectId) return;
  const file = input.files[0];
  await client.uploadImage(state.projectId, file);
  const bitmap = await createImageBitmap(file);
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const sctx = scratch.getContext("2d")!;
  sctx.drawImage(bitmap, 0, 0);
  const data = sctx.getImageData(0, 0, bitmap.width, bitmap.height).data;
  imageRgb = new Uint8ClampedArray(bitmap.width * bitmap.height * 3);
  for (let i = 0; i < bitmap.width * bitmap.height; i++) {
    imageRgb[i * 3] = data[i * 4];
    imageRgb[i * 3 + 1] = data[i * 4 + 1];
    imageRgb[i * 3 + 2] = data[i * 4 + 2];
  }
  imageSize = [bitmap.width, bitmap.height];
  await refetchRaster();
});

$("#btn-segment").addEventListener("click", async () => {
  const pid = state.projectId;
  if (!pid) return;
  state = setJobRunning(state, true);
  redrawEditor();
  try {
    const job = await client.startSegmentJob(pid, {});
    const done = await client.waitForJob(job.job_id, (j) => {
      $("#job-progress").textContent = `${j.kind}: ${j.status} ${(j.progress * 100) | 0}%`;
    });
    $("#job-progress").textContent = done.status === "DONE" ? "" : `failed: ${done.error}`;
  } finally {
    state = setJobRunning(state, false);
    await refetchRaster();
  }
});

// ---------------------------------------------------------------------------
// tools

document.querySelectorAll<HTMLButtonElement>("#toolbar .tool").forEach((btn) => {
  btn.addEventListener("click", async () => {
    const result = requestToolSwitch(state, btn.dataset.tool as Tool);
    if (result.kind === "switched") {
      state = result.state;
    } else {
      // non-empty batch: the user decides
      if (window.confirm("Apply pending edits before switching tools? (Cancel discards them)")) {
        await applyBatch();
      } else {
        state = discardBatch(state);
      }
      state = { ...state, tool: result.requested };
    }
    mergeSelection = [];
    redrawEditor();
  });
});

$<HTMLInputElement>("#brush-radius").addEventListener("input", (ev) => {
  state = { ...state, brushRadius: Number((ev.target as HTMLInputElement).value) };
});

function canvasPoint(ev: MouseEvent): [number, number] {
  const rect = editorCanvas.getBoundingClientRect();
  return [
    ((ev.clientX - rect.left) / rect.width) * editorCanvas.width,
    ((ev.clientY - rect.top) / rect.height) * editorCanvas.height,
  ];
}

let strokePoints: [number, number][] = [];
let polygonRing: [number, number][] = [];
let drawing = false;

editorCanvas.addEventListener("pointerdown", (ev) => {
  if (!imageSize || !editingEnabled(state)) return;
  const [x, y] = canvasPoint(ev);
  if (state.tool === "brush") {
    drawing = true;
    strokePoints = [[x, y]];
  } else if (state.tool === "polygon") {
    polygonRing.push([x, y]);
    if (ev.detail === 2 && polygonRing.length >= 3) {
      state = queueOp(state, { op: "polygon", ring: polygonRing });
      polygonRing = [];
      redrawEditor();
    }
  } else if (state.tool === "merge-pick" && raster) {
    const sid = segmentAt(raster, x, y);
    if (sid > 0) {
      mergeSelection = mergeSelection.includes(sid)
        ? mergeSelection.filter((v) => v !== sid)
        : [...mergeSelection, sid];
      updateButtons();
    }
  } else if (state.tool === "seed-label" && raster) {
    const sid = segmentAt(raster, x, y);
    if (sid > 0) {
      seeds = toggleSeed(seeds, sid, state.selectedClass);
      void reassignSegment(sid);
    }
  } else if (state.tool === "control-point") {
    wizard = addImagePoint(wizard, x, y);
    renderPairList();
    redrawEditor();
  }
});

editorCanvas.addEventListener("pointermove", (ev) => {
  if (!drawing) return;
  strokePoints.push(canvasPoint(ev));
});

editorCanvas.addEventListener("pointerup", () => {
  if (!drawing) return;
  drawing = false;
  state = queueOp(state, {
    op: "paint",
    polyline: strokePoints,
    radius: state.brushRadius,
    target: state.selectedClass > 0 ? freshOrSelectedTarget() : 0,
  });
  strokePoints = [];
  redrawEditor();
});

function freshOrSelectedTarget(): number {
  // brush paints the segment selected in the merge list if any, else a new one
  if (mergeSelection.length === 1) return mergeSelection[0];
  let max = 0;
  if (raster) for (const v of raster.ids) max = Math.max(max, v);
  return max + 1;
}

$("#btn-merge-selected").addEventListener("click", () => {
  if (mergeSelection.length >= 2) {
    state = queueOp(state, { op: "merge", ids: [...mergeSelection] });
    mergeSelection = [];
    redrawEditor();
  }
});

async function applyBatch(): Promise<void> {
  if (!state.projectId || state.pendingOps.length === 0) return;
  const ops: EditOp[] = [...state.pendingOps];
  try {
    const ack = await client.patchSegments(state.projectId, nextBatchId(), ops);
    state = acknowledgePatch(state, ack.revision);
    editorError.textContent = "";
    await refetchRaster();
  } catch (err) {
    if (err instanceof BackendError) {
      // batch stays queued for retry; code shown verbatim
      editorError.textContent = `${err.code}: ${err.message}`;
    } else {
      throw err;
    }
  }
  redrawEditor();
}

$("#btn-apply").addEventListener("click", () => void applyBatch());
$("#btn-discard").addEventListener("click", () => {
  state = discardBatch(state);
  redrawEditor();
});

// ---------------------------------------------------------------------------
// classification panel

function renderClassSelect(): void {
  const select = $<HTMLSelectElement>("#class-select");
  select.innerHTML = "";
  for (const c of classes) {
    const opt = document.createElement("option");
    opt.value = String(c.class_id);
    opt.textContent = `${c.class_id} ${c.name}`;
    select.appendChild(opt);
  }
  select.value = String(state.selectedClass);
  renderLegend();
}

$<HTMLSelectElement>("#class-select").addEventListener("change", (ev) => {
  state = { ...state, selectedClass: Number((ev.target as HTMLSelectElement).value) };
});

function renderLegend(): void {
  const tbody = $("#legend").querySelector("tbody")!;
  tbody.innerHTML = "";
  for (const row of legendRows(classes, statsCache)) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td><span class="swatch" style="background:${row.cssColor}"></span></td>` +
      `<td>${row.name}</td><td>${row.instances}</td><td>${row.pixels}</td>` +
      `<td>${row.areaM2 === null ? "-" : row.areaM2.toFixed(1)}</td>`;
    tbody.appendChild(tr);
  }
}

async function reassignSegment(sid: number): Promise<void> {
  if (!state.projectId) return;
  const next = { ...assignment, [String(sid)]: state.selectedClass };
  const ack = await client.putClasses(state.projectId, { assignment: next });
  state = { ...state, revision: ack.revision };
  assignment = next;
  await refreshStats();
  redrawEditor();
}

$("#btn-add-class").addEventListener("click", async () => {
  if (!state.projectId) return;
  const name = window.prompt("class name?") || `class-${classes.length + 1}`;
  const nextId = Math.max(1, ...classes.map((c) => c.class_id)) + 1;
  const hue = ((nextId - 2) * 137.50776405003785) % 360;
  const rgb = hsvToRgb(hue, 1, 1);
  const updated = [...classes, { class_id: nextId, name, color: [...rgb, 255] as [number, number, number, number] }];
  const ack = await client.putClasses(state.projectId, { classes: updated });
  state = { ...state, revision: ack.revision };
  classes = updated;
  renderClassSelect();
});

function hsvToRgb(h: number, s: number, v: number): [number, number, number] {
  const c = v * s;
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = v - c;
  const [r, g, b] =
    h < 60 ? [c, x, 0] : h < 120 ? [x, c, 0] : h < 180 ? [0, c, x]
    : h < 240 ? [0, x, c] : h < 300 ? [x, 0, c] : [c, 0, x];
  return [Math.round((r + m) * 255), Math.round((g + m) * 255), Math.round((b + m) * 255)];
}

document.querySelectorAll<HTMLInputElement>('input[name="stop"]').forEach((radio) => {
  radio.addEventListener("change", () => {
    controls = { ...controls, mode: radio.value as "k" | "t" };
  });
});

$("#btn-cluster").addEventListener("click", async () => {
  const pid = state.projectId;
  if (!pid) return;
  controls = {
    ...controls,
    k: Number($<HTMLInputElement>("#stop-k").value),
    t: Number($<HTMLInputElement>("#stop-t").value),
    standardize: $<HTMLInputElement>("#opt-standardize").checked,
    propagate: $<HTMLInputElement>("#opt-propagate").checked,
  };
  state = setJobRunning(state, true);
  redrawEditor();
  try {
    const job = await client.startClusterJob(pid, clusterRequestBody(controls, seeds));
    const done = await client.waitForJob(job.job_id, (j) => {
      $("#job-progress").textContent = `${j.kind}: ${j.status} ${(j.progress * 100) | 0}%`;
    });
    $("#job-progress").textContent = done.status === "DONE" ? "" : `failed: ${done.error}`;
  } finally {
    state = setJobRunning(state, false);
    await refetchRaster();
  }
});

async function refreshStats(): Promise<void> {
  if (!state.projectId || !raster) return;
  try {
    const stats = await client.getStats(state.projectId);
    statsCache = stats.classes;
    const total = stats.total;
    $("#stats-body").textContent =
      `instances: ${total.instance_count}\npixels: ${total.pixel_count}` +
      (total.area_m2 !== undefined ? `\narea: ${total.area_m2.toFixed(1)} m2` : "") +
      `\nunassigned: ${stats.unassigned_pixels}`;
    renderLegend();
  } catch {
    // stats may be unavailable before segmentation; leave the panel as-is
  }
}

// ---------------------------------------------------------------------------
// georeference wizard + map

function renderPairList(): void {
  const list = $("#pair-list");
  list.innerHTML = "";
  wizard.pairs.forEach((pair, i) => {
    const li = document.createElement("li");
    if (wizard.highlightCollinear) li.classList.add("collinear");
    const img = pair.image ? `(${pair.image[0].toFixed(1)}, ${pair.image[1].toFixed(1)})` : "?";
    const geo = pair.geo ? `(${pair.geo[0].toFixed(5)}, ${pair.geo[1].toFixed(5)})` : "?";
    li.textContent = `img ${img} -> map ${geo} `;
    const del = document.createElement("button");
    del.textContent = "x";
    del.addEventListener("click", () => {
      wizard = deletePair(wizard, i);
      renderPairList();
      redrawEditor();
    });
    li.appendChild(del);
    list.appendChild(li);
  });
  georefError.textContent = wizard.error ?? "";
  updateButtons();
  drawMap();
}

$("#btn-georef-submit").addEventListener("click", async () => {
  if (!state.projectId || !submitEnabled(wizard)) return;
  try {
    const ack = await client.putGeoref(state.projectId, submitBody(wizard));
    state = { ...state, revision: ack.revision };
    overlayVisible = true;
    // jump the map viewport to the fitted footprint
    const t = ack.georef.transform;
    const z0 = ack.georef.anchor_zoom;
    if (imageSize) {
      const wx = t[0] * (imageSize[0] / 2) + t[1] * (imageSize[1] / 2) + t[2];
      const wy = t[3] * (imageSize[0] / 2) + t[4] * (imageSize[1] / 2) + t[5];
      const [lat, lon] = worldPxToLatLon(wx, wy, z0);
      state = { ...state, viewport: { lat, lon, zoom: Math.min(z0, 19) } };
    }
    wizard = { ...wizard, error: null, highlightCollinear: false };
    await refreshStats();
  } catch (err) {
    if (err instanceof BackendError) {
      wizard = applyServerError(wizard, err.code, err.message);
    } else {
      throw err;
    }
  }
  renderPairList();
});

const tileCache = new Map<string, HTMLImageElement>();

const canvasTarget: DrawTarget = {
  clear(width, height) {
    const ctx = mapCanvas.getContext("2d")!;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#0b0d10";
    ctx.fillRect(0, 0, width, height);
  },
  drawTile(url, x, y, alpha) {
    const ctx = mapCanvas.getContext("2d")!;
    let img = tileCache.get(url);
    if (!img) {
      img = new Image();
      img.crossOrigin = "anonymous";
      img.src = url;
      img.onload = () => drawMap();
      tileCache.set(url, img);
    }
    if (img.complete && img.naturalWidth > 0) {
      ctx.globalAlpha = alpha;
      ctx.drawImage(img, x, y, TILE_SIZE, TILE_SIZE);
      ctx.globalAlpha = 1;
    }
  },
};

function mapConfig(): MapLayersConfig {
  return {
    basemapTemplate: DEFAULT_BASEMAP_TEMPLATE,
    projectId: state.projectId,
    overlayVisible,
    overlayOpacity: Number($<HTMLInputElement>("#overlay-opacity").value),
    overlayAlpha: 200,
  };
}

function drawMap(): void {
  renderMap(canvasTarget, state.viewport, mapCanvas.width, mapCanvas.height, mapConfig());
}

$<HTMLInputElement>("#overlay-opacity").addEventListener("input", drawMap);

mapCanvas.addEventListener("pointerdown", (ev) => {
  const rect = mapCanvas.getBoundingClientRect();
  const sx = ((ev.clientX - rect.left) / rect.width) * mapCanvas.width;
  const sy = ((ev.clientY - rect.top) / rect.height) * mapCanvas.height;
  const z = Math.round(state.viewport.zoom);
  const [cx, cy] = latLonToWorldPx(state.viewport.lat, state.viewport.lon, z);
  const [lat, lon] = worldPxToLatLon(
    cx - mapCanvas.width / 2 + sx,
    cy - mapCanvas.height / 2 + sy,
    z,
  );
  if (state.tool === "control-point") {
    wizard = addGeoPoint(wizard, lat, lon);
    renderPairList();
  } else {
    state = { ...state, viewport: { ...state.viewport, lat, lon } };
    drawMap();
  }
});

mapCanvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const dz = ev.deltaY < 0 ? 1 : -1;
  const zoom = Math.max(0, Math.min(19, Math.round(state.viewport.zoom) + dz));
  state = { ...state, viewport: { ...state.viewport, zoom } };
  drawMap();
});

// ---------------------------------------------------------------------------

void client.health().then(() => {
  renderClassSelect();
  redrawEditor();
  drawMap();
});
