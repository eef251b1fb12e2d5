/**
 * Minimal slippy map: a basemap tile layer fetched directly by the browser
 * from a configurable public URL template, plus the project's overlay tile
 * layer with an opacity slider.  All tile math is pure and unit-testable;
 * drawing goes through a narrow context interface so tests can record it.
 */

import { TILE_SIZE, latLonToWorldPx } from "./mercator.js";
import type { Viewport } from "./state.js";

export interface TilePlacement {
  z: number;
  x: number;
  y: number;
  screenX: number;
  screenY: number;
}

export interface DrawTarget {
  drawTile(url: string, x: number, y: number, alpha: number): void;
  clear(width: number, height: number): void;
}

export const DEFAULT_BASEMAP_TEMPLATE = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";

export function basemapUrl(template: string, z: number, x: number, y: number): string {
  return template
    .replaceAll("{z}", String(z))
    .replaceAll("{x}", String(x))
    .replaceAll("{y}", String(y));
}

export function overlayUrl(projectId: string, z: number, x: number, y: number, alpha: number): string {
  return `/projects/${projectId}/tiles/${z}/${x}/${y}?alpha=${alpha}`;
}

/** Tiles covering a canvas of the given size for the viewport, with draw offsets. */
export function visibleTiles(view: Viewport, width: number, height: number): TilePlacement[] {
  const z = Math.round(view.zoom);
  const [cx, cy] = latLonToWorldPx(view.lat, view.lon, z);
  const left = cx - width / 2;
  const top = cy - height / 2;
  const n = Math.pow(2, z);
  const x0 = Math.floor(left / TILE_SIZE);
  const y0 = Math.floor(top / TILE_SIZE);
  const x1 = Math.floor((left + width - 1) / TILE_SIZE);
  const y1 = Math.floor((top + height - 1) / TILE_SIZE);
  const out: TilePlacement[] = [];
  for (let ty = Math.max(0, y0); ty <= Math.min(n - 1, y1); ty++) {
    for (let tx = Math.max(0, x0); tx <= Math.min(n - 1, x1); tx++) {
      out.push({
        z,
        x: tx,
        y: ty,
        screenX: tx * TILE_SIZE - left,
        screenY: ty * TILE_SIZE - top,
      });
    }
  }
  return out;
}

export interface MapLayersConfig {
  basemapTemplate: string;
  projectId: string | null;
  overlayVisible: boolean;
  overlayOpacity: number; // 0..1 slider
  overlayAlpha: number; // 0..255 server-side alpha
}

/** Compose one frame: basemap first, then the overlay with slider opacity. */
export function renderMap(
  target: DrawTarget,
  view: Viewport,
  width: number,
  height: number,
  config: MapLayersConfig,
): TilePlacement[] {
  target.clear(width, height);
  const tiles = visibleTiles(view, width, height);
  for (const t of tiles) {
    target.drawTile(basemapUrl(config.basemapTemplate, t.z, t.x, t.y), t.screenX, t.screenY, 1);
  }
  if (config.overlayVisible && config.projectId) {
    for (const t of tiles) {
      target.drawTile(
        overlayUrl(config.projectId, t.z, t.x, t.y, config.overlayAlpha),
        t.screenX,
        t.screenY,
        config.overlayOpacity,
      );
    }
  }
  return tiles;
}
