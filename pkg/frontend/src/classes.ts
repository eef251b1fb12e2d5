/**
 * Classification panel logic: stop-rule controls, seed bookkeeping and the
 * legend rows (class palette + live counts from the stats endpoint).
 */

import type { ClassDef } from "./api.js";

export interface ClusterControls {
  mode: "k" | "t";
  k: number;
  t: number;
  standardize: boolean;
  propagate: boolean;
  source: "builtin" | "external";
}

export function defaultControls(): ClusterControls {
  return { mode: "k", k: 2, t: 1.0, standardize: false, propagate: false, source: "builtin" };
}

export function clusterRequestBody(
  controls: ClusterControls,
  seeds: Record<string, number>,
): Record<string, unknown> {
  const body: Record<string, unknown> = {
    standardize: controls.standardize,
    propagate: controls.propagate,
    source: controls.source,
  };
  if (controls.mode === "k") body.k = controls.k;
  else body.t = controls.t;
  if (Object.keys(seeds).length > 0) body.seeds = seeds;
  return body;
}

/** Toggle a seed: clicking a seeded segment with the same class unseeds it. */
export function toggleSeed(
  seeds: Record<string, number>,
  segmentId: number,
  classId: number,
): Record<string, number> {
  const key = String(segmentId);
  const out = { ...seeds };
  if (out[key] === classId) delete out[key];
  else out[key] = classId;
  return out;
}

export interface LegendRow {
  classId: number;
  name: string;
  cssColor: string;
  instances: number;
  pixels: number;
  areaM2: number | null;
}

export function legendRows(
  classes: ClassDef[],
  stats: Record<string, { instance_count: number; pixel_count: number; area_m2?: number }>,
): LegendRow[] {
  return classes.map((c) => {
    const s = stats[String(c.class_id)];
    return {
      classId: c.class_id,
      name: c.name,
      cssColor: `rgba(${c.color[0]}, ${c.color[1]}, ${c.color[2]}, ${(c.color[3] / 255).toFixed(3)})`,
      instances: s?.instance_count ?? 0,
      pixels: s?.pixel_count ?? 0,
      areaM2: s?.area_m2 ?? null,
    };
  });
}
