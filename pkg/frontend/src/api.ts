/** Typed client for the backend HTTP surface (docs/api.md). */

import type { EditOp } from "./state.js";

export interface ApiError {
  code: string;
  message: string;
}

export class BackendError extends Error {
  code: string;
  status: number;

  constructor(status: number, payload: ApiError) {
    super(payload.message);
    this.code = payload.code;
    this.status = status;
  }
}

export interface ProjectSummary {
  project_id: string;
  name: string;
  created: number;
  modified: number;
  revision: number;
  width: number | null;
  height: number | null;
  segment_count: number;
  georeferenced: boolean;
  locked: boolean;
}

export interface JobStatus {
  job_id: string;
  project_id: string;
  kind: "segment" | "cluster";
  status: "QUEUED" | "RUNNING" | "DONE" | "FAILED";
  progress: number;
  error: string | null;
  result: Record<string, number> | null;
}

export interface ClassDef {
  class_id: number;
  name: string;
  color: [number, number, number, number];
}

export interface ClassesDoc {
  revision: number;
  classes: ClassDef[];
  assignment: Record<string, number>;
}

async function raiseForStatus(resp: Response): Promise<Response> {
  if (resp.ok) return resp;
  let payload: ApiError = { code: "HttpError", message: `${resp.status}` };
  try {
    payload = (await resp.json()) as ApiError;
  } catch {
    // non-JSON error body; keep the fallback payload
  }
  throw new BackendError(resp.status, payload);
}

export class BoscClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await raiseForStatus(await this.fetchFn(this.base + path, init));
    return (await resp.json()) as T;
  }

  health(): Promise<{ service: string; format_version: number }> {
    return this.json("/health");
  }

  listProjects(): Promise<ProjectSummary[]> {
    return this.json("/projects");
  }

  createProject(name: string): Promise<ProjectSummary> {
    return this.json("/projects", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name }),
    });
  }

  getProject(id: string): Promise<ProjectSummary> {
    return this.json(`/projects/${id}`);
  }

  async uploadImage(id: string, data: Blob | ArrayBuffer): Promise<{ revision: number }> {
    return this.json(`/projects/${id}/image`, { method: "PUT", body: data as BodyInit });
  }

  async fetchSegments(id: string): Promise<{ buffer: ArrayBuffer; revision: number }> {
    const resp = await raiseForStatus(await this.fetchFn(`${this.base}/projects/${id}/segments`));
    return {
      buffer: await resp.arrayBuffer(),
      revision: Number(resp.headers.get("X-Project-Revision") ?? "0"),
    };
  }

  patchSegments(
    id: string,
    batchId: string,
    ops: EditOp[],
  ): Promise<{ revision: number; applied: number }> {
    return this.json(`/projects/${id}/segments`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ batch_id: batchId, ops }),
    });
  }

  startSegmentJob(id: string, params: { k?: number; min_region_size?: number }): Promise<JobStatus> {
    return this.json(`/projects/${id}/segment/auto`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  startClusterJob(
    id: string,
    params: {
      k?: number;
      t?: number;
      standardize?: boolean;
      seeds?: Record<string, number>;
      propagate?: boolean;
      source?: "builtin" | "external";
    },
  ): Promise<JobStatus> {
    return this.json(`/projects/${id}/cluster`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.json(`/jobs/${jobId}`);
  }

  /** Poll with gentle backoff until the job reaches a terminal state. */
  async waitForJob(
    jobId: string,
    onProgress?: (job: JobStatus) => void,
    timeoutMs = 120_000,
  ): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    let delay = 100;
    for (;;) {
      const job = await this.getJob(jobId);
      onProgress?.(job);
      if (job.status === "DONE" || job.status === "FAILED") return job;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, delay));
      delay = Math.min(delay * 1.5, 1500);
    }
  }

  getClasses(id: string): Promise<ClassesDoc> {
    return this.json(`/projects/${id}/classes`);
  }

  putClasses(
    id: string,
    body: { classes?: ClassDef[]; assignment?: Record<string, number> },
  ): Promise<{ revision: number }> {
    return this.json(`/projects/${id}/classes`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  putGeoref(
    id: string,
    body: { pairs: { image: [number, number]; geo: [number, number] }[]; anchor_zoom?: number },
  ): Promise<{ revision: number; georef: { transform: number[]; anchor_zoom: number } }> {
    return this.json(`/projects/${id}/georef`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getStats(id: string): Promise<{
    classes: Record<string, { instance_count: number; pixel_count: number; area_m2?: number }>;
    total: { instance_count: number; pixel_count: number; area_m2?: number };
    unassigned_pixels: number;
    revision: number;
  }> {
    return this.json(`/projects/${id}/stats`);
  }
}
