/** Typed client for the backend HTTP surface (docs/api.md). */
export class BackendError extends Error {
    constructor(status, payload) {
        super(payload.message);
        this.code = payload.code;
        this.status = status;
    }
}
async function raiseForStatus(resp) {
    if (resp.ok)
        return resp;
    let payload = { code: "HttpError", message: `${resp.status}` };
    try {
        payload = (await resp.json());
    }
    catch {
        // non-JSON error body; keep the fallback payload
    }
    throw new BackendError(resp.status, payload);
}
export class BoscClient {
    constructor(base = "", fetchFn = fetch) {
        this.base = base;
        this.fetchFn = fetchFn;
    }
    async json(path, init) {
        const resp = await raiseForStatus(await this.fetchFn(this.base + path, init));
        return (await resp.json());
    }
    health() {
        return this.json("/health");
    }
    listProjects() {
        return this.json("/projects");
    }
    createProject(name) {
        return this.json("/projects", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ name }),
        });
    }
    getProject(id) {
        return this.json(`/projects/${id}`);
    }
    async uploadImage(id, data) {
        return this.json(`/projects/${id}/image`, { method: "PUT", body: data });
    }
    async fetchSegments(id) {
        const resp = await raiseForStatus(await this.fetchFn(`${this.base}/projects/${id}/segments`));
        return {
            buffer: await resp.arrayBuffer(),
            revision: Number(resp.headers.get("X-Project-Revision") ?? "0"),
        };
    }
    patchSegments(id, batchId, ops) {
        return this.json(`/projects/${id}/segments`, {
            method: "PATCH",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ batch_id: batchId, ops }),
        });
    }
    startSegmentJob(id, params) {
        return this.json(`/projects/${id}/segment/auto`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(params),
        });
    }
    startClusterJob(id, params) {
        return this.json(`/projects/${id}/cluster`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(params),
        });
    }
    getJob(jobId) {
        return this.json(`/jobs/${jobId}`);
    }
    /** Poll with gentle backoff until the job reaches a terminal state. */
    async waitForJob(jobId, onProgress, timeoutMs = 120_000) {
        const deadline = Date.now() + timeoutMs;
        let delay = 100;
        for (;;) {
            const job = await this.getJob(jobId);
            onProgress?.(job);
            if (job.status === "DONE" || job.status === "FAILED")
                return job;
            if (Date.now() > deadline)
                throw new Error(`job ${jobId} timed out`);
            await new Promise((resolve) => setTimeout(resolve, delay));
            delay = Math.min(delay * 1.5, 1500);
        }
    }
    getClasses(id) {
        return this.json(`/projects/${id}/classes`);
    }
    putClasses(id, body) {
        return this.json(`/projects/${id}/classes`, {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    putGeoref(id, body) {
        return this.json(`/projects/${id}/georef`, {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    getStats(id) {
        return this.json(`/projects/${id}/stats`);
    }
}
