import assert from "node:assert/strict";
import { test } from "node:test";
import { acknowledgePatch, discardBatch, editingEnabled, initialState, nextBatchId, previewValidFor, queueOp, requestToolSwitch, setJobRunning, } from "../src/state.js";
function withProject() {
    return { ...initialState(), projectId: "p1", revision: 5 };
}
test("patch acknowledgment empties the batch and adopts the revision", () => {
    let s = withProject();
    s = queueOp(s, { op: "fill" });
    s = queueOp(s, { op: "merge", ids: [1, 2] });
    assert.equal(s.pendingOps.length, 2);
    s = acknowledgePatch(s, 9);
    assert.equal(s.pendingOps.length, 0);
    assert.equal(s.previewRevision, null);
    assert.equal(s.revision, 9);
});
test("tool switch with a pending batch asks for flush-or-discard", () => {
    let s = withProject();
    const clean = requestToolSwitch(s, "polygon");
    assert.equal(clean.kind, "switched");
    s = queueOp(s, { op: "fill" });
    const dirty = requestToolSwitch(s, "merge-pick");
    assert.equal(dirty.kind, "flush-or-discard");
    if (dirty.kind === "flush-or-discard")
        assert.equal(dirty.requested, "merge-pick");
    const discarded = discardBatch(s);
    assert.equal(requestToolSwitch(discarded, "merge-pick").kind, "switched");
});
test("running job disables editing and queue attempts throw", () => {
    let s = withProject();
    assert.ok(editingEnabled(s));
    s = setJobRunning(s, true);
    assert.ok(!editingEnabled(s));
    assert.throws(() => queueOp(s, { op: "fill" }));
    s = setJobRunning(s, false);
    assert.ok(editingEnabled(s));
});
test("previews are tagged with the revision they were made against", () => {
    let s = withProject();
    s = queueOp(s, { op: "paint", polyline: [[1, 1]], radius: 2, target: 0 });
    assert.equal(s.previewRevision, 5);
    assert.ok(previewValidFor(s, 5));
    assert.ok(!previewValidFor(s, 6)); // server moved on: preview must be discarded
    assert.ok(previewValidFor(discardBatch(s), 6));
});
test("batch ids are unique", () => {
    const seen = new Set();
    for (let i = 0; i < 100; i++)
        seen.add(nextBatchId());
    assert.equal(seen.size, 100);
});
