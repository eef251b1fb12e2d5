import assert from "node:assert/strict";
import { test } from "node:test";

import {
  addGeoPoint,
  addImagePoint,
  applyServerError,
  deletePair,
  initialWizard,
  submitBody,
  submitEnabled,
} from "../src/georef.js";

test("submit stays disabled below three complete pairs", () => {
  let w = initialWizard();
  assert.ok(!submitEnabled(w));
  w = addImagePoint(w, 1, 2);
  w = addGeoPoint(w, 10, 20);
  w = addImagePoint(w, 3, 4);
  w = addGeoPoint(w, 11, 21);
  assert.ok(!submitEnabled(w)); // two pairs
  w = addImagePoint(w, 5, 6);
  assert.ok(!submitEnabled(w)); // third pair incomplete
  w = addGeoPoint(w, 12, 22);
  assert.ok(submitEnabled(w)); // three complete pairs
});

test("alternating clicks pair up by first incomplete slot", () => {
  let w = initialWizard();
  w = addImagePoint(w, 1, 1);
  w = addImagePoint(w, 2, 2); // second image click opens a second pair
  w = addGeoPoint(w, 40, 4); // fills the first pair's map side
  assert.deepEqual(w.pairs[0], { image: [1, 1], geo: [40, 4] });
  assert.deepEqual(w.pairs[1], { image: [2, 2], geo: null });
});

test("deleting a pair below three disables submit again", () => {
  let w = initialWizard();
  for (let i = 0; i < 3; i++) {
    w = addImagePoint(w, i, i);
    w = addGeoPoint(w, i, i);
  }
  assert.ok(submitEnabled(w));
  w = deletePair(w, 1);
  assert.ok(!submitEnabled(w));
});

test("submit body carries only complete pairs and the anchor zoom", () => {
  let w = initialWizard(17);
  w = addImagePoint(w, 1, 2);
  w = addGeoPoint(w, 39.5, -0.4);
  w = addImagePoint(w, 3, 4);
  const body = submitBody(w);
  assert.equal(body.anchor_zoom, 17);
  assert.deepEqual(body.pairs, [{ image: [1, 2], geo: [39.5, -0.4] }]);
});

test("degenerate control points highlight the pair list", () => {
  let w = initialWizard();
  w = applyServerError(w, "DegenerateControlPoints", "image control points are collinear");
  assert.ok(w.highlightCollinear);
  assert.match(w.error ?? "", /DegenerateControlPoints/);
  w = applyServerError(w, "SingularTransform", "x");
  assert.ok(!w.highlightCollinear);
});

test("adding a point clears a previous error", () => {
  let w = initialWizard();
  w = applyServerError(w, "DegenerateControlPoints", "collinear");
  w = addImagePoint(w, 9, 9);
  assert.equal(w.error, null);
  assert.ok(!w.highlightCollinear);
});
