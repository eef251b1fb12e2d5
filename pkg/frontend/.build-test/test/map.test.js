import assert from "node:assert/strict";
import { test } from "node:test";
import { basemapUrl, overlayUrl, renderMap, visibleTiles } from "../src/map.js";
import { latLonToWorldPx, worldPxToLatLon } from "../src/mercator.js";
test("mercator anchors and round trip", () => {
    assert.deepEqual(latLonToWorldPx(0, 0, 0), [128, 128]);
    const [x, y] = latLonToWorldPx(0, 180, 1);
    assert.ok(Math.abs(x - 512) < 1e-9 && Math.abs(y - 256) < 1e-9);
    for (const [lat, lon, z] of [[45.1, 7.6, 12], [-33.9, 151.2, 7], [0.001, -0.002, 18]]) {
        const [wx, wy] = latLonToWorldPx(lat, lon, z);
        const [lat2, lon2] = worldPxToLatLon(wx, wy, z);
        assert.ok(Math.abs(lat2 - lat) < 1e-9 && Math.abs(lon2 - lon) < 1e-9);
    }
});
test("url templates", () => {
    assert.equal(basemapUrl("https://x/{z}/{x}/{y}.png", 3, 4, 5), "https://x/3/4/5.png");
    assert.equal(overlayUrl("abc", 18, 9, 7, 200), "/projects/abc/tiles/18/9/7?alpha=200");
});
test("visible tiles cover the viewport", () => {
    const tiles = visibleTiles({ lat: 0, lon: 0, zoom: 2 }, 512, 512);
    // 1024-px world at z2; a 512px window centered at (512,512) spans 4 tiles
    assert.equal(tiles.length, 4);
    for (const t of tiles) {
        assert.equal(t.z, 2);
        assert.ok(t.screenX > -256 && t.screenX < 512);
        assert.ok(t.screenY > -256 && t.screenY < 512);
    }
});
class RecordingTarget {
    constructor() {
        this.draws = [];
        this.cleared = false;
    }
    clear() {
        this.cleared = true;
        this.draws = [];
    }
    drawTile(url, x, y, alpha) {
        this.draws.push({ url, x, y, alpha });
    }
}
// local tile fixture standing in for a public basemap server
const FIXTURE_TEMPLATE = "/fixtures/tiles/{z}/{x}/{y}.png";
test("overlay layer renders after georeferencing, above the basemap", () => {
    const target = new RecordingTarget();
    const view = { lat: 0, lon: 0, zoom: 2 };
    // before georeferencing: basemap only
    renderMap(target, view, 512, 512, {
        basemapTemplate: FIXTURE_TEMPLATE,
        projectId: "p1",
        overlayVisible: false,
        overlayOpacity: 0.7,
        overlayAlpha: 200,
    });
    assert.ok(target.draws.length > 0);
    assert.ok(target.draws.every((d) => d.url.startsWith("/fixtures/tiles/")));
    // after georeferencing: overlay tiles drawn after (above) the basemap
    const tiles = renderMap(target, view, 512, 512, {
        basemapTemplate: FIXTURE_TEMPLATE,
        projectId: "p1",
        overlayVisible: true,
        overlayOpacity: 0.7,
        overlayAlpha: 200,
    });
    const overlayDraws = target.draws.filter((d) => d.url.startsWith("/projects/p1/tiles/"));
    assert.equal(overlayDraws.length, tiles.length);
    assert.ok(overlayDraws.every((d) => d.alpha === 0.7));
    const firstOverlay = target.draws.findIndex((d) => d.url.startsWith("/projects/"));
    const lastBasemap = target.draws
        .map((d, i) => (d.url.startsWith("/fixtures/") ? i : -1))
        .reduce((a, b) => Math.max(a, b), -1);
    assert.ok(firstOverlay > lastBasemap, "overlay must draw above the basemap");
    // overlay and basemap tiles align on the same grid positions
    for (const od of overlayDraws) {
        assert.ok(target.draws.some((d) => d.url.startsWith("/fixtures/") && d.x === od.x && d.y === od.y));
    }
});
