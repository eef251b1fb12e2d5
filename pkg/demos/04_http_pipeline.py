"""
The full pipeline over HTTP
===========================

Drives the backend service end to end the way the web frontend does:
create a project, upload imagery, run the segmentation job, seed classes,
cluster, georeference, then pull tiles, stats and the export bundle.

Starts an in-process server on a local port; no network access needed.
"""

import io
import threading
import time

import httpx
import numpy as np
import uvicorn
from PIL import Image

from bosc.service import ServiceConfig, create_app

PORT = 8765
config = ServiceConfig(port=PORT, data_root="./demo-data")
server = uvicorn.Server(uvicorn.Config(create_app(config), port=PORT, log_level="warning"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)

api = httpx.Client(base_url=f"http://127.0.0.1:{PORT}")
print("health:", api.get("/health").json())

pid = api.post("/projects", json={"name": "http demo"}).json()["project_id"]

scene = np.full((64, 64, 3), (28, 32, 26), dtype=np.uint8)
yy, xx = np.mgrid[0:64, 0:64]
scene[(xx - 18) ** 2 + (yy - 22) ** 2 <= 70] = (205, 60, 50)
scene[(xx - 44) ** 2 + (yy - 44) ** 2 <= 90] = (60, 175, 55)
buf = io.BytesIO()
Image.fromarray(scene).save(buf, format="PNG")
api.put(f"/projects/{pid}/image", content=buf.getvalue())

job = api.post(f"/projects/{pid}/segment/auto", json={"min_region_size": 16}).json()
while True:
    doc = api.get(f"/jobs/{job['job_id']}").json()
    if doc["status"] in ("DONE", "FAILED"):
        break
    time.sleep(0.05)
print("segmentation job:", doc["status"], doc["result"])

api.put(
    f"/projects/{pid}/classes",
    json={"classes": [
        {"class_id": 2, "name": "roof", "color": [220, 60, 50, 255]},
        {"class_id": 3, "name": "crown", "color": [60, 175, 55, 255]},
        {"class_id": 4, "name": "ground", "color": [40, 44, 38, 255]},
    ]},
)

# seed one segment per class by looking up the blob ids in the raster
from bosc.store import read_segment_raster  # noqa: E402

seg = read_segment_raster(api.get(f"/projects/{pid}/segments").content)
seeds = {
    str(int(seg.ids[22, 18])): 2,
    str(int(seg.ids[44, 44])): 3,
    str(int(seg.ids[0, 0])): 4,
}
job = api.post(f"/projects/{pid}/cluster", json={"k": 3, "seeds": seeds}).json()
while api.get(f"/jobs/{job['job_id']}").json()["status"] not in ("DONE", "FAILED"):
    time.sleep(0.05)
print("classes:", api.get(f"/projects/{pid}/classes").json()["assignment"])

pairs = [
    {"image": [0, 0], "geo": [39.47, -0.38]},
    {"image": [64, 0], "geo": [39.47, -0.3795]},
    {"image": [0, 64], "geo": [39.4696, -0.38]},
]
georef = api.put(f"/projects/{pid}/georef", json={"pairs": pairs}).json()["georef"]
print("anchor zoom:", georef["anchor_zoom"])

stats = api.get(f"/projects/{pid}/stats").json()
print("stats:", stats)

cx = georef["transform"][2]
cy = georef["transform"][5]
tile = api.get(f"/projects/{pid}/tiles/18/{int(cx // 256)}/{int(cy // 256)}")
print("tile bytes:", len(tile.content), "revision:", tile.headers["X-Project-Revision"])

bundle = api.get(f"/projects/{pid}/export/bundle")
open("demo_bundle.zip", "wb").write(bundle.content)
print("wrote demo_bundle.zip")

api.post(f"/projects/{pid}/save")
print("saved under", config.data_root)
server.should_exit = True
