"""Durable, bit-exact project persistence and the export bundle.

On-disk layout of a project directory:

* ``project.json``  -- manifest (stable key order, diffable)
* ``image.png``     -- lossless source image (absent until one is uploaded)
* ``segments.boscseg`` -- segment raster, binary format below
* ``classes.json``  -- class table plus the segment->class assignment

Segment raster format (little-endian, no compression): magic ``BOSCSEG1``
(8 bytes), u32 width, u32 height, then width*height u32 ids row-major.
"""

from __future__ import annotations

import io
import json
import struct
import zipfile
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import BadFormat, IoFailure, PartialClassMap, RegistryInconsistent
from .mapping import AffineTransform, GeoReference, export_geojson
from .project import FORMAT_VERSION, ClusterParams, Project
from .raster import ClassDef, ClassMap, ClassSet, RasterImage, SegmentMap, validate
from .segmentation import SegmenterParams
from .stats import compute_stats, segment_areas_m2, stats_to_dict

SEGMENT_MAGIC = b"BOSCSEG1"
MANIFEST_NAME = "project.json"
IMAGE_NAME = "image.png"
SEGMENTS_NAME = "segments.boscseg"
CLASSES_NAME = "classes.json"


def write_segment_raster(segmap: SegmentMap) -> bytes:
    """Encode the id raster in the BOSCSEG1 binary format."""
    header = SEGMENT_MAGIC + struct.pack("<II", segmap.width, segmap.height)
    return header + segmap.ids.astype("<u4").tobytes()


def read_segment_raster(data: bytes) -> SegmentMap:
    """Decode a BOSCSEG1 blob; rejects any magic/length mismatch."""
    if len(data) < 16 or data[:8] != SEGMENT_MAGIC:
        raise BadFormat("not a BOSCSEG1 segment raster")
    width, height = struct.unpack("<II", data[8:16])
    if width < 1 or height < 1:
        raise BadFormat("segment raster dimensions must be positive")
    expected = 16 + 4 * width * height
    if len(data) != expected:
        raise BadFormat(f"segment raster is {len(data)} bytes, expected {expected}")
    ids = np.frombuffer(data[16:], dtype="<u4").reshape(height, width)
    if ids.size and int(ids.max()) > np.iinfo(np.int32).max:
        raise BadFormat("segment id exceeds the 32-bit id space")
    return SegmentMap(ids.astype(np.int32))


def _georef_to_json(georef: GeoReference | None):
    if georef is None:
        return None
    return {
        "transform": list(georef.transform.coefficients()),
        "anchor_zoom": georef.anchor_zoom,
    }


def _georef_from_json(doc) -> GeoReference | None:
    if doc is None:
        return None
    return GeoReference(AffineTransform(*doc["transform"]), int(doc["anchor_zoom"]))


def _manifest(project: Project) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "project_id": project.project_id,
        "name": project.name,
        "created": project.created,
        "modified": project.modified,
        "image": IMAGE_NAME if project.image is not None else None,
        "segments": SEGMENTS_NAME if project.segmap is not None else None,
        "classes": CLASSES_NAME,
        "georef": _georef_to_json(project.georef),
        "segmenter_params": {
            "k": project.segmenter_params.k,
            "min_region_size": project.segmenter_params.min_region_size,
        },
        "cluster_params": {
            "k": project.cluster_params.k,
            "t": project.cluster_params.t,
            "standardize": project.cluster_params.standardize,
        },
    }


def _classes_doc(project: Project) -> dict:
    return {
        "classes": [
            {"class_id": c.class_id, "name": c.name, "color": list(c.color)}
            for c in project.class_set.classes
        ],
        "assignment": {str(sid): cid for sid, cid in sorted(project.classmap.items())},
    }


def save_project(project: Project, directory: str | Path) -> None:
    """Write the project so load_project returns a value-equal copy."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / MANIFEST_NAME).write_text(json.dumps(_manifest(project), indent=2) + "\n")
        (directory / CLASSES_NAME).write_text(json.dumps(_classes_doc(project), indent=2) + "\n")
        if project.image is not None:
            Image.fromarray(project.image.pixels).save(directory / IMAGE_NAME)
        if project.segmap is not None:
            (directory / SEGMENTS_NAME).write_bytes(write_segment_raster(project.segmap))
    except OSError as exc:
        raise IoFailure(f"cannot save project: {exc}") from exc


def load_project(directory: str | Path) -> Project:
    """Load and fully validate a saved project."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise IoFailure(f"no manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadFormat(f"unreadable manifest: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise BadFormat(f"unsupported format_version {manifest.get('format_version')}")

    image = None
    if manifest.get("image"):
        path = directory / manifest["image"]
        if not path.exists():
            raise BadFormat(f"manifest references missing file {manifest['image']}")
        try:
            with Image.open(path) as img:
                image = RasterImage(np.asarray(img.convert("RGB")))
        except OSError as exc:
            raise BadFormat(f"unreadable image: {exc}") from exc

    segmap = None
    if manifest.get("segments"):
        path = directory / manifest["segments"]
        if not path.exists():
            raise BadFormat(f"manifest references missing file {manifest['segments']}")
        segmap = read_segment_raster(path.read_bytes())

    try:
        classes_doc = json.loads((directory / manifest["classes"]).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadFormat(f"unreadable class file: {exc}") from exc
    class_set = ClassSet(
        [
            ClassDef(int(c["class_id"]), str(c["name"]), tuple(int(v) for v in c["color"]))
            for c in classes_doc.get("classes", [])
        ]
    )
    classmap: ClassMap = {int(k): int(v) for k, v in classes_doc.get("assignment", {}).items()}

    project = Project(
        project_id=str(manifest["project_id"]),
        name=str(manifest["name"]),
        created=int(manifest["created"]),
        modified=int(manifest["modified"]),
        image=image,
        segmap=segmap,
        class_set=class_set,
        classmap=classmap,
        georef=_georef_from_json(manifest.get("georef")),
        segmenter_params=SegmenterParams(
            k=float(manifest["segmenter_params"]["k"]),
            min_region_size=int(manifest["segmenter_params"]["min_region_size"]),
        ),
        cluster_params=ClusterParams(
            k=manifest["cluster_params"]["k"],
            t=manifest["cluster_params"]["t"],
            standardize=bool(manifest["cluster_params"]["standardize"]),
        ),
    )
    _check_consistency(project)
    return project


def _check_consistency(project: Project) -> None:
    if project.image is not None and project.segmap is not None:
        try:
            validate(project.image, project.segmap)
        except Exception as exc:
            raise RegistryInconsistent(str(exc)) from exc
    if project.segmap is not None:
        registered = set(project.segmap.registry)
        assigned = set(project.classmap)
        if assigned - registered:
            raise RegistryInconsistent("class assignment references unknown segments")
        class_ids = project.class_set.ids()
        if any(cid not in class_ids for cid in project.classmap.values()):
            raise RegistryInconsistent("class assignment references unknown classes")


def label_image(segmap: SegmentMap, classmap: ClassMap, class_set: ClassSet) -> np.ndarray:
    """Class-colored RGBA label raster; unassigned pixels are transparent."""
    for sid in segmap.registry:
        if sid not in classmap:
            raise PartialClassMap(f"segment {sid} has no class")
    lut = np.zeros((max(segmap.registry, default=0) + 1, 4), dtype=np.uint8)
    for sid in segmap.registry:
        lut[sid] = class_set.get(classmap[sid]).color
    return lut[segmap.ids]


def export_bundle(project: Project, target: str | Path) -> Path:
    """Write a zip archive of the final deliverables.

    Always: manifest.json and (when segmented) label.png plus stats.json;
    export.geojson and metric area fields only when georeferenced.
    """
    target = Path(target)
    try:
        with zipfile.ZipFile(target, "w", zipfile.ZIP_DEFLATED) as zf:
            zf.writestr("manifest.json", json.dumps(_manifest(project), indent=2) + "\n")
            if project.segmap is not None:
                img = label_image(project.segmap, project.classmap, project.class_set)
                buf = io.BytesIO()
                Image.fromarray(img).save(buf, format="PNG")
                zf.writestr("label.png", buf.getvalue())
                stats = compute_stats(project.segmap, project.classmap, project.georef)
                zf.writestr("stats.json", json.dumps(stats_to_dict(stats), indent=2) + "\n")
                if project.georef is not None:
                    doc = export_geojson(
                        project.segmap,
                        project.classmap,
                        project.class_set,
                        project.georef,
                        segment_areas_m2(project.segmap, project.georef),
                    )
                    zf.writestr("export.geojson", json.dumps(doc) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write bundle: {exc}") from exc
    return target
