"""Per-segment descriptors and hierarchical clustering classification.

Clustering is agglomerative with unweighted average linkage: the distance
between clusters is the mean pairwise Euclidean distance, the globally
closest pair merges at each step, and ties on height break by the smallest
(min leaf of left, min leaf of right).  Everything is deterministic.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyRegistry,
    InvalidStop,
    NonFiniteFeature,
    UnknownClass,
    UnknownSegmentId,
)
from .raster import ClassDef, ClassMap, ClassSet, RasterImage, SegmentMap

FEATURE_DIM = 69
GOLDEN_ANGLE_DEG = 137.50776405003785


@dataclass(frozen=True)
class FeatureMatrix:
    """One feature row per segment; row order follows segment_ids."""

    segment_ids: tuple[int, ...]
    vectors: np.ndarray  # (n, d) float64

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=np.float64)
        object.__setattr__(self, "vectors", vec)
        if len(self.segment_ids) != len(set(self.segment_ids)):
            raise UnknownSegmentId("duplicate segment id in feature matrix")
        if vec.ndim != 2 or vec.shape[0] != len(self.segment_ids):
            raise DimensionMismatch("vector row count must match segment id count")
        if vec.shape[0] < 1:
            raise EmptyRegistry("feature matrix needs at least one row")
        if not np.isfinite(vec).all():
            raise NonFiniteFeature("feature vectors must be finite")


@dataclass(frozen=True)
class Dendrogram:
    """Full merge tree: leaves 0..n-1, internal nodes n..2n-2."""

    n_leaves: int
    merges: tuple[tuple[int, int, float, int], ...]

    def __post_init__(self):
        n = self.n_leaves
        assert len(self.merges) == max(0, n - 1)
        used: set[int] = set()
        prev = 0.0
        for step, (left, right, height, new) in enumerate(self.merges):
            assert left not in used and right not in used and left != right
            assert new == n + step
            assert height >= prev
            used.update((left, right))
            prev = height


def extract_features(image: RasterImage, segmap: SegmentMap) -> FeatureMatrix:
    """Built-in 69-dim descriptor per registered segment.

    Layout: mean RGB scaled to 0-1 (3), L1-normalized 4x4x4 RGB histogram
    (64), log-scaled size (1), isoperimetric compactness (1).  Rows are
    ordered by ascending segment id.
    """
    if not segmap.registry:
        raise EmptyRegistry("no segments to featurize")
    ids = segmap.ids
    rgb = image.pixels
    if rgb.shape[:2] != ids.shape:
        raise DimensionMismatch("image and segment raster differ in size")

    sids = sorted(segmap.registry)
    index = np.zeros(max(sids) + 1, dtype=np.int64)
    for row, sid in enumerate(sids):
        index[sid] = row
    flat_ids = ids.ravel()
    mask = flat_ids > 0
    rows = index[flat_ids[mask]]
    n = len(sids)

    counts = np.array([segmap.registry[s].pixel_count for s in sids], dtype=np.float64)
    flat_rgb = rgb.reshape(-1, 3)[mask].astype(np.float64)
    means = np.zeros((n, 3))
    for ch in range(3):
        means[:, ch] = np.bincount(rows, weights=flat_rgb[:, ch], minlength=n)
    means /= counts[:, None] * 255.0

    q = (rgb.reshape(-1, 3)[mask] // 64).astype(np.int64)
    bins = q[:, 0] * 16 + q[:, 1] * 4 + q[:, 2]
    hist = np.bincount(rows * 64 + bins, minlength=n * 64).reshape(n, 64).astype(np.float64)
    hist /= counts[:, None]

    perim = np.zeros(n, dtype=np.float64)
    padded = np.pad(ids, 1, constant_values=-1)
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        neigh = padded[1 + dr : 1 + dr + ids.shape[0], 1 + dc : 1 + dc + ids.shape[1]]
        edge = (ids > 0) & (neigh != ids)
        perim += np.bincount(index[ids[edge]], minlength=n)

    total = ids.size
    size_term = (
        np.zeros(n) if total == 1 else np.log10(counts) / math.log10(total)
    )
    compact = np.minimum(1.0, 4.0 * math.pi * counts / perim**2)

    vectors = np.concatenate(
        [means, hist, size_term[:, None], compact[:, None]], axis=1
    )
    return FeatureMatrix(tuple(sids), vectors)


def ingest_external_features(
    segmap: SegmentMap, segment_ids: list[int], vectors: np.ndarray
) -> FeatureMatrix:
    """Adopt externally computed embeddings (one row per listed segment)."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] != len(segment_ids):
        raise DimensionMismatch("row count must match segment id count")
    for sid in segment_ids:
        if sid not in segmap.registry:
            raise UnknownSegmentId(f"segment {sid} is not registered")
    if not np.isfinite(vectors).all():
        raise NonFiniteFeature("feature vectors must be finite")
    return FeatureMatrix(tuple(int(s) for s in segment_ids), vectors)


def cluster(
    features: FeatureMatrix,
    k: int | None = None,
    t: float | None = None,
    standardize: bool = False,
) -> tuple[Dendrogram, dict[int, int]]:
    """Average-linkage agglomeration with a cluster-count or height cut.

    Exactly one of ``k`` (target cluster count) and ``t`` (height
    threshold: merges with height <= t are applied) must be given.  Returns
    the full dendrogram and {segment id -> cluster index}, cluster indices
    ordered by each cluster's smallest segment id.
    """
    n = len(features.segment_ids)
    if (k is None) == (t is None):
        raise InvalidStop("provide exactly one of k or t")
    if k is not None and not 1 <= k <= n:
        raise InvalidStop(f"k must be in 1..{n}")
    if t is not None and t < 0:
        raise InvalidStop("t must be non-negative")

    X = features.vectors
    if standardize:
        std = X.std(axis=0)
        std[std == 0] = 1.0
        X = (X - X.mean(axis=0)) / std

    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)

    alive = np.ones(n, dtype=bool)
    size = np.ones(n, dtype=np.int64)
    min_leaf = np.arange(n, dtype=np.int64)
    node_id = np.arange(n, dtype=np.int64)

    merges: list[tuple[int, int, float, int]] = []
    prev_height = 0.0
    for step in range(n - 1):
        masked = np.where(np.outer(alive, alive), dist, np.inf)
        hmin = masked.min()
        cand_i, cand_j = np.nonzero(masked == hmin)
        best = None
        for i, j in zip(cand_i.tolist(), cand_j.tolist()):
            if i >= j:
                continue
            lo, hi = sorted((int(min_leaf[i]), int(min_leaf[j])))
            key = (lo, hi)
            if best is None or key < best[0]:
                best = (key, i, j)
        _, i, j = best

        left, right = (i, j) if min_leaf[i] <= min_leaf[j] else (j, i)
        # guard against last-ulp regressions in the running-mean update
        height = max(float(hmin), prev_height)
        prev_height = height
        merges.append((int(node_id[left]), int(node_id[right]), height, n + step))

        si, sj = size[i], size[j]
        new_row = (si * dist[i] + sj * dist[j]) / (si + sj)
        dist[i, :] = new_row
        dist[:, i] = new_row
        dist[i, i] = np.inf
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        alive[j] = False
        size[i] = si + sj
        min_leaf[i] = min(min_leaf[i], min_leaf[j])
        node_id[i] = n + step

    dendro = Dendrogram(n, tuple(merges))

    n_used = (n - k) if k is not None else int(
        np.searchsorted([m[2] for m in merges], t, side="right")
    )
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for left, right, _, new in merges[:n_used]:
        parent[find(left)] = new
        parent[find(right)] = new

    groups: dict[int, list[int]] = {}
    for leaf in range(n):
        groups.setdefault(find(leaf), []).append(leaf)
    ordered = sorted(
        groups.values(), key=lambda leaves: min(features.segment_ids[v] for v in leaves)
    )
    assignment: dict[int, int] = {}
    for idx, leaves in enumerate(ordered):
        for leaf in leaves:
            assignment[features.segment_ids[leaf]] = idx
    return dendro, assignment


def _auto_color(index: int) -> tuple[int, int, int, int]:
    hue = (index * GOLDEN_ANGLE_DEG) % 360.0
    r, g, b = colorsys.hsv_to_rgb(hue / 360.0, 1.0, 1.0)
    return (round(r * 255), round(g * 255), round(b * 255), 255)


def assign_classes(
    assignment: dict[int, int],
    features: FeatureMatrix,
    class_set: ClassSet,
    seeds: dict[int, int] | None = None,
    propagate: bool = False,
) -> tuple[ClassMap, ClassSet]:
    """Turn a cluster assignment into a class map, optionally seed-guided.

    Unseeded clusters become fresh auto classes; a cluster containing seeds
    takes the majority seed class (ties to the smallest class id); with
    ``propagate``, seedless clusters take the class of the nearest seeded
    cluster centroid in feature space.
    """
    seeds = seeds or {}
    for sid, cid in seeds.items():
        if sid not in assignment:
            raise UnknownSegmentId(f"seed segment {sid} is not registered")
        if cid not in class_set.ids():
            raise UnknownClass(f"seed class {cid} does not exist")

    m = max(assignment.values()) + 1 if assignment else 0
    members: list[list[int]] = [[] for _ in range(m)]
    for sid, idx in assignment.items():
        members[idx].append(sid)

    cluster_class: dict[int, int] = {}
    for idx in range(m):
        votes: dict[int, int] = {}
        for sid in members[idx]:
            if sid in seeds:
                votes[seeds[sid]] = votes.get(seeds[sid], 0) + 1
        if votes:
            cluster_class[idx] = min(
                votes, key=lambda c: (-votes[c], c)
            )

    seeded = sorted(cluster_class)
    seedless = [i for i in range(m) if i not in cluster_class]

    new_classes = list(class_set.classes)
    next_id = class_set.next_id()

    if seedless and seeded and propagate:
        row_of = {sid: r for r, sid in enumerate(features.segment_ids)}
        centroids = np.stack(
            [features.vectors[[row_of[s] for s in members[i]]].mean(axis=0) for i in range(m)]
        )
        for idx in seedless:
            best = None
            for src in seeded:
                d = float(np.linalg.norm(centroids[idx] - centroids[src]))
                key = (d, cluster_class[src])
                if best is None or key < best:
                    best = key
            cluster_class[idx] = best[1]
    else:
        for idx in seedless:
            cid = next_id
            next_id += 1
            new_classes.append(ClassDef(cid, f"cluster-{idx}", _auto_color(idx)))
            cluster_class[idx] = cid

    classmap: ClassMap = {sid: cluster_class[idx] for sid, idx in assignment.items()}
    return classmap, ClassSet(new_classes)


def default_classification(segmap: SegmentMap, class_set: ClassSet) -> ClassMap:
    """Every registered segment gets the reserved default (white) class."""
    class_set.get(1)
    return {sid: 1 for sid in segmap.registry}


def set_class(
    classmap: ClassMap, segmap: SegmentMap, class_set: ClassSet, segment_id: int, class_id: int
) -> ClassMap:
    """Reassign one segment's class; returns an updated copy."""
    if segment_id not in segmap.registry:
        raise UnknownSegmentId(f"segment {segment_id} is not registered")
    if class_id not in class_set.ids():
        raise UnknownClass(f"class {class_id} does not exist")
    out = dict(classmap)
    out[segment_id] = class_id
    return out
