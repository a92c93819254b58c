"""R-tree over object bounding boxes.

The tree is bulk-loaded once per slide with sort-tile-recursive packing
(the region set is fully known up front) and is immutable afterwards, so
any number of threads may query it concurrently. Query results are exact:
candidate envelopes prune the descent and leaf entries are filtered with
the real box test, then sorted by object id so output never depends on
tree layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IndexBuildError, JoinError
from .model import BoundingBox, RegionSet, bbox_intersects, bbox_union

DEFAULT_MAX_ENTRIES = 16
DEFAULT_MIN_ENTRIES = 6


@dataclass
class _Node:
    envelope: BoundingBox
    # Leaves carry (bbox, object_id) entries; internal nodes carry children.
    entries: list[tuple[BoundingBox, int]] | None
    children: list["_Node"] | None

    @property
    def is_leaf(self) -> bool:
        return self.entries is not None


def _envelope_of(boxes: list[BoundingBox]) -> BoundingBox:
    out = boxes[0]
    for box in boxes[1:]:
        out = bbox_union(out, box)
    return out


def _str_pack(items: list, box_of, max_entries: int) -> list[list]:
    """Sort-tile-recursive grouping of items into runs of <= max_entries."""
    n = len(items)
    leaf_count = math.ceil(n / max_entries)
    slices = math.ceil(math.sqrt(leaf_count))
    per_slice = slices * max_entries
    by_x = sorted(items, key=lambda it: (box_of(it).min_x + box_of(it).max_x,
                                         box_of(it).min_y + box_of(it).max_y))
    groups: list[list] = []
    for i in range(0, n, per_slice):
        chunk = sorted(by_x[i : i + per_slice],
                       key=lambda it: (box_of(it).min_y + box_of(it).max_y,
                                       box_of(it).min_x + box_of(it).max_x))
        for j in range(0, len(chunk), max_entries):
            groups.append(chunk[j : j + max_entries])
    return groups


class SpatialIndex:
    """Immutable R-tree mapping object ids to their slide-space boxes."""

    def __init__(self, root: _Node, boxes: dict[int, BoundingBox],
                 max_entries: int, min_entries: int):
        self._root = root
        self._boxes = boxes
        self.max_entries = max_entries
        self.min_entries = min_entries

    def __len__(self) -> int:
        return len(self._boxes)

    def __contains__(self, object_id: int) -> bool:
        return object_id in self._boxes

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._boxes))

    def bbox_of(self, object_id: int) -> BoundingBox:
        return self._boxes[object_id]

    @property
    def height(self) -> int:
        node, h = self._root, 1
        while not node.is_leaf:
            node = node.children[0]
            h += 1
        return h

    @property
    def node_count(self) -> int:
        count = 0
        stack = [self._root]
        while stack:
            node = stack.pop()
            count += 1
            if not node.is_leaf:
                stack.extend(node.children)
        return count

    def query_window(self, window: BoundingBox) -> list[int]:
        """Ids of all objects whose bbox intersects the window, ascending."""
        hits: list[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if not bbox_intersects(node.envelope, window):
                continue
            if node.is_leaf:
                hits.extend(oid for box, oid in node.entries if bbox_intersects(box, window))
            else:
                stack.extend(node.children)
        hits.sort()
        return hits

    def query_point(self, x: int, y: int) -> list[int]:
        """Ids of objects covering the pixel (x, y)."""
        return self.query_window(BoundingBox(x, y, x + 1, y + 1))

    def audit(self):
        """Verify envelope containment and entry count; raise on violation."""
        seen: list[int] = []

        def walk(node: _Node):
            if node.is_leaf:
                for box, oid in node.entries:
                    if not node.envelope.contains_box(box):
                        raise AssertionError(f"leaf envelope misses entry {oid}")
                    seen.append(oid)
                if len(node.entries) > self.max_entries:
                    raise AssertionError("leaf overflows fanout")
            else:
                if len(node.children) > self.max_entries:
                    raise AssertionError("node overflows fanout")
                for child in node.children:
                    if not node.envelope.contains_box(child.envelope):
                        raise AssertionError("child envelope escapes parent")
                    walk(child)

        walk(self._root)
        if sorted(seen) != sorted(self._boxes):
            raise AssertionError("leaf entries do not match indexed ids")


def build_index(regions: RegionSet, max_entries: int = DEFAULT_MAX_ENTRIES,
                min_entries: int = DEFAULT_MIN_ENTRIES) -> SpatialIndex:
    """Bulk-load an R-tree from a region set (STR packing)."""
    if len(regions) == 0:
        raise IndexBuildError("cannot index an empty region set")
    if max_entries < 2 or not (1 <= min_entries <= max_entries // 2):
        raise ValueError(f"bad fanout ({max_entries}/{min_entries})")

    entries = [(obj.bbox, obj.object_id) for obj in regions]
    leaves = [
        _Node(_envelope_of([box for box, _ in group]), group, None)
        for group in _str_pack(entries, lambda it: it[0], max_entries)
    ]
    level = leaves
    while len(level) > 1:
        level = [
            _Node(_envelope_of([n.envelope for n in group]), None, group)
            for group in _str_pack(level, lambda n: n.envelope, max_entries)
        ]
    return SpatialIndex(level[0], {oid: box for box, oid in entries},
                        max_entries, min_entries)


def write_back(index: SpatialIndex, table, annotations) -> dict:
    """Join extracted features back onto the source annotations.

    Returns a GeoJSON FeatureCollection whose features keep their original
    geometry coordinates and properties, with ``properties.pathomics``
    holding the feature mapping (or null for annotations that were skipped
    at ingestion). Non-finite values serialize as null.
    """
    rows = {}
    for row in table.rows:
        if row.object_id not in index:
            raise JoinError(f"feature row references unknown object {row.object_id}")
        rows[row.object_id] = row

    features = []
    for ann in annotations.features:
        pathomics = None
        if ann.object_id is not None and ann.object_id in rows:
            row = rows[ann.object_id]
            pathomics = {
                name: (float(v) if math.isfinite(v) else None)
                for name, v in zip(table.feature_names, row.values.tolist())
            }
        props = dict(ann.properties)
        props["pathomics"] = pathomics
        features.append(
            {
                "type": "Feature",
                "id": ann.annotation_id,
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [ann.outer_ring] + list(ann.holes),
                },
                "properties": props,
            }
        )
    return {"type": "FeatureCollection", "features": features}
