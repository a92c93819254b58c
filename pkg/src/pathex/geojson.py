"""GeoJSON annotation ingestion.

Accepts RFC 7946 FeatureCollections with Polygon or MultiPolygon
geometries in pixel coordinates (the QuPath export shape). MultiPolygon
features expand to one annotation per part with ``#<k>`` suffixed ids.
Class labels come from ``properties.classification.name``, falling back to
``properties.class`` and then ``"unlabeled"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyObject, InvalidRing, ParseError, UnsupportedGeometry
from .model import BoundingBox, ObjectMask, ObjectRecord, RegionSet
from .rings import rasterize_rings

Coord = tuple[float, float]


@dataclass(frozen=True)
class Annotation:
    """One polygonal annotation (a single outer ring plus holes)."""

    annotation_id: str
    class_label: str
    outer_ring: list[Coord]
    holes: list[list[Coord]]
    properties: dict = field(default_factory=dict)
    object_id: int | None = None


@dataclass(frozen=True)
class AnnotationSet:
    features: tuple[Annotation, ...]

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)


def _check_ring(ring, feature_id: str) -> list[Coord]:
    if not isinstance(ring, list) or len(ring) < 4:
        raise InvalidRing(f"feature {feature_id!r}: ring has fewer than 4 points")
    pts = [(float(p[0]), float(p[1])) for p in ring]
    if pts[0] != pts[-1]:
        raise InvalidRing(f"feature {feature_id!r}: ring is not closed")
    return pts


def _class_of(properties: dict) -> str:
    classification = properties.get("classification")
    if isinstance(classification, dict) and classification.get("name"):
        return str(classification["name"])
    if properties.get("class"):
        return str(properties["class"])
    return "unlabeled"


def parse_geojson(payload: bytes | str) -> AnnotationSet:
    """Parse a FeatureCollection into polygon annotations."""
    if isinstance(payload, bytes):
        try:
            payload = payload.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"payload is not UTF-8: {exc}") from None
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None

    if not isinstance(doc, dict):
        raise ParseError("top-level GeoJSON value must be an object")
    if doc.get("type") == "Feature":
        raw_features = [doc]
    elif doc.get("type") == "FeatureCollection":
        raw_features = doc.get("features", [])
        if not isinstance(raw_features, list):
            raise ParseError("FeatureCollection.features must be a list")
    else:
        raise ParseError(f"unsupported GeoJSON type {doc.get('type')!r}")

    annotations: list[Annotation] = []
    for i, feat in enumerate(raw_features):
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise ParseError(f"features[{i}] is not a Feature object")
        fid = str(feat.get("id", f"feature-{i}"))
        properties = feat.get("properties") or {}
        if not isinstance(properties, dict):
            properties = {}
        label = _class_of(properties)
        geometry = feat.get("geometry") or {}
        gtype = geometry.get("type")
        if gtype == "Polygon":
            parts = [(fid, geometry.get("coordinates", []))]
        elif gtype == "MultiPolygon":
            parts = [
                (f"{fid}#{k}", rings)
                for k, rings in enumerate(geometry.get("coordinates", []))
            ]
        else:
            raise UnsupportedGeometry(fid, str(gtype))
        for part_id, rings in parts:
            if not rings:
                raise InvalidRing(f"feature {part_id!r}: polygon has no rings")
            outer = _check_ring(rings[0], part_id)
            holes = [_check_ring(r, part_id) for r in rings[1:]]
            annotations.append(Annotation(part_id, label, outer, holes, properties))
    return AnnotationSet(tuple(annotations))


def rasterize_annotation(annotation: Annotation, slide_width: int,
                         slide_height: int) -> tuple[BoundingBox, ObjectMask]:
    """Fill one annotation at pixel centers by the even-odd rule.

    Returns the tight bounding box of the filled pixels and the local
    mask. Raises EmptyObject when nothing rasterizes (degenerate rings).
    """
    rings = [annotation.outer_ring] + list(annotation.holes)
    xs = [min(max(x, 0.0), float(slide_width)) for ring in rings for x, _ in ring]
    ys = [min(max(y, 0.0), float(slide_height)) for ring in rings for _, y in ring]
    x_lo = int(np.floor(min(xs)))
    y_lo = int(np.floor(min(ys)))
    x_hi = min(int(np.ceil(max(xs))), slide_width)
    y_hi = min(int(np.ceil(max(ys))), slide_height)
    if x_hi <= x_lo or y_hi <= y_lo:
        raise EmptyObject(annotation.annotation_id)

    local = [[(x - x_lo, y - y_lo) for x, y in ring] for ring in rings]
    grid = rasterize_rings(local, x_hi - x_lo, y_hi - y_lo)
    if not grid.any():
        raise EmptyObject(annotation.annotation_id)
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    r0, r1 = int(rows[0]), int(rows[-1]) + 1
    c0, c1 = int(cols[0]), int(cols[-1]) + 1
    bbox = BoundingBox(x_lo + c0, y_lo + r0, x_lo + c1, y_lo + r1)
    return bbox, ObjectMask(grid[r0:r1, c0:c1])


def ingest_geojson(payload: bytes | str, slide_width: int, slide_height: int,
                   diagnostics=None) -> tuple[RegionSet, AnnotationSet]:
    """Parse and rasterize annotations into a RegionSet.

    Object ids are assigned 1..K in annotation order; annotations that
    rasterize empty are skipped (id stays None) and reported through the
    ``diagnostics`` callback as a warning record.
    """
    parsed = parse_geojson(payload)
    records: list[ObjectRecord] = []
    linked: list[Annotation] = []
    next_id = 1
    for ann in parsed:
        try:
            bbox, mask = rasterize_annotation(ann, slide_width, slide_height)
        except EmptyObject:
            if diagnostics is not None:
                diagnostics({
                    "event": "annotation_skipped",
                    "annotation_id": ann.annotation_id,
                    "reason": "rasterized to zero pixels",
                })
            linked.append(ann)
            continue
        records.append(ObjectRecord(next_id, ann.class_label, bbox, mask))
        linked.append(replace(ann, object_id=next_id))
        next_id += 1
    regions = RegionSet(slide_width, slide_height, tuple(records), source_id="geojson")
    return regions, AnnotationSet(tuple(linked))
