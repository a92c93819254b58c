import json

import numpy as np
import pytest

from pathex.errors import EmptyObject, InvalidRing, ParseError, UnsupportedGeometry
from pathex.geojson import ingest_geojson, parse_geojson, rasterize_annotation
from pathex.model import mask_area


def feature(geometry, fid="f1", props=None):
    return {"type": "Feature", "id": fid, "geometry": geometry,
            "properties": props or {}}


def collection(*features):
    return json.dumps({"type": "FeatureCollection", "features": list(features)})


SQUARE = {"type": "Polygon",
          "coordinates": [[[0, 0], [4, 0], [4, 4], [0, 4], [0, 0]]]}


class TestParse:
    def test_single_square(self):
        anns = parse_geojson(collection(feature(SQUARE)))
        assert len(anns) == 1
        assert anns.features[0].holes == []

    def test_square_with_hole(self):
        geom = {"type": "Polygon", "coordinates": [
            [[0, 0], [4, 0], [4, 4], [0, 4], [0, 0]],
            [[1, 1], [3, 1], [3, 3], [1, 3], [1, 1]],
        ]}
        anns = parse_geojson(collection(feature(geom)))
        assert len(anns.features[0].holes) == 1

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            parse_geojson("{")

    def test_point_geometry_rejected_with_id(self):
        geom = {"type": "Point", "coordinates": [1, 2]}
        with pytest.raises(UnsupportedGeometry) as err:
            parse_geojson(collection(feature(geom, fid="pt-7")))
        assert "pt-7" in str(err.value)

    def test_unclosed_ring(self):
        geom = {"type": "Polygon",
                "coordinates": [[[0, 0], [4, 0], [4, 4], [0, 4]]]}
        with pytest.raises(InvalidRing):
            parse_geojson(collection(feature(geom)))

    def test_multipolygon_expands_with_suffixes(self):
        geom = {"type": "MultiPolygon", "coordinates": [
            [[[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]]],
            [[[5, 5], [8, 5], [8, 8], [5, 8], [5, 5]]],
        ]}
        anns = parse_geojson(collection(feature(geom, fid="multi")))
        assert [a.annotation_id for a in anns] == ["multi#0", "multi#1"]

    def test_class_label_fallbacks(self):
        a = feature(SQUARE, "a", {"classification": {"name": "artery"}})
        b = feature(SQUARE, "b", {"class": "vein"})
        c = feature(SQUARE, "c", {})
        anns = parse_geojson(collection(a, b, c))
        assert [x.class_label for x in anns] == ["artery", "vein", "unlabeled"]


class TestRasterize:
    def test_square_area(self):
        anns = parse_geojson(collection(feature(SQUARE)))
        bbox, mask = rasterize_annotation(anns.features[0], 16, 16)
        assert mask_area(mask) == 16
        assert (bbox.min_x, bbox.min_y, bbox.max_x, bbox.max_y) == (0, 0, 4, 4)

    def test_hole_area(self):
        geom = {"type": "Polygon", "coordinates": [
            [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]],
            [[3, 3], [7, 3], [7, 7], [3, 7], [3, 3]],
        ]}
        anns = parse_geojson(collection(feature(geom)))
        _, mask = rasterize_annotation(anns.features[0], 16, 16)
        assert mask_area(mask) == 84

    def test_degenerate_ring_is_empty_object(self):
        geom = {"type": "Polygon",
                "coordinates": [[[0, 0], [3, 3], [6, 6], [0, 0]]]}
        anns = parse_geojson(collection(feature(geom)))
        with pytest.raises(EmptyObject):
            rasterize_annotation(anns.features[0], 16, 16)

    def test_coordinates_clamped_to_slide(self):
        geom = {"type": "Polygon",
                "coordinates": [[[-3, -3], [5, -3], [5, 5], [-3, 5], [-3, -3]]]}
        anns = parse_geojson(collection(feature(geom)))
        bbox, mask = rasterize_annotation(anns.features[0], 16, 16)
        assert bbox.min_x == 0 and bbox.min_y == 0
        assert mask_area(mask) == 25


class TestIngest:
    def test_ids_assigned_in_order_skipping_empties(self):
        degenerate = feature(
            {"type": "Polygon", "coordinates": [[[0, 0], [2, 2], [4, 4], [0, 0]]]},
            fid="empty",
        )
        ok1 = feature(SQUARE, fid="one")
        ok2 = feature({"type": "Polygon",
                       "coordinates": [[[8, 8], [12, 8], [12, 12], [8, 12], [8, 8]]]},
                      fid="two")
        warnings = []
        regions, anns = ingest_geojson(
            collection(ok1, degenerate, ok2), 16, 16, warnings.append
        )
        assert regions.object_ids == (1, 2)
        assert [a.object_id for a in anns] == [1, None, 2]
        assert warnings and warnings[0]["annotation_id"] == "empty"
        assert warnings[0]["event"] == "annotation_skipped"
