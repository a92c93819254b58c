"""Exception types shared across the package."""


class PathexError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PathexError):
    """Input document could not be parsed."""


class UnsupportedGeometry(ParseError):
    """A GeoJSON feature carries a geometry type we do not rasterize."""

    def __init__(self, feature_id: str, geometry_type: str):
        self.feature_id = feature_id
        self.geometry_type = geometry_type
        super().__init__(f"feature {feature_id!r}: unsupported geometry {geometry_type!r}")


class InvalidRing(ParseError):
    """A polygon ring is not closed or has too few points."""


class EmptyObject(PathexError):
    """An annotation rasterized to zero pixels."""


class EmptyRegionSet(PathexError):
    """An operation that needs at least one object got none."""


class BoundsError(PathexError):
    """A requested window falls outside the slide."""


class ShapeError(PathexError):
    """Paired rasters have mismatched dimensions."""


class IndexBuildError(PathexError):
    """The spatial index cannot be built from the given input."""


class JoinError(PathexError):
    """A feature row references an object id unknown to the index."""


class BudgetError(PathexError):
    """The memory budget is below the usable floor."""


class PlanCorrupt(PathexError):
    """A batch plan entry is inconsistent with the region set."""


class PackingError(PathexError):
    """Synthetic objects cannot be placed without overlap."""
