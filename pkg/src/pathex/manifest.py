"""The canonical 247-feature schema.

Feature order is frozen under the version tag ``pathex-247/v1``: 30 size &
shape, 104 texture (13 co-occurrence statistics x 4 angles x 2 scales), 17
intensity, and 96 intensity-distribution features (36 radial-bin statistics
plus 30 Zernike magnitudes and 30 phases, degree <= 9). Any change to the
composition or order is a new version string.
"""

from __future__ import annotations

from dataclasses import dataclass

MANIFEST_VERSION = "pathex-247/v1"

FAMILY_SIZESHAPE = "SizeShape"
FAMILY_TEXTURE = "Texture"
FAMILY_INTENSITY = "Intensity"
FAMILY_DISTRIBUTION = "Distribution"

SHAPE_NAMES = (
    "Area", "Perimeter", "ConvexArea", "Solidity", "Extent",
    "Eccentricity", "Orientation", "MajorAxisLength", "MinorAxisLength",
    "FormFactor", "Compactness", "MaxFeretDiameter", "MinFeretDiameter",
    "EulerNumber", "BBoxMinX", "BBoxMinY", "BBoxMaxX", "BBoxMaxY",
    "CenterX", "CenterY", "MeanRadius", "MedianRadius", "MaxRadius",
    "Hu1", "Hu2", "Hu3", "Hu4", "Hu5", "Hu6", "Hu7",
)

HARALICK_NAMES = (
    "AngularSecondMoment", "Contrast", "Correlation", "SumOfSquaresVariance",
    "InverseDifferenceMoment", "SumAverage", "SumVariance", "SumEntropy",
    "Entropy", "DifferenceVariance", "DifferenceEntropy",
    "InfoMeasureCorr1", "InfoMeasureCorr2",
)
TEXTURE_SCALES = (1, 3)
TEXTURE_ANGLES = (0, 45, 90, 135)

INTENSITY_NAMES = (
    "IntegratedIntensity", "MeanIntensity", "StdIntensity", "MinIntensity",
    "MaxIntensity", "MedianIntensity", "MADIntensity",
    "LowerQuartileIntensity", "UpperQuartileIntensity", "MassDisplacement",
    "IntegratedEdgeIntensity", "MeanEdgeIntensity", "StdEdgeIntensity",
    "MinEdgeIntensity", "MaxEdgeIntensity", "CMX", "CMY",
)

RADIAL_BINS = 12
RADIAL_WEDGES = 8
ZERNIKE_DEGREE = 9

# (n, m) pairs with n <= 9, m >= 0, n - m even; n-major, m-minor.
ZERNIKE_INDICES: tuple[tuple[int, int], ...] = tuple(
    (n, m) for n in range(ZERNIKE_DEGREE + 1) for m in range(n % 2, n + 1, 2)
)


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    family: str
    description: str


@dataclass(frozen=True)
class FeatureManifest:
    """Ordered, versioned list of the 247 feature columns."""

    version: str
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(names) != len(set(names)):
            raise ValueError("duplicate feature names in manifest")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.entries:
            counts[e.family] = counts.get(e.family, 0) + 1
        return counts


def _shape_entries() -> list[ManifestEntry]:
    desc = {
        "Area": "set-pixel count of the object mask",
        "Perimeter": "8-connected boundary trace length through pixel centers",
        "ConvexArea": "area of the convex hull of set-pixel centers",
        "Solidity": "Area / ConvexArea (1 for degenerate hulls)",
        "Extent": "Area / bounding-box area",
        "Eccentricity": "eccentricity of the second-moment best-fit ellipse",
        "Orientation": "major-axis angle in degrees, (-90, 90] from the x-axis",
        "MajorAxisLength": "major axis of the second-moment ellipse",
        "MinorAxisLength": "minor axis of the second-moment ellipse",
        "FormFactor": "4*pi*Area / Perimeter^2",
        "Compactness": "Perimeter^2 / (4*pi*Area)",
        "MaxFeretDiameter": "largest caliper diameter over the convex hull",
        "MinFeretDiameter": "smallest caliper width over hull edge directions",
        "EulerNumber": "connected components minus holes",
        "BBoxMinX": "bounding-box left edge (inclusive)",
        "BBoxMinY": "bounding-box top edge (inclusive)",
        "BBoxMaxX": "bounding-box right edge (exclusive)",
        "BBoxMaxY": "bounding-box bottom edge (exclusive)",
        "CenterX": "binary centroid x in slide coordinates",
        "CenterY": "binary centroid y in slide coordinates",
        "MeanRadius": "mean in-mask Euclidean distance to the exterior",
        "MedianRadius": "median in-mask Euclidean distance to the exterior",
        "MaxRadius": "largest in-mask Euclidean distance to the exterior",
    }
    entries = []
    for name in SHAPE_NAMES:
        if name.startswith("Hu"):
            text = f"Hu invariant moment phi{name[2:]}"
        else:
            text = desc[name]
        entries.append(ManifestEntry(f"{FAMILY_SIZESHAPE}_{name}", FAMILY_SIZESHAPE, text))
    return entries


def _texture_entries() -> list[ManifestEntry]:
    entries = []
    for scale in TEXTURE_SCALES:
        for angle in TEXTURE_ANGLES:
            for stat in HARALICK_NAMES:
                entries.append(
                    ManifestEntry(
                        f"{FAMILY_TEXTURE}_{stat}_s{scale}_a{angle}",
                        FAMILY_TEXTURE,
                        f"{stat} of the 8-level co-occurrence matrix, "
                        f"offset {scale} px at {angle} degrees",
                    )
                )
    return entries


def _intensity_entries() -> list[ManifestEntry]:
    desc = {
        "IntegratedIntensity": "sum of in-mask intensities",
        "MeanIntensity": "mean in-mask intensity",
        "StdIntensity": "population standard deviation of in-mask intensities",
        "MinIntensity": "minimum in-mask intensity",
        "MaxIntensity": "maximum in-mask intensity",
        "MedianIntensity": "median in-mask intensity",
        "MADIntensity": "median absolute deviation from the median",
        "LowerQuartileIntensity": "25th percentile (linear interpolation)",
        "UpperQuartileIntensity": "75th percentile (linear interpolation)",
        "MassDisplacement": "distance between binary and intensity-weighted centroids",
        "IntegratedEdgeIntensity": "sum of intensities on mask edge pixels",
        "MeanEdgeIntensity": "mean intensity on mask edge pixels",
        "StdEdgeIntensity": "population std of intensities on mask edge pixels",
        "MinEdgeIntensity": "minimum intensity on mask edge pixels",
        "MaxEdgeIntensity": "maximum intensity on mask edge pixels",
        "CMX": "intensity-weighted centroid x in slide coordinates",
        "CMY": "intensity-weighted centroid y in slide coordinates",
    }
    return [
        ManifestEntry(f"{FAMILY_INTENSITY}_{name}", FAMILY_INTENSITY, desc[name])
        for name in INTENSITY_NAMES
    ]


def _distribution_entries() -> list[ManifestEntry]:
    entries = []
    for b in range(RADIAL_BINS):
        entries.append(
            ManifestEntry(
                f"{FAMILY_DISTRIBUTION}_FracAtD_b{b}",
                FAMILY_DISTRIBUTION,
                f"fraction of total intensity in radial bin {b}",
            )
        )
    for b in range(RADIAL_BINS):
        entries.append(
            ManifestEntry(
                f"{FAMILY_DISTRIBUTION}_MeanFrac_b{b}",
                FAMILY_DISTRIBUTION,
                f"intensity fraction over pixel fraction in radial bin {b}",
            )
        )
    for b in range(RADIAL_BINS):
        entries.append(
            ManifestEntry(
                f"{FAMILY_DISTRIBUTION}_RadialCV_b{b}",
                FAMILY_DISTRIBUTION,
                f"coefficient of variation over {RADIAL_WEDGES} angular wedges, bin {b}",
            )
        )
    for n, m in ZERNIKE_INDICES:
        entries.append(
            ManifestEntry(
                f"{FAMILY_DISTRIBUTION}_ZernikeMag_n{n}_m{m}",
                FAMILY_DISTRIBUTION,
                f"Zernike moment magnitude, order ({n},{m})",
            )
        )
    for n, m in ZERNIKE_INDICES:
        entries.append(
            ManifestEntry(
                f"{FAMILY_DISTRIBUTION}_ZernikePhase_n{n}_m{m}",
                FAMILY_DISTRIBUTION,
                f"Zernike moment phase, order ({n},{m})",
            )
        )
    return entries


def build_manifest() -> FeatureManifest:
    """Construct the canonical manifest for MANIFEST_VERSION."""
    entries = (
        _shape_entries() + _texture_entries() + _intensity_entries() + _distribution_entries()
    )
    return FeatureManifest(version=MANIFEST_VERSION, entries=tuple(entries))


DEFAULT_MANIFEST = build_manifest()
FEATURE_NAMES = DEFAULT_MANIFEST.names
FEATURE_COUNT = len(DEFAULT_MANIFEST)
