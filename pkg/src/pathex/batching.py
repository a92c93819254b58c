"""Memory-budgeted batch planning and slab encoding.

Objects are bucketed by max(bbox width, height) into power-of-two edges
{16..256}; anything larger, or whose single padded crop would not fit the
budget, is routed to the per-object overflow path. Each bucket splits into
slabs whose footprint — bucket_edge**2 x depth x 8 bytes x 2 planes
(patch + mask) — stays within the budget. Kernel scratch memory is
bounded per worker and deliberately not part of the footprint model.

The plan is a pure function of (regions, budget): slabs hold object ids in
ascending order, so downstream output never depends on scheduling.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, BudgetError, PlanCorrupt
from .model import RegionSet
from .slide import SlideSource

BUCKET_EDGES = (16, 32, 64, 128, 256)
BYTES_PER_PIXEL = 8  # float64 feature math
PLANES = 2  # patch + mask
MIN_BUDGET_BYTES = 1 << 20
DEFAULT_BUDGET_BYTES = 1 << 30

ENV_BUDGET = "PATHEX_MEMORY_BUDGET"

_SUFFIXES = {"": 1, "B": 1, "KIB": 1 << 10, "MIB": 1 << 20, "GIB": 1 << 30}


@dataclass(frozen=True)
class MemoryBudget:
    """Slab memory ceiling in bytes; budgets under 1 MiB are unusable."""

    bytes: int = DEFAULT_BUDGET_BYTES

    def __post_init__(self):
        if self.bytes < MIN_BUDGET_BYTES:
            raise BudgetError(
                f"memory budget {self.bytes} B is below the 1 MiB floor"
            )


def parse_budget(text: str) -> MemoryBudget:
    """Parse '1073741824', '64MiB', '1 GiB' and friends."""
    match = re.fullmatch(r"\s*(\d+)\s*([KMG]iB|B)?\s*", str(text), re.IGNORECASE)
    if not match:
        raise BudgetError(f"cannot parse memory budget {text!r}")
    value = int(match.group(1)) * _SUFFIXES[(match.group(2) or "").upper()]
    return MemoryBudget(value)


def budget_from_env(flag_value: str | None = None) -> MemoryBudget:
    """Resolve the budget: CLI flag wins, then the env var, then 1 GiB."""
    if flag_value is not None:
        return parse_budget(flag_value)
    env = os.environ.get(ENV_BUDGET)
    if env is not None:
        return parse_budget(env)
    return MemoryBudget()


@dataclass(frozen=True)
class SlabPlanEntry:
    bucket_edge: int
    object_ids: tuple[int, ...]

    @property
    def footprint_bytes(self) -> int:
        return self.bucket_edge ** 2 * len(self.object_ids) * BYTES_PER_PIXEL * PLANES


@dataclass(frozen=True)
class BatchPlan:
    slabs: tuple[SlabPlanEntry, ...]
    overflow: tuple[int, ...]
    budget: MemoryBudget

    @property
    def slab_object_ids(self) -> tuple[int, ...]:
        return tuple(oid for slab in self.slabs for oid in slab.object_ids)


def bucket_for(width: int, height: int) -> int | None:
    """Smallest bucket edge holding the box, or None when it exceeds 256."""
    edge = max(width, height)
    for bucket in BUCKET_EDGES:
        if edge <= bucket:
            return bucket
    return None


def plan_batches(regions: RegionSet, budget: MemoryBudget | None = None) -> BatchPlan:
    """Group objects into budget-respecting slabs plus the overflow list."""
    budget = budget or MemoryBudget()
    per_bucket: dict[int, list[int]] = {edge: [] for edge in BUCKET_EDGES}
    overflow: list[int] = []
    for obj in regions:
        bucket = bucket_for(obj.bbox.width, obj.bbox.height)
        if bucket is None or bucket ** 2 * BYTES_PER_PIXEL * PLANES > budget.bytes:
            overflow.append(obj.object_id)
        else:
            per_bucket[bucket].append(obj.object_id)

    slabs: list[SlabPlanEntry] = []
    for edge in BUCKET_EDGES:
        ids = per_bucket[edge]
        if not ids:
            continue
        depth_cap = budget.bytes // (edge ** 2 * BYTES_PER_PIXEL * PLANES)
        for i in range(0, len(ids), depth_cap):
            slabs.append(SlabPlanEntry(edge, tuple(ids[i : i + depth_cap])))
    return BatchPlan(tuple(slabs), tuple(overflow), budget)


@dataclass(frozen=True)
class Slab:
    """A padded stack of same-bucket object crops plus their masks.

    Slot k holds object ``object_ids[k]`` anchored top-left; everything
    outside its bbox copy is zero. Kernels must treat out-of-mask pixels
    as nonexistent.
    """

    bucket_edge: int
    object_ids: tuple[int, ...]
    patches: np.ndarray  # (depth, edge, edge) float64
    masks: np.ndarray    # (depth, edge, edge) bool
    offsets: np.ndarray  # (depth, 2) int64: bbox (min_x, min_y)
    bbox_sizes: np.ndarray  # (depth, 2) int64: (width, height)

    @property
    def depth(self) -> int:
        return len(self.object_ids)


def encode_slab(entry: SlabPlanEntry, regions: RegionSet, slide: SlideSource) -> Slab:
    """Materialize one plan entry by reading its objects' windows."""
    if not entry.object_ids:
        raise PlanCorrupt("slab plan entry has no objects")
    edge = entry.bucket_edge
    depth = len(entry.object_ids)
    patches = np.zeros((depth, edge, edge), dtype=np.float64)
    masks = np.zeros((depth, edge, edge), dtype=bool)
    offsets = np.zeros((depth, 2), dtype=np.int64)
    sizes = np.zeros((depth, 2), dtype=np.int64)
    for k, oid in enumerate(entry.object_ids):
        try:
            obj = regions.get(oid)
        except KeyError:
            raise PlanCorrupt(f"plan references unknown object {oid}") from None
        h, w = obj.mask.height, obj.mask.width
        if h > edge or w > edge:
            raise PlanCorrupt(
                f"object {oid} ({w}x{h}) does not fit bucket {edge}"
            )
        try:
            window = slide.read_window(obj.bbox)
        except BoundsError as exc:
            raise BoundsError(f"object {oid}: {exc}") from None
        patches[k, :h, :w] = window
        masks[k, :h, :w] = obj.mask.bits
        offsets[k] = (obj.bbox.min_x, obj.bbox.min_y)
        sizes[k] = (w, h)
    return Slab(edge, entry.object_ids, patches, masks, offsets, sizes)
