"""Half-court geometry: the 1 ft lattice, point values and region partitions.

Internal coordinates are feet with the origin at the baseline-left corner,
x running sideline to sideline (0..50) and y running from the baseline
toward half court (0..47).  The hoop centre sits at (25.0, 5.25).

Cells are indexed row-major: ``k = row * WIDTH + col`` where ``row`` is the
depth index and ``col`` the width index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

WIDTH = 50
DEPTH = 47
N_CELLS = WIDTH * DEPTH
HOOP = (25.0, 5.25)

THREE_RADIUS = 23.75
CORNER_OFFSET = 22.0
CORNER_DEPTH = 14.0
RESTRICTED_RADIUS = 4.0
PAINT_HALF_WIDTH = 8.0
FREE_THROW_DEPTH = 19.0
ABOVE_BREAK_SPLIT_DEG = 30.0
HEAVE_RADIUS = 30.0

OUT_OF_BOUNDS = -1


@dataclass(frozen=True)
class CourtGrid:
    width_cells: int = WIDTH
    depth_cells: int = DEPTH
    cell_size: float = 1.0
    hoop_position: tuple[float, float] = HOOP

    def __post_init__(self):
        hx, hy = self.hoop_position
        if not (0 <= hx < self.width_cells * self.cell_size
                and 0 <= hy < self.depth_cells * self.cell_size):
            raise ValueError("hoop must lie inside the grid")

    @property
    def n_cells(self) -> int:
        return self.width_cells * self.depth_cells

    @property
    def shape(self) -> tuple[int, int]:
        """(depth, width), the row-major array shape of a surface."""
        return self.depth_cells, self.width_cells

    def cell_of(self, x: float, y: float) -> int:
        """Index of the cell containing ``(x, y)`` or ``OUT_OF_BOUNDS``."""
        if not (np.isfinite(x) and np.isfinite(y)):
            return OUT_OF_BOUNDS
        col = int(np.floor(x / self.cell_size))
        row = int(np.floor(y / self.cell_size))
        if 0 <= col < self.width_cells and 0 <= row < self.depth_cells:
            return row * self.width_cells + col
        return OUT_OF_BOUNDS

    def cells_of(self, x, y) -> np.ndarray:
        """Vectorised :meth:`cell_of`."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(invalid="ignore"):
            col = np.floor(x / self.cell_size)
            row = np.floor(y / self.cell_size)
            ok = ((col >= 0) & (col < self.width_cells)
                  & (row >= 0) & (row < self.depth_cells))
        out = np.full(x.shape, OUT_OF_BOUNDS, dtype=np.int64)
        out[ok] = (row[ok] * self.width_cells + col[ok]).astype(np.int64)
        return out

    def col_row(self, k: int) -> tuple[int, int]:
        self._check(k)
        return k % self.width_cells, k // self.width_cells

    def centroid(self, k: int) -> tuple[float, float]:
        col, row = self.col_row(k)
        return (col + 0.5) * self.cell_size, (row + 0.5) * self.cell_size

    def centroids(self) -> np.ndarray:
        """(n_cells, 2) array of cell centroids in index order."""
        k = np.arange(self.n_cells)
        col = k % self.width_cells
        row = k // self.width_cells
        return np.column_stack([(col + 0.5) * self.cell_size,
                                (row + 0.5) * self.cell_size])

    def hoop_distance(self) -> np.ndarray:
        c = self.centroids()
        return np.hypot(c[:, 0] - self.hoop_position[0],
                        c[:, 1] - self.hoop_position[1])

    def _check(self, k):
        if not (isinstance(k, (int, np.integer)) and 0 <= k < self.n_cells):
            raise IndexError(f"invalid cell index {k!r}")


GRID = CourtGrid()


def from_source_coords(loc_x_tenths, loc_y_tenths):
    """Convert shot-chart coordinates (tenths of feet, hoop origin) to feet."""
    x = HOOP[0] + np.asarray(loc_x_tenths, dtype=float) / 10.0
    y = HOOP[1] + np.asarray(loc_y_tenths, dtype=float) / 10.0
    return x, y


def is_three(x, y):
    """Geometric 3-point rule evaluated at points in feet."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.hypot(x - HOOP[0], y - HOOP[1])
    corner = (np.abs(x - HOOP[0]) >= CORNER_OFFSET) & (y <= CORNER_DEPTH)
    return (d >= THREE_RADIUS) | corner


@lru_cache(maxsize=None)
def _value_table(grid: CourtGrid) -> np.ndarray:
    c = grid.centroids()
    v = np.where(is_three(c[:, 0], c[:, 1]), 3, 2).astype(np.int64)
    v.setflags(write=False)
    return v


def point_values(grid: CourtGrid = GRID) -> np.ndarray:
    """Read-only M-vector of point values (2 or 3)."""
    return _value_table(grid)


def point_value(k: int, grid: CourtGrid = GRID) -> int:
    grid._check(k)
    return int(_value_table(grid)[k])


@dataclass(frozen=True)
class RegionPartition:
    """Total map from cell index to region id.

    ``residual`` is the region that receives out-of-grid shots;
    ``three_point`` lists the regions whose cells are all worth 3.
    """

    name: str
    regions: tuple[str, ...]
    region_of_cell: np.ndarray = field(repr=False)
    residual: str
    three_point: frozenset[str] = frozenset()

    def __post_init__(self):
        r = np.asarray(self.region_of_cell)
        if r.ndim != 1 or r.min() < 0 or r.max() >= len(self.regions):
            raise ValueError("region_of_cell must map every cell to a region")
        r = r.astype(np.int64)
        r.setflags(write=False)
        object.__setattr__(self, "region_of_cell", r)
        if self.residual not in self.regions:
            raise ValueError("residual region must be one of the regions")

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def region_index(self, name: str) -> int:
        return self.regions.index(name)

    def classify(self, k: int) -> str:
        """Region label of cell ``k``; out-of-bounds maps to the residual."""
        if k == OUT_OF_BOUNDS:
            return self.residual
        return self.regions[self.region_of_cell[k]]

    def index_of_cells(self, cells) -> np.ndarray:
        """Region indices for an array of cell indices (OOB -> residual)."""
        cells = np.asarray(cells, dtype=np.int64)
        out = np.full(cells.shape, self.region_index(self.residual), dtype=np.int64)
        ok = cells != OUT_OF_BOUNDS
        out[ok] = self.region_of_cell[cells[ok]]
        return out

    def region_values(self) -> np.ndarray:
        """Point value per region (3 for three-point regions, else 2)."""
        return np.array([3 if r in self.three_point else 2 for r in self.regions])

    def to_json(self) -> str:
        return json.dumps({"name": self.name,
                           "regions": list(self.regions),
                           "cells": [self.regions[i] for i in self.region_of_cell]})

    @classmethod
    def from_json(cls, text: str, residual: str | None = None,
                  three_point=()) -> "RegionPartition":
        d = json.loads(text)
        regions = tuple(d.get("regions") or dict.fromkeys(d["cells"]))
        lookup = {r: i for i, r in enumerate(regions)}
        idx = np.array([lookup[c] for c in d["cells"]])
        return cls(d["name"], regions, idx, residual or regions[-1],
                   frozenset(three_point))


def classify_region(partition: RegionPartition, k: int) -> str:
    return partition.classify(k)


@lru_cache(maxsize=None)
def broad3(grid: CourtGrid = GRID) -> RegionPartition:
    """Restricted area / mid-range / three-point."""
    d = grid.hoop_distance()
    three = point_values(grid) == 3
    idx = np.where(three, 2, np.where(d < RESTRICTED_RADIUS, 0, 1))
    return RegionPartition("broad3", ("restricted-area", "mid-range", "three-point"),
                           idx, residual="three-point",
                           three_point=frozenset({"three-point"}))


EMPIRICAL12 = (
    "restricted-area", "paint",
    "mid-left-baseline", "mid-left-wing", "mid-right-wing", "mid-right-baseline",
    "corner3-left", "corner3-right",
    "above-break3-left", "above-break3-center", "above-break3-right",
    "heave",
)


@lru_cache(maxsize=None)
def empirical12(grid: CourtGrid = GRID) -> RegionPartition:
    """Twelve-region histogram partition.

    Mid-range splits at 8 ft either side of the hoop and 14 ft of depth;
    above-the-break threes split at +/-30 degrees from the centre line;
    cells 30 ft or more from the hoop form the ``heave`` region.
    """
    c = grid.centroids()
    dx = c[:, 0] - grid.hoop_position[0]
    y = c[:, 1]
    d = grid.hoop_distance()
    three = point_values(grid) == 3
    left = dx < 0
    lab = np.empty(grid.n_cells, dtype=object)

    ra = (d < RESTRICTED_RADIUS) & ~three
    paint = ~ra & ~three & (np.abs(dx) < PAINT_HALF_WIDTH) & (y < FREE_THROW_DEPTH)
    mid = ~three & ~ra & ~paint
    baseline = (np.abs(dx) >= PAINT_HALF_WIDTH) & (y <= CORNER_DEPTH)
    lab[ra] = "restricted-area"
    lab[paint] = "paint"
    lab[mid & baseline & left] = "mid-left-baseline"
    lab[mid & ~baseline & left] = "mid-left-wing"
    lab[mid & ~baseline & ~left] = "mid-right-wing"
    lab[mid & baseline & ~left] = "mid-right-baseline"

    corner = three & (np.abs(dx) >= CORNER_OFFSET) & (y <= CORNER_DEPTH)
    heave = three & ~corner & (d >= HEAVE_RADIUS)
    above = three & ~corner & ~heave
    angle = np.degrees(np.arctan2(dx, y - grid.hoop_position[1]))
    lab[corner & left] = "corner3-left"
    lab[corner & ~left] = "corner3-right"
    lab[above & (angle < -ABOVE_BREAK_SPLIT_DEG)] = "above-break3-left"
    lab[above & (np.abs(angle) <= ABOVE_BREAK_SPLIT_DEG)] = "above-break3-center"
    lab[above & (angle > ABOVE_BREAK_SPLIT_DEG)] = "above-break3-right"
    lab[heave] = "heave"

    lookup = {r: i for i, r in enumerate(EMPIRICAL12)}
    idx = np.array([lookup[s] for s in lab])
    threes = frozenset(r for r in EMPIRICAL12 if "3" in r or r == "heave")
    return RegionPartition("empirical12", EMPIRICAL12, idx, residual="heave",
                           three_point=threes)


PARTITIONS = {"broad3": broad3, "empirical12": empirical12}


def get_partition(name: str, grid: CourtGrid = GRID) -> RegionPartition:
    try:
        return PARTITIONS[name](grid)
    except KeyError:
        raise ValueError(f"unknown partition {name!r}; choose from {sorted(PARTITIONS)}")
