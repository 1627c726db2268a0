"""Hexagonal placement of UAV coverage disks inside rectangular subregions.

A visual companion to the disk-count ratio: centers are laid on a hexagonal
lattice of pitch twice the optimal radius and clipped to the subregion
rectangle. A hexagonal cell covers 2*sqrt(3)*r^2 of ground versus pi*r^2
for the ideal disk ratio, so lattice counts land near pi/(2*sqrt(3)), about
91%, of the disk-model count, boundary effects aside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle: origin corner plus extents, meters."""

    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self):
        if self.width < 0.0 or self.height < 0.0:
            raise ValueError("rectangle extents must be >= 0")

    @property
    def area(self) -> float:
        return self.width * self.height


def hex_disk_centers(rect: Rect, r_b: float) -> list[tuple[float, float]]:
    """Centers of coverage disks of radius r_b on a hex lattice inside rect.

    Rows are spaced sqrt(3)*r_b apart with alternate rows shifted half a
    pitch; the lattice phase starts one radius in from the origin corner and
    centers are kept while they lie inside the rectangle. A degenerate
    rectangle yields no centers.
    """
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    pitch = 2.0 * r_b
    row_step = pitch * math.sqrt(3.0) / 2.0
    centers: list[tuple[float, float]] = []
    row = 0
    y = rect.y0 + r_b
    while y <= rect.y0 + rect.height + 1e-12:
        x = rect.x0 + r_b + (pitch / 2.0 if row % 2 else 0.0)
        while x <= rect.x0 + rect.width + 1e-12:
            centers.append((x, y))
            x += pitch
        row += 1
        y = rect.y0 + r_b + row * row_step
    return centers
