"""
Occupancy regions on the integer grid and the geometric decision procedures.

Regions are sets of integer points with closed boundaries. The analytic
procedures (intersects, includes) must agree with the exhaustive grid oracle
``grid_points``, which is the normative semantics.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import FrozenSet, Iterable, NamedTuple, Set, Tuple

from models.invariant import (
    BigAnd, Invariant, OccupyBox, OccupyCircle, OccupyPoint, map_atoms,
)

logger = logging.getLogger(__name__)

OVER = "over"
UNDER = "under"
MODES = (OVER, UNDER)


class Region:
    """Base class for occupancy regions."""

    __slots__ = ()


@dataclass(frozen=True)
class Pt(Region):
    x: int
    y: int


@dataclass(frozen=True)
class Box(Region):
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"box corners are not sorted: {self}")

    @property
    def area(self) -> int:
        return (self.x2 - self.x1 + 1) * (self.y2 - self.y1 + 1)


@dataclass(frozen=True)
class Circle(Region):
    cx: int
    cy: int
    r: int

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"radius must be >= 0, got {self.r}")


@dataclass(frozen=True)
class Union(Region):
    members: Tuple[Region, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("a union needs at least one member")


class Cell(NamedTuple):
    """One grounded cell: grid cell indices at a tick. z is always 0 in the plane."""
    x: int
    y: int
    t: int
    z: int = 0


PointSet4D = Set[Cell]


# Lifting and bounding

def region_of(atom) -> Region:
    """Lift an occupancy atom into a Region (boxes are corner-sorted)."""
    if isinstance(atom, OccupyPoint):
        return Pt(atom.x, atom.y)
    if isinstance(atom, OccupyBox):
        return Box(min(atom.x1, atom.x2), min(atom.y1, atom.y2),
                   max(atom.x1, atom.x2), max(atom.y1, atom.y2))
    if isinstance(atom, OccupyCircle):
        return Circle(atom.cx, atom.cy, atom.radius)
    raise ValueError(f"not an occupancy atom: {atom!r}")


def bbox(r: Region) -> Box:
    if isinstance(r, Box):
        return r
    if isinstance(r, Pt):
        return Box(r.x, r.y, r.x, r.y)
    if isinstance(r, Circle):
        return Box(r.cx - r.r, r.cy - r.r, r.cx + r.r, r.cy + r.r)
    if isinstance(r, Union):
        return bounding_box(r.members)
    raise TypeError(f"not a region: {r!r}")


def bounding_box(regions: Iterable[Region]) -> Box:
    """Smallest box containing every region."""
    boxes = [bbox(r) for r in regions]
    if not boxes:
        raise ValueError("bounding box of no regions")
    return Box(min(b.x1 for b in boxes), min(b.y1 for b in boxes),
               max(b.x2 for b in boxes), max(b.y2 for b in boxes))


# Membership and the grid oracle

def contains_point(r: Region, x: int, y: int) -> bool:
    if isinstance(r, Pt):
        return r.x == x and r.y == y
    if isinstance(r, Box):
        return r.x1 <= x <= r.x2 and r.y1 <= y <= r.y2
    if isinstance(r, Circle):
        return (x - r.cx) ** 2 + (y - r.cy) ** 2 <= r.r * r.r
    if isinstance(r, Union):
        return any(contains_point(m, x, y) for m in r.members)
    raise TypeError(f"not a region: {r!r}")


def grid_points(r: Region) -> Set[Tuple[int, int]]:
    """Enumerate every integer point of ``r`` by scanning its bounding box."""
    box = bbox(r)
    return {
        (x, y)
        for x in range(box.x1, box.x2 + 1)
        for y in range(box.y1, box.y2 + 1)
        if contains_point(r, x, y)
    }


def _column(c: Circle, x: int):
    """Inclusive y-range of circle ``c`` on column ``x``, or None if the column misses it."""
    dx2 = (x - c.cx) ** 2
    if dx2 > c.r * c.r:
        return None
    h = isqrt(c.r * c.r - dx2)
    return c.cy - h, c.cy + h


# Intersection and inclusion

def intersects(a: Region, b: Region) -> bool:
    """True iff some integer point lies in both regions."""
    if isinstance(a, Union):
        return any(intersects(m, b) for m in a.members)
    if isinstance(b, Union):
        return any(intersects(a, m) for m in b.members)
    if isinstance(a, Pt):
        return contains_point(b, a.x, a.y)
    if isinstance(b, Pt):
        return contains_point(a, b.x, b.y)
    if isinstance(a, Box) and isinstance(b, Box):
        return a.x1 <= b.x2 and b.x1 <= a.x2 and a.y1 <= b.y2 and b.y1 <= a.y2
    if isinstance(a, Circle) and isinstance(b, Box):
        a, b = b, a
    if isinstance(a, Box) and isinstance(b, Circle):
        # the clamped center is the box's nearest point and is itself an integer point
        nx = min(max(b.cx, a.x1), a.x2)
        ny = min(max(b.cy, a.y1), a.y2)
        return (nx - b.cx) ** 2 + (ny - b.cy) ** 2 <= b.r * b.r
    if isinstance(a, Circle) and isinstance(b, Circle):
        reach = a.r + b.r
        if (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2 > reach * reach:
            return False
        for x in range(max(a.cx - a.r, b.cx - b.r), min(a.cx + a.r, b.cx + b.r) + 1):
            ya, yb = _column(a, x), _column(b, x)
            if ya and yb and ya[0] <= yb[1] and yb[0] <= ya[1]:
                return True
        return False
    raise TypeError(f"not a region pair: {a!r}, {b!r}")


def includes(outer: Region, inner: Region) -> bool:
    """True iff every integer point of ``inner`` lies in ``outer``."""
    if isinstance(inner, Union):
        return all(includes(outer, m) for m in inner.members)
    if isinstance(inner, Pt):
        return contains_point(outer, inner.x, inner.y)
    if isinstance(outer, Box) and isinstance(inner, Box):
        return (outer.x1 <= inner.x1 and inner.x2 <= outer.x2
                and outer.y1 <= inner.y1 and inner.y2 <= outer.y2)
    if isinstance(outer, Box) and isinstance(inner, Circle):
        return includes(outer, bbox(inner))
    if isinstance(outer, Circle) and isinstance(inner, Box):
        return all(contains_point(outer, x, y)
                   for x in (inner.x1, inner.x2) for y in (inner.y1, inner.y2))
    if isinstance(outer, Circle) and isinstance(inner, Circle):
        for x in range(inner.cx - inner.r, inner.cx + inner.r + 1):
            span, bound = _column(inner, x), _column(outer, x)
            if bound is None or span[0] < bound[0] or span[1] > bound[1]:
                return False
        return True
    return all(contains_point(outer, x, y) for x, y in grid_points(inner))


# Approximation

def overapprox(r: Region) -> Region:
    """A region containing ``r``: boxes and points are kept, everything else is bounded."""
    if isinstance(r, (Box, Pt)):
        return r
    return bbox(r)


def underapprox(r: Region) -> Region:
    """
    A region contained in ``r``.

    Circles shrink to their largest inscribed axis-aligned box, whose half side
    is floor(r / sqrt(2)). A union keeps only its best single member.
    """
    if isinstance(r, (Box, Pt)):
        return r
    if isinstance(r, Circle):
        s = isqrt(r.r * r.r // 2)
        return Box(r.cx - s, r.cy - s, r.cx + s, r.cy + s)
    if isinstance(r, Union):
        candidates = [underapprox(m) for m in r.members]
        return max(candidates, key=lambda c: bbox(c).area)
    raise TypeError(f"not a region: {r!r}")


# Discretization

def cell_box(i: int, j: int, resolution: int) -> Box:
    """The integer points covered by cell (i, j) at ``resolution``."""
    return Box(i * resolution, j * resolution,
               i * resolution + resolution - 1, j * resolution + resolution - 1)


@lru_cache(maxsize=8192)
def cover_cells(r: Region, resolution: int, mode: str) -> FrozenSet[Tuple[int, int]]:
    """
    Return the (i, j) cell indices that over- or under-approximate ``r``.

    ``over`` keeps every cell that intersects ``r``; ``under`` keeps only cells
    lying entirely inside it.
    """
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    box = bbox(r)
    i_range = range(box.x1 // resolution, box.x2 // resolution + 1)
    j_range = range(box.y1 // resolution, box.y2 // resolution + 1)
    if isinstance(r, Box):
        if mode == UNDER:
            i_range = range(-(-box.x1 // resolution), (box.x2 + 1) // resolution)
            j_range = range(-(-box.y1 // resolution), (box.y2 + 1) // resolution)
        return frozenset((i, j) for i in i_range for j in j_range)
    test = intersects if mode == OVER else includes
    return frozenset(
        (i, j) for i in i_range for j in j_range
        if test(r, cell_box(i, j, resolution))
    )


def discretize(r: Region, t: int, resolution: int, mode: str) -> PointSet4D:
    """Ground ``r`` at tick ``t`` into resolution-sized cells."""
    return {Cell(i, j, t) for i, j in cover_cells(r, resolution, mode)}


def covered_points(cells: Iterable[Tuple[int, int]], resolution: int) -> Set[Tuple[int, int]]:
    """Integer points covered by a set of (i, j) cells."""
    points = set()
    for i, j in cells:
        box = cell_box(i, j, resolution)
        points.update((x, y) for x in range(box.x1, box.x2 + 1) for y in range(box.y1, box.y2 + 1))
    return points


# Model restructuring

def breakdown_model(m: Invariant) -> Invariant:
    """Rewrite every occupancy atom of ``m`` into a BIGAND of the OccupyPoint atoms it covers."""

    def explode(atom):
        if isinstance(atom, (OccupyBox, OccupyCircle)):
            points = sorted(grid_points(region_of(atom)))
            return BigAnd(tuple(OccupyPoint(x, y) for x, y in points))
        return atom

    return map_atoms(m, explode)
