"""
Grounding of models into spatio-temporal cells and the query decision procedures.

Collision and coverage are decided per constant time segment: each timed fact
grounds once into a slab (its cell set plus its tick range), and the cell sets
only change at slab boundaries, so evaluating one tick per segment gives the
same verdict and witness as walking every tick.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from models.errors import PointOutOfBounds, UnknownOwner
from models.geometry import OVER, UNDER, Cell, PointSet4D, Region, cover_cells, region_of
from models.invariant import (
    OCCUPANCY_ATOMS, BigAnd, Invariant, TimePoint, TimeStamp, filter_by_owner,
    list_owners, map_atoms, normalize,
)
from models.temporal import flatten

logger = logging.getLogger(__name__)

# above this many ground atoms an export is logged as large
LARGE_EXPORT_ATOMS = 5_000_000


# Queries and verdicts

def _check_grounding(horizon: int, resolution: int):
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")


@dataclass(frozen=True)
class CollisionAbsence:
    owner_a: str
    owner_b: str
    horizon: int
    resolution: int = 1

    def __post_init__(self):
        _check_grounding(self.horizon, self.resolution)


@dataclass(frozen=True)
class Coverage:
    sensor_owners: Tuple[str, ...]
    target: Region
    horizon: int
    resolution: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sensor_owners", tuple(self.sensor_owners))
        _check_grounding(self.horizon, self.resolution)


@dataclass(frozen=True)
class NearbyDevices:
    owner: str
    t: int
    radius: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"tick must be >= 0, got {self.t}")
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")


Query = Union[CollisionAbsence, Coverage, NearbyDevices]


@dataclass(frozen=True)
class Witness:
    """A violating tick and cell; x and y are cell indices at the query resolution."""
    t: int
    x: int
    y: int
    detail: str = ""


@dataclass(frozen=True)
class Stats:
    ground_atoms: int = 0
    ticks_checked: int = 0


@dataclass(frozen=True)
class Verdict:
    query: Query
    holds: bool
    witness: Optional[Witness] = None
    stats: Stats = field(default_factory=Stats)
    related: Tuple[str, ...] = ()


class GroundAtom(NamedTuple):
    owner: str
    x: int
    y: int
    z: int
    t: int


class Slab(NamedTuple):
    first: int
    last: int
    cells: FrozenSet[Tuple[int, int]]


# Grounding

def resolve_trigger(m: Invariant, event: str, trigger_tick: int) -> Invariant:
    """Rewrite every TimeStamp guard relative to ``event`` into TimePoint(trigger_tick + offset)."""

    def bind(atom):
        if isinstance(atom, TimeStamp) and atom.ert.event == event:
            return TimePoint(trigger_tick + atom.ert.offset)
        return atom

    return map_atoms(m, bind)


def resolve_triggers(m: Invariant, triggers: Dict[str, int]) -> Invariant:
    for event, tick in sorted(triggers.items()):
        m = resolve_trigger(m, event, tick)
    return m


def ground_slabs(m: Invariant, owner: str, horizon: int, resolution: int, mode: str,
                 start: int = 0) -> List[Slab]:
    """Ground each occupancy fact of ``owner`` once, clipped to ticks [start, horizon]."""
    slabs = []
    for fact in flatten(filter_by_owner(m, owner)):
        if not isinstance(fact.payload, OCCUPANCY_ATOMS):
            continue
        span = fact.tick_range(horizon, start)
        if span is None:
            continue
        cells = cover_cells(region_of(fact.payload), resolution, mode)
        if cells:
            slabs.append(Slab(span[0], span[1], cells))
    logger.debug("Grounded owner %s into %d slabs (res=%d, %s)", owner, len(slabs), resolution, mode)
    return slabs


def ground_points(m: Invariant, owner: str, horizon: int, resolution: int, mode: str,
                  start: int = 0) -> PointSet4D:
    """
    Expand the occupancy facts of ``owner`` into explicit (x, y, t) cells.

    Args:
        m: The model, with event-relative times already resolved
        owner: Owner whose facts are grounded
        horizon: Last tick considered; untimed facts hold on [start, horizon]
        resolution: Cell edge length in grid units
        mode: "over" or "under"
        start: First tick considered

    Returns:
        set: Cells of every fact at every tick of its guard
    """
    return _expand(ground_slabs(m, owner, horizon, resolution, mode, start))


def _expand(slabs: Iterable[Slab]) -> PointSet4D:
    points = set()
    for slab in slabs:
        for t in range(slab.first, slab.last + 1):
            points.update(Cell(i, j, t) for i, j in slab.cells)
    return points


def ground_atoms(m: Invariant, owner: str, horizon: int, resolution: int, mode: str) -> List[GroundAtom]:
    return [GroundAtom(owner, c.x, c.y, c.z, c.t)
            for c in sorted(ground_points(m, owner, horizon, resolution, mode), key=lambda c: (c.t, c.x, c.y))]


def _segments(slab_groups: Iterable[Sequence[Slab]], horizon: int, start: int = 0):
    """Yield (first, last) tick segments on which every slab group is constant."""
    ticks = {start}
    for slabs in slab_groups:
        for slab in slabs:
            ticks.add(slab.first)
            if slab.last < horizon:
                ticks.add(slab.last + 1)
    ordered = sorted(ticks)
    for i, first in enumerate(ordered):
        yield first, (ordered[i + 1] - 1 if i + 1 < len(ordered) else horizon)


def _cells_at(slabs: Sequence[Slab], t: int) -> set:
    cells = set()
    for slab in slabs:
        if slab.first <= t <= slab.last:
            cells |= slab.cells
    return cells


def _ground_owners(model: Invariant, owners: Sequence[str], horizon: int, resolution: int,
                   mode: str, workers: int) -> List[List[Slab]]:
    if workers > 1 and len(owners) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda o: ground_slabs(model, o, horizon, resolution, mode), owners))
    return [ground_slabs(model, o, horizon, resolution, mode) for o in owners]


# Decision procedures

def _combine(models: Sequence[Invariant]) -> Invariant:
    return normalize(BigAnd(tuple(models)))


def _require_owners(model: Invariant, owners: Iterable[str]):
    known = list_owners(model)
    for owner in owners:
        if owner not in known:
            raise UnknownOwner(owner)


def _check_collision(q: CollisionAbsence, model: Invariant, workers: int) -> Verdict:
    _require_owners(model, (q.owner_a, q.owner_b))
    slabs_a, slabs_b = _ground_owners(model, (q.owner_a, q.owner_b), q.horizon, q.resolution, OVER, workers)
    witness = None
    atoms = 0
    for first, last in _segments((slabs_a, slabs_b), q.horizon):
        cells_a, cells_b = _cells_at(slabs_a, first), _cells_at(slabs_b, first)
        atoms += (len(cells_a) + len(cells_b)) * (last - first + 1)
        shared = cells_a & cells_b
        if witness is None and shared:
            x, y = min(shared)
            witness = Witness(first, x, y, f"{q.owner_a} and {q.owner_b} both occupy cell ({x}, {y}) at tick {first}")
    return Verdict(q, witness is None, witness, Stats(atoms, q.horizon + 1))


def _check_coverage(q: Coverage, model: Invariant, workers: int) -> Verdict:
    _require_owners(model, q.sensor_owners)
    groups = _ground_owners(model, q.sensor_owners, q.horizon, q.resolution, UNDER, workers)
    target = cover_cells(q.target, q.resolution, OVER)
    witness = None
    atoms = 0
    for first, last in _segments(groups, q.horizon):
        covered = set()
        for slabs in groups:
            covered |= _cells_at(slabs, first)
        atoms += len(covered) * (last - first + 1)
        uncovered = target - covered
        if witness is None and uncovered:
            x, y = min(uncovered)
            witness = Witness(first, x, y, f"cell ({x}, {y}) is not covered by any sensor at tick {first}")
    return Verdict(q, witness is None, witness, Stats(atoms, q.horizon + 1))


def _check_nearby(q: NearbyDevices, model: Invariant) -> Verdict:
    _require_owners(model, (q.owner,))
    own = _cells_at(ground_slabs(model, q.owner, q.t, 1, OVER, start=q.t), q.t)
    reach = {(x + dx, y + dy)
             for x, y in own
             for dx in range(-q.radius, q.radius + 1)
             for dy in range(-q.radius, q.radius + 1)}
    related = []
    atoms = len(own)
    for other in sorted(list_owners(model) - {q.owner}):
        cells = _cells_at(ground_slabs(model, other, q.t, 1, OVER, start=q.t), q.t)
        atoms += len(cells)
        if cells and not reach.isdisjoint(cells):
            related.append(other)
    return Verdict(q, bool(related), None, Stats(atoms, 1), tuple(related))


def check(q: Query, models: Sequence[Invariant], workers: int = 1) -> Verdict:
    """
    Decide ``q`` against the conjunction of ``models``.

    CollisionAbsence holds iff the owners' over-approximations never share a cell;
    Coverage holds iff the target's over-approximation lies inside the sensors'
    under-approximations at every tick; NearbyDevices holds iff at least one other
    owner lies within the Chebyshev radius at tick ``t``.

    Raises:
        UnknownOwner: The query names an owner no model defines
        UnsupportedFragment: A model puts NOT/OR above facts
        UnresolvedEventTime: An event-relative guard has no trigger binding
    """
    model = _combine(models)
    if isinstance(q, CollisionAbsence):
        verdict = _check_collision(q, model, workers)
    elif isinstance(q, Coverage):
        verdict = _check_coverage(q, model, workers)
    elif isinstance(q, NearbyDevices):
        verdict = _check_nearby(q, model)
    else:
        raise TypeError(f"not a query: {q!r}")
    logger.debug("Checked %s: holds=%s", type(q).__name__, verdict.holds)
    return verdict


# SAT export

def dimacs_bounds(sets: Sequence[Tuple[str, PointSet4D]]) -> Tuple[int, int, int]:
    """The tightest (X, Y, T) bounds holding every cell of ``sets``."""
    cells = [c for _, points in sets for c in points]
    if not cells:
        return (1, 1, 1)
    return (max(c.x for c in cells) + 1, max(c.y for c in cells) + 1, max(c.t for c in cells) + 1)


def export_dimacs(sets: Sequence[Tuple[str, PointSet4D]], query: CollisionAbsence,
                  bounds: Tuple[int, int, int]) -> str:
    """
    Encode a collision query over ground cell sets as DIMACS CNF.

    Variable ``ownerIndex*X*Y*T + ((t*Y + y)*X + x) + 1`` stands for the owner
    occupying cell (x, y) at tick t. Every ground atom is a unit clause. Over
    the cells of either query owner, atoms absent from an owner's set are
    negated, and one auxiliary variable per cell implies both owners occupy
    it. A final clause asks for some auxiliary to hold, so the formula is
    satisfiable iff the two owners collide.
    """
    if not sets:
        return "p cnf 0 0\n"
    size_x, size_y, size_t = bounds
    volume = size_x * size_y * size_t
    index = {owner: i for i, (owner, _) in enumerate(sets)}
    for owner in (query.owner_a, query.owner_b):
        if owner not in index:
            raise UnknownOwner(owner)

    def var(owner_index: int, c: Cell) -> int:
        if not (0 <= c.x < size_x and 0 <= c.y < size_y and 0 <= c.t < size_t):
            raise PointOutOfBounds(f"cell {tuple(c)} is outside bounds {bounds}")
        return owner_index * volume + ((c.t * size_y + c.y) * size_x + c.x) + 1

    def ordered(cells):
        return sorted(cells, key=lambda c: (c.t, c.y, c.x))

    clauses = []
    for i, (_, points) in enumerate(sets):
        clauses.extend([var(i, c)] for c in ordered(points))

    a, b = index[query.owner_a], index[query.owner_b]
    points_a, points_b = set(sets[a][1]), set(sets[b][1])
    candidates = ordered(points_a | points_b)
    for c in candidates:
        for i, points in ((a, points_a), (b, points_b)):
            if c not in points:
                clauses.append([-var(i, c)])
    base = len(sets) * volume
    goal = []
    for k, c in enumerate(candidates, start=1):
        aux = base + k
        clauses.append([-aux, var(a, c)])
        clauses.append([-aux, var(b, c)])
        goal.append(aux)
    clauses.append(goal)

    num_vars = max((abs(lit) for clause in clauses for lit in clause), default=0)
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    lines.extend(" ".join(str(lit) for lit in clause + [0]) for clause in clauses)
    logger.info("Exported %d variables, %d clauses", num_vars, len(clauses))
    return "\n".join(lines) + "\n"


def export_collision(models: Sequence[Invariant], query: CollisionAbsence) -> str:
    """
    Ground the query owners and export the collision goal with the tightest bounds.

    Models without any owner export the empty formula ``p cnf 0 0``. Untimed
    facts hold on every tick up to the horizon, so an export expanding to more
    than ``LARGE_EXPORT_ATOMS`` atoms is logged as a warning.
    """
    model = _combine(models)
    if not list_owners(model):
        return export_dimacs([], query, (1, 1, 1))
    _require_owners(model, (query.owner_a, query.owner_b))
    slabs = {owner: ground_slabs(model, owner, query.horizon, query.resolution, OVER)
             for owner in dict.fromkeys((query.owner_a, query.owner_b))}
    estimate = sum(len(s.cells) * (s.last - s.first + 1) for owner_slabs in slabs.values() for s in owner_slabs)
    if estimate > LARGE_EXPORT_ATOMS:
        logger.warning("Collision export expands to about %d ground atoms up to tick %d; "
                       "lower the horizon to shrink it", estimate, query.horizon)
    sets = [(owner, _expand(owner_slabs)) for owner, owner_slabs in slabs.items()]
    return export_dimacs(sets, query, dimacs_bounds(sets))
