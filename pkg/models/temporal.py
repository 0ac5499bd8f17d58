"""
Time slicing and the aggregation of time-point facts into interval facts.

A model is flattened into TimedFacts: each occupancy or edge atom paired with
its innermost time guard and its innermost owner. Interval bounds are
inclusive on both ends, which is what lets consecutive clock intervals such as
23:30:59 / 23:31:00 tile the day.
"""

import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Union

from models.errors import EmptySelection, UnresolvedEventTime, UnsupportedFragment
from models.geometry import bounding_box, region_of
from models.invariant import (
    FACT_ATOMS, OCCUPANCY_ATOMS, TIME_ATOMS, TRUE, And, Atom, BigAnd, Implies,
    Invariant, Not, OccupyBox, Or, Owner, TimeInterval, TimePoint, TimeStamp, walk,
)

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
LAST_TICK_OF_DAY = SECONDS_PER_DAY - 1

_CLOCK_PATTERN = re.compile(r"^(\d{1,2}):(\d{1,2}):(\d{1,2})$")


# Clock helpers

def gmt_day_tick(hours: int, minutes: int, seconds: int) -> int:
    """Convert a GMT-day clock reading into a tick (one tick per second)."""
    if not 0 <= hours <= 23:
        raise ValueError(f"hour out of range: {hours}")
    if not 0 <= minutes <= 59:
        raise ValueError(f"minute out of range: {minutes}")
    if not 0 <= seconds <= 59:
        raise ValueError(f"second out of range: {seconds}")
    return hours * 3600 + minutes * 60 + seconds


def clock_fields(tick: int):
    """Inverse of gmt_day_tick for ticks within one day."""
    if not 0 <= tick < SECONDS_PER_DAY:
        raise ValueError(f"tick {tick} is not within one GMT day")
    return tick // 3600, (tick % 3600) // 60, tick % 60


def format_clock(tick: int) -> str:
    hours, minutes, seconds = clock_fields(tick)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d}"


def parse_clock(text: str) -> int:
    """
    Parse a tick given either as an integer or as an ``hh:mm:ss`` clock literal.

    Args:
        text (str): "85800" or "23:50:00"

    Returns:
        int: The tick value
    """
    text = text.strip()
    match = _CLOCK_PATTERN.match(text)
    if match:
        return gmt_day_tick(*(int(group) for group in match.groups()))
    if text.isdigit():
        return int(text)
    raise ValueError(f"not a tick or hh:mm:ss clock literal: {text!r}")


# Timed facts

Guard = Optional[Union[TimePoint, TimeInterval, TimeStamp]]


@dataclass(frozen=True)
class TimedFact:
    """
    An occupancy or edge atom with the time guard and owner it holds under.

    ``guard`` None means the fact holds at every tick; ``owner`` None means no
    Owner guard encloses it.
    """
    payload: Atom
    guard: Guard = None
    owner: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.payload, TIME_ATOMS):
            raise ValueError("a timed fact payload cannot be a time atom")

    @property
    def is_point(self) -> bool:
        return isinstance(self.guard, TimePoint)

    def tick_range(self, horizon: int, start: int = 0):
        """Return the inclusive (first, last) ticks of the guard clipped to [start, horizon], or None."""
        guard = self.guard
        if guard is None:
            first, last = 0, horizon
        elif isinstance(guard, TimePoint):
            first = last = guard.t
        elif isinstance(guard, TimeInterval):
            first, last = guard.start, guard.end
        else:
            raise UnresolvedEventTime(guard.ert.event)
        first, last = max(first, start), min(last, horizon)
        if first > last:
            return None
        return first, last

    def holds_at(self, t: int) -> bool:
        guard = self.guard
        if guard is None:
            return True
        if isinstance(guard, TimePoint):
            return guard.t == t
        if isinstance(guard, TimeInterval):
            return guard.start <= t <= guard.end
        raise UnresolvedEventTime(guard.ert.event)


def _has_facts(m: Invariant) -> bool:
    return any(isinstance(term, FACT_ATOMS) for term in walk(m))


def _apply_guard(antecedent: Invariant, guard: Guard, owner: Optional[str]):
    """Return the (guard, owner) context after entering ``antecedent``, or None if it is not a guard."""
    if isinstance(antecedent, Owner):
        return guard, antecedent.name
    if isinstance(antecedent, TIME_ATOMS):
        return antecedent, owner
    if antecedent == TRUE:
        return guard, owner
    if isinstance(antecedent, (And, BigAnd)):
        parts = (antecedent.left, antecedent.right) if isinstance(antecedent, And) else antecedent.terms
        for part in parts:
            context = _apply_guard(part, guard, owner)
            if context is None:
                return None
            guard, owner = context
        return guard, owner
    return None


def flatten(m: Invariant) -> List[TimedFact]:
    """
    Pair every occupancy/edge atom with its innermost time guard and owner.

    The list follows a depth-first traversal of ``m``. Negation, disjunction
    or non-temporal guards above facts raise UnsupportedFragment.
    """
    facts = []
    stack = [(m, None, None)]
    while stack:
        term, guard, owner = stack.pop()
        if isinstance(term, FACT_ATOMS):
            facts.append(TimedFact(term, guard, owner))
        elif isinstance(term, Atom):
            continue
        elif isinstance(term, Implies):
            context = _apply_guard(term.antecedent, guard, owner)
            if context is None:
                if _has_facts(term.consequent):
                    raise UnsupportedFragment(
                        f"unsupported guard above facts: {type(term.antecedent).__name__}")
                continue
            stack.append((term.consequent, context[0], context[1]))
        elif isinstance(term, (Not, Or)):
            if _has_facts(term):
                raise UnsupportedFragment(f"{type(term).__name__.upper()} above occupancy or edge facts")
        elif isinstance(term, And):
            stack.append((term.right, guard, owner))
            stack.append((term.left, guard, owner))
        elif isinstance(term, BigAnd):
            stack.extend((t, guard, owner) for t in reversed(term.terms))
    logger.debug("Flattened model into %d timed facts", len(facts))
    return facts


def slice_at(facts: Iterable[TimedFact], t: int) -> list:
    """Return the payloads of all facts whose guard contains tick ``t``."""
    return [fact.payload for fact in facts if fact.holds_at(t)]


def guard_boundaries(facts: Iterable[TimedFact], horizon: int) -> List[int]:
    """Sorted ticks in [0, horizon] at which the set of holding facts may change."""
    ticks = {0}
    for fact in facts:
        span = fact.tick_range(horizon)
        if span is None:
            continue
        ticks.add(span[0])
        if span[1] + 1 <= horizon:
            ticks.add(span[1] + 1)
    return sorted(ticks)


# Aggregation

def _bounding_box(payloads) -> OccupyBox:
    box = bounding_box([region_of(payload) for payload in payloads])
    return OccupyBox(box.x1, box.y1, box.x2, box.y2)


def fold_points_to_interval(facts: Iterable[TimedFact], owner: str) -> TimedFact:
    """
    Aggregate the point-timed occupancy facts of ``owner`` into one interval fact.

    The result is a safe over-approximation: its interval spans every input tick
    and its box covers every input payload (circles via their bounding boxes).

    Raises:
        EmptySelection: No fact belongs to ``owner``
        ValueError: A selected fact is not point-timed or not an occupancy fact
    """
    selected = [fact for fact in facts if fact.owner == owner]
    if not selected:
        raise EmptySelection(f"no timed facts for owner '{owner}'")
    for fact in selected:
        if not fact.is_point or not isinstance(fact.payload, OCCUPANCY_ATOMS):
            raise ValueError(f"only point-timed occupancy facts can be folded, got {fact}")
    ticks = [fact.guard.t for fact in selected]
    return TimedFact(
        _bounding_box(fact.payload for fact in selected),
        TimeInterval(min(ticks), max(ticks)),
        owner,
    )


def fold_windows(facts: Iterable[TimedFact], owner: str, window: int) -> List[TimedFact]:
    """
    Fold the point facts of ``owner`` into consecutive windows of ``window`` ticks.

    Window k covers ticks [k*window, (k+1)*window - 1]; empty windows are skipped.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    buckets = {}
    for fact in facts:
        if fact.owner != owner:
            continue
        if not fact.is_point:
            raise ValueError(f"only point-timed facts can be folded, got {fact}")
        buckets.setdefault(fact.guard.t // window, []).append(fact)
    if not buckets:
        raise EmptySelection(f"no timed facts for owner '{owner}'")
    return [fold_points_to_interval(buckets[key], owner) for key in sorted(buckets)]


def facts_to_model(facts: Iterable[TimedFact]) -> Invariant:
    """Rebuild an owner-guarded model from timed facts, grouping owners by first appearance."""
    groups = {}
    for fact in facts:
        term = fact.payload if fact.guard is None else Implies(fact.guard, fact.payload)
        groups.setdefault(fact.owner, []).append(term)
    parts = []
    for owner, terms in groups.items():
        body = BigAnd(tuple(terms))
        parts.append(body if owner is None else Implies(Owner(owner), body))
    if len(parts) == 1:
        return parts[0]
    return BigAnd(tuple(parts))
