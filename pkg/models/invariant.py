"""
The invariant term language: logical connectives over spatio-temporal atoms.

Every term is an immutable dataclass, so structural equality is plain ``==``
and terms can be shared freely between threads. Atoms are leaves of the tree
(the ``Atom`` subclasses); connectives hold other terms.
"""

from dataclasses import dataclass
from typing import Callable, Iterator, Tuple


class Invariant:
    """Base class for every model term."""

    __slots__ = ()


class Atom(Invariant):
    """Base class for leaf facts."""

    __slots__ = ()


# Connectives

@dataclass(frozen=True)
class And(Invariant):
    left: Invariant
    right: Invariant


@dataclass(frozen=True)
class Or(Invariant):
    left: Invariant
    right: Invariant


@dataclass(frozen=True)
class Not(Invariant):
    term: Invariant


@dataclass(frozen=True)
class Implies(Invariant):
    antecedent: Invariant
    consequent: Invariant


@dataclass(frozen=True)
class BigAnd(Invariant):
    terms: Tuple[Invariant, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


# Atoms

@dataclass(frozen=True)
class EventRelativeTime:
    """A tick offset measured from the occurrence of a named trigger event."""
    event: str
    offset: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError(f"event-relative offset must be >= 0, got {self.offset}")


@dataclass(frozen=True)
class TimePoint(Atom):
    t: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"tick must be >= 0, got {self.t}")


@dataclass(frozen=True)
class TimeInterval(Atom):
    """Inclusive on both ends."""
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"tick must be >= 0, got {self.start}")
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} is after end {self.end}")


@dataclass(frozen=True)
class TimeStamp(Atom):
    ert: EventRelativeTime


@dataclass(frozen=True)
class Event(Atom):
    name: str


@dataclass(frozen=True)
class Owner(Atom):
    name: str


@dataclass(frozen=True)
class Prob(Atom):
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class ComponentState(Atom):
    state: str


@dataclass(frozen=True)
class OccupyPoint(Atom):
    x: int
    y: int


@dataclass(frozen=True)
class OccupyBox(Atom):
    """Corners may arrive unsorted; normalize() sorts them."""
    x1: int
    y1: int
    x2: int
    y2: int


@dataclass(frozen=True)
class OccupyCircle(Atom):
    cx: int
    cy: int
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class Edge(Atom):
    source: str
    target: str


@dataclass(frozen=True)
class Transition(Atom):
    source: str
    event: str
    target: str


@dataclass(frozen=True)
class TrueAtom(Atom):
    pass


@dataclass(frozen=True)
class FalseAtom(Atom):
    pass


TRUE = TrueAtom()
FALSE = FalseAtom()

TIME_ATOMS = (TimePoint, TimeInterval, TimeStamp)
OCCUPANCY_ATOMS = (OccupyPoint, OccupyBox, OccupyCircle)
FACT_ATOMS = OCCUPANCY_ATOMS + (Edge,)


# Traversal

def children(m: Invariant) -> Tuple[Invariant, ...]:
    if isinstance(m, (And, Or)):
        return (m.left, m.right)
    if isinstance(m, Not):
        return (m.term,)
    if isinstance(m, Implies):
        return (m.antecedent, m.consequent)
    if isinstance(m, BigAnd):
        return m.terms
    return ()


def walk(m: Invariant) -> Iterator[Invariant]:
    """Yield every sub-term of ``m`` in depth-first pre-order."""
    stack = [m]
    while stack:
        term = stack.pop()
        yield term
        stack.extend(reversed(children(term)))


def collect_atoms(m: Invariant, *kinds) -> list:
    """
    Return the atoms of ``m`` in traversal order.

    Args:
        m: The model to search
        *kinds: Optional atom classes to keep; all atoms when omitted

    Returns:
        list: Matching atoms, duplicates included
    """
    kinds = kinds or (Atom,)
    return [term for term in walk(m) if isinstance(term, kinds)]


def map_atoms(m: Invariant, fn: Callable[[Atom], Invariant]) -> Invariant:
    """Rebuild ``m`` with every atom replaced by ``fn(atom)``."""
    if isinstance(m, Atom):
        return fn(m)
    if isinstance(m, And):
        return And(map_atoms(m.left, fn), map_atoms(m.right, fn))
    if isinstance(m, Or):
        return Or(map_atoms(m.left, fn), map_atoms(m.right, fn))
    if isinstance(m, Not):
        return Not(map_atoms(m.term, fn))
    if isinstance(m, Implies):
        return Implies(map_atoms(m.antecedent, fn), map_atoms(m.consequent, fn))
    if isinstance(m, BigAnd):
        return BigAnd(tuple(map_atoms(t, fn) for t in m.terms))
    raise TypeError(f"not an invariant: {m!r}")


def contains_owner(m: Invariant) -> bool:
    return any(isinstance(term, Owner) for term in walk(m))


# Normalization

def _sort_box(box: OccupyBox) -> OccupyBox:
    return OccupyBox(min(box.x1, box.x2), min(box.y1, box.y2),
                     max(box.x1, box.x2), max(box.y1, box.y2))


def normalize(m: Invariant) -> Invariant:
    """
    Return a semantically equivalent, canonical form of ``m``.

    Boxes are corner-sorted, nested BIGANDs are merged in order,
    IMPLIES(TRUE, x) becomes x, and AND/OR/NOT with constant children are
    reduced by the usual identities. The result is a fixed point.
    """
    if isinstance(m, OccupyBox):
        return _sort_box(m)
    if isinstance(m, Atom):
        return m
    if isinstance(m, BigAnd):
        flat = []
        for term in m.terms:
            term = normalize(term)
            if isinstance(term, BigAnd):
                flat.extend(term.terms)
            else:
                flat.append(term)
        return BigAnd(tuple(flat))
    if isinstance(m, Implies):
        antecedent = normalize(m.antecedent)
        consequent = normalize(m.consequent)
        if antecedent == TRUE:
            return consequent
        return Implies(antecedent, consequent)
    if isinstance(m, And):
        left, right = normalize(m.left), normalize(m.right)
        if FALSE in (left, right):
            return FALSE
        if left == TRUE:
            return right
        if right == TRUE:
            return left
        return And(left, right)
    if isinstance(m, Or):
        left, right = normalize(m.left), normalize(m.right)
        if TRUE in (left, right):
            return TRUE
        if left == FALSE:
            return right
        if right == FALSE:
            return left
        return Or(left, right)
    if isinstance(m, Not):
        term = normalize(m.term)
        if term == TRUE:
            return FALSE
        if term == FALSE:
            return TRUE
        return Not(term)
    raise TypeError(f"not an invariant: {m!r}")


# Ownership

def list_owners(m: Invariant) -> set:
    """Return the names of all Owner atoms appearing anywhere in ``m``."""
    return {term.name for term in walk(m) if isinstance(term, Owner)}


def _conjuncts(m: Invariant) -> Iterator[Invariant]:
    if isinstance(m, And):
        yield from _conjuncts(m.left)
        yield from _conjuncts(m.right)
    elif isinstance(m, BigAnd):
        for term in m.terms:
            yield from _conjuncts(term)
    else:
        yield m


def _split_owner_guard(antecedent: Invariant):
    """Return (owner, remaining guard) for a conjunctive antecedent, owner None if it names none."""
    conjuncts = list(_conjuncts(antecedent))
    owners = [term.name for term in conjuncts if isinstance(term, Owner)]
    if not owners:
        return None, antecedent
    rest = [term for term in conjuncts if not isinstance(term, Owner)]
    if not rest:
        return owners[-1], None
    if len(rest) == 1:
        return owners[-1], rest[0]
    return owners[-1], BigAnd(tuple(rest))


def _project(m: Invariant, owner: str, current):
    # None means nothing in ``m`` is attributed to ``owner``
    if isinstance(m, Implies):
        guard_owner, guard = _split_owner_guard(m.antecedent)
        if guard_owner is not None:
            consequent = _project(m.consequent, owner, guard_owner)
            if consequent is None or guard is None:
                return consequent
            return Implies(guard, consequent)
    if isinstance(m, Atom):
        if isinstance(m, Owner) or current != owner:
            return None
        return m
    if isinstance(m, Implies):
        consequent = _project(m.consequent, owner, current)
        if consequent is None:
            return None
        return Implies(m.antecedent, consequent)
    if isinstance(m, BigAnd):
        kept = [p for p in (_project(t, owner, current) for t in m.terms) if p is not None]
        if not kept:
            return None
        if len(kept) == 1 and len(m.terms) > 1:
            return kept[0]
        return BigAnd(tuple(kept))
    if isinstance(m, (And, Or)):
        left = _project(m.left, owner, current)
        right = _project(m.right, owner, current)
        if left is None:
            return right
        if right is None:
            return left
        return type(m)(left, right)
    if isinstance(m, Not):
        term = _project(m.term, owner, current)
        return None if term is None else Not(term)
    raise TypeError(f"not an invariant: {m!r}")


def filter_by_owner(m: Invariant, owner: str) -> Invariant:
    """
    Return the part of ``m`` attributed to ``owner`` with its Owner guards stripped.

    Content outside every Owner guard is dropped. Nested guards attribute to the
    innermost owner. An Owner may also be a conjunct of a guard such as
    ``AND(Owner("A"), TimePoint(3))``; the last Owner conjunct wins and the
    remaining time conjuncts stay as the guard. Returns TRUE when nothing belongs
    to ``owner``.
    """
    projected = _project(m, owner, None)
    if projected is None:
        return TRUE
    return normalize(projected)

