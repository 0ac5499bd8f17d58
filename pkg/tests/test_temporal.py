# tests/test_temporal.py

import random
import unittest

from config import FIXTURES_DIR, TRAJECTORY_EVENT
from models.checker import resolve_trigger
from models.errors import EmptySelection, UnresolvedEventTime, UnsupportedFragment
from models.geometry import grid_points, region_of
from models.invariant import (
    TRUE, BigAnd, Edge, EventRelativeTime, Implies, Not, OccupyBox, OccupyCircle, OccupyPoint,
    Or, Owner, Prob, TimeInterval, TimePoint, TimeStamp, normalize,
)
from models.temporal import (
    TimedFact, clock_fields, facts_to_model, flatten, fold_points_to_interval, fold_windows,
    format_clock, gmt_day_tick, guard_boundaries, parse_clock, slice_at,
)
from utils.file_operations import load_model


def _hub_peers(payloads):
    return {edge.target for edge in payloads}


class TestClock(unittest.TestCase):
    """Test the GMT-day clock helpers."""

    def test_gmt_day_tick(self):
        """Clock readings map to seconds of the day."""
        self.assertEqual(gmt_day_tick(0, 0, 0), 0)
        self.assertEqual(gmt_day_tick(23, 50, 0), 85800)
        self.assertEqual(gmt_day_tick(23, 59, 59), 86399)

    def test_out_of_range(self):
        """Fields outside the clock face are rejected."""
        for fields in ((24, 0, 0), (0, 60, 0), (0, 0, 60), (-1, 0, 0)):
            with self.assertRaises(ValueError):
                gmt_day_tick(*fields)

    def test_format_and_parse(self):
        """Ticks print zero-padded and parse from either notation."""
        self.assertEqual(format_clock(85800), "23:50:00")
        self.assertEqual(format_clock(3723), "01:02:03")
        self.assertEqual(parse_clock("23:50:00"), 85800)
        self.assertEqual(parse_clock(" 85800 "), 85800)
        self.assertEqual(parse_clock("7:5:3"), 25503)
        self.assertEqual(clock_fields(85800), (23, 50, 0))

    def test_parse_rejects_garbage(self):
        """Anything else is a ValueError."""
        for text in ("noon", "-5", "23:50", "25:00:00"):
            with self.assertRaises(ValueError):
                parse_clock(text)
        with self.assertRaises(ValueError):
            clock_fields(86400)


class TestFlatten(unittest.TestCase):
    """Test flattening models into timed facts."""

    def setUp(self):
        self.comm = load_model(FIXTURES_DIR / "comm_model.bsd")

    def test_comm_model(self):
        """The communication schedule flattens into 5 + 4 + 3 edge facts."""
        facts = flatten(self.comm)
        self.assertEqual(len(facts), 12)
        self.assertTrue(all(f.owner == "midlevelcommgraph" for f in facts))
        self.assertTrue(all(isinstance(f.payload, Edge) for f in facts))
        counts = {}
        for f in facts:
            counts[f.guard] = counts.get(f.guard, 0) + 1
        self.assertEqual(counts, {
            TimeInterval(0, 84659): 5,
            TimeInterval(84660, 85559): 4,
            TimeInterval(85560, 86399): 3,
        })

    def test_depth_first_order(self):
        """Facts come out in source order."""
        facts = flatten(self.comm)
        self.assertEqual(facts[0].payload, Edge("ComHub", "Robot1"))
        self.assertEqual(facts[4].payload, Edge("ComHub", "ConvBelt"))
        self.assertEqual(facts[-1].payload, Edge("ComHub", "ConvBelt"))
        self.assertEqual(facts[-1].guard, TimeInterval(85560, 86399))

    def test_point_guard_without_owner(self):
        """An unowned point-guarded box."""
        facts = flatten(Implies(TimePoint(3), OccupyBox(0, 0, 1, 1)))
        self.assertEqual(facts, [TimedFact(OccupyBox(0, 0, 1, 1), TimePoint(3), None)])

    def test_true_is_empty(self):
        """TRUE carries no facts."""
        self.assertEqual(flatten(TRUE), [])

    def test_innermost_guard(self):
        """Nested guards keep the innermost time and owner."""
        m = Implies(Owner("A"), Implies(TimeInterval(0, 9), Implies(Owner("B"), Implies(TimePoint(4), OccupyPoint(1, 1)))))
        self.assertEqual(flatten(m), [TimedFact(OccupyPoint(1, 1), TimePoint(4), "B")])

    def test_stable_under_normalize(self):
        """Flattening does not depend on normalization."""
        m = BigAnd((Implies(TRUE, Implies(Owner("A"), OccupyBox(5, 5, 0, 0))), self.comm))
        self.assertEqual(flatten(normalize(m))[1:], flatten(m)[1:])
        self.assertEqual(flatten(normalize(self.comm)), flatten(self.comm))

    def test_unsupported_fragments(self):
        """NOT, OR and non-temporal guards above facts are rejected."""
        for m in (Or(OccupyPoint(0, 0), OccupyPoint(1, 1)),
                  Not(Edge("a", "b")),
                  Implies(Prob(0.5), OccupyPoint(0, 0)),
                  BigAnd((Edge("a", "b"), Implies(Not(TimePoint(1)), Edge("c", "d"))))):
            with self.assertRaises(UnsupportedFragment):
                flatten(m)

    def test_connectives_without_facts_are_skipped(self):
        """Disjunctions over guards alone contribute nothing."""
        self.assertEqual(flatten(BigAnd((Or(TimePoint(1), TimePoint(2)), Edge("a", "b")))),
                         [TimedFact(Edge("a", "b"))])


class TestSlicing(unittest.TestCase):
    """Test slicing timed facts at a tick."""

    def setUp(self):
        self.facts = flatten(load_model(FIXTURES_DIR / "comm_model.bsd"))

    def test_evening_slice(self):
        """At 23:50:00 only three hub links remain."""
        self.assertEqual(_hub_peers(slice_at(self.facts, 85800)), {"Robot1", "Store", "ConvBelt"})

    def test_noon_slice(self):
        """At noon all five hub links hold."""
        self.assertEqual(_hub_peers(slice_at(self.facts, 43200)),
                         {"Robot1", "Robot2", "Robot3", "Store", "ConvBelt"})

    def test_empty(self):
        """No facts, no payloads."""
        self.assertEqual(slice_at([], 5), [])

    def test_changes_only_at_boundaries(self):
        """The slice changes exactly where an interval begins."""
        changes = []
        previous = set(slice_at(self.facts, 84000))
        for t in range(84001, 86400):
            current = set(slice_at(self.facts, t))
            if current != previous:
                changes.append(t)
            previous = current
        self.assertEqual(changes, [84660, 85560])
        self.assertEqual(guard_boundaries(self.facts, 86399), [0, 84660, 85560])

    def test_untimed_holds_always(self):
        """A fact without a guard holds at every tick."""
        fact = TimedFact(Edge("a", "b"))
        self.assertTrue(fact.holds_at(0))
        self.assertTrue(fact.holds_at(10 ** 9))
        self.assertEqual(fact.tick_range(50), (0, 50))

    def test_unresolved_guard(self):
        """Event-relative guards must be bound before slicing."""
        fact = TimedFact(OccupyPoint(0, 0), TimeStamp(EventRelativeTime("ConvAct", 3)))
        with self.assertRaises(UnresolvedEventTime):
            fact.holds_at(3)

    def test_time_payload_rejected(self):
        """A time atom is a guard, not a payload."""
        with self.assertRaises(ValueError):
            TimedFact(TimePoint(1))


class TestFolding(unittest.TestCase):
    """Test aggregation of point facts into interval facts."""

    def test_two_boxes(self):
        """Two point facts fold into their bounding box over the spanned interval."""
        facts = [TimedFact(OccupyBox(0, 0, 1, 1), TimePoint(1), "A"),
                 TimedFact(OccupyBox(2, 2, 3, 3), TimePoint(3), "A")]
        self.assertEqual(fold_points_to_interval(facts, "A"),
                         TimedFact(OccupyBox(0, 0, 3, 3), TimeInterval(1, 3), "A"))

    def test_circle_bounding_box(self):
        """Circles fold via their bounding boxes."""
        facts = [TimedFact(OccupyCircle(5, 5, 3), TimePoint(5), "A")]
        self.assertEqual(fold_points_to_interval(facts, "A"),
                         TimedFact(OccupyBox(2, 2, 8, 8), TimeInterval(5, 5), "A"))

    def test_empty_selection(self):
        """Folding an owner with no facts is an error."""
        facts = [TimedFact(OccupyPoint(0, 0), TimePoint(0), "A")]
        with self.assertRaises(EmptySelection):
            fold_points_to_interval(facts, "B")
        with self.assertRaises(EmptySelection):
            fold_points_to_interval([], "A")

    def test_interval_facts_rejected(self):
        """Only point-timed occupancy facts fold."""
        with self.assertRaises(ValueError):
            fold_points_to_interval([TimedFact(OccupyPoint(0, 0), TimeInterval(0, 2), "A")], "A")
        with self.assertRaises(ValueError):
            fold_points_to_interval([TimedFact(Edge("a", "b"), TimePoint(0), "A")], "A")

    def test_trajectory_fold_is_sound(self):
        """The folded trajectory contains every input point at every input tick."""
        model = resolve_trigger(load_model(FIXTURES_DIR / "trajectory_default.bsd"), TRAJECTORY_EVENT, 0)
        facts = flatten(model)
        for owner in ("Robot2_Space", "WorkPiece_Space"):
            folded = fold_points_to_interval(facts, owner)
            selected = [f for f in facts if f.owner == owner]
            self.assertEqual(len(selected), 101)
            self.assertEqual(folded.guard, TimeInterval(0, 100))
            box = region_of(folded.payload)
            for fact in selected:
                self.assertTrue(folded.holds_at(fact.guard.t))
                for x, y in grid_points(region_of(fact.payload)):
                    self.assertTrue(box.x1 <= x <= box.x2 and box.y1 <= y <= box.y2)
        robot = fold_points_to_interval(facts, "Robot2_Space")
        self.assertEqual(robot.payload, OccupyBox(30, 110, 50, 180))

    def test_random_folds_are_sound(self):
        """Random point-timed fact sets fold to a fact containing every input point and tick."""
        rng = random.Random(13)
        for _ in range(200):
            facts = []
            for _ in range(rng.randint(1, 6)):
                x, y = rng.randint(0, 30), rng.randint(0, 30)
                payload = rng.choice([
                    OccupyPoint(x, y),
                    OccupyBox(x, y, x + rng.randint(0, 5), y + rng.randint(0, 5)),
                    OccupyCircle(x, y, rng.randint(0, 4)),
                ])
                facts.append(TimedFact(payload, TimePoint(rng.randint(0, 100)), "A"))
            folded = fold_points_to_interval(facts, "A")
            box = region_of(folded.payload)
            for fact in facts:
                self.assertTrue(folded.holds_at(fact.guard.t))
                for x, y in grid_points(region_of(fact.payload)):
                    self.assertTrue(box.x1 <= x <= box.x2 and box.y1 <= y <= box.y2)

    def test_fold_windows(self):
        """Windows fold separately and skip empty buckets."""
        facts = [TimedFact(OccupyPoint(t, 0), TimePoint(t), "A") for t in (0, 1, 4, 11)]
        windows = fold_windows(facts, "A", 5)
        self.assertEqual([w.guard for w in windows], [TimeInterval(0, 4), TimeInterval(11, 11)])
        self.assertEqual(windows[0].payload, OccupyBox(0, 0, 4, 0))
        with self.assertRaises(ValueError):
            fold_windows(facts, "A", 0)

    def test_facts_to_model(self):
        """Timed facts rebuild into an owner-guarded model that flattens back."""
        facts = [TimedFact(OccupyBox(0, 0, 3, 3), TimeInterval(1, 3), "A"),
                 TimedFact(Edge("a", "b"), None, "B")]
        model = facts_to_model(facts)
        self.assertEqual(model, BigAnd((
            Implies(Owner("A"), BigAnd((Implies(TimeInterval(1, 3), OccupyBox(0, 0, 3, 3)),))),
            Implies(Owner("B"), BigAnd((Edge("a", "b"),))),
        )))
        self.assertEqual(flatten(model), facts)


if __name__ == '__main__':
    unittest.main()
