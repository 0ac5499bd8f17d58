# tests/test_event_pipeline.py

import json
import unittest
from unittest.mock import patch

from pydantic import ValidationError

from config import FIXTURES_DIR, TRAJECTORY_EVENT
from models.event_pipeline import (
    EventRecord, Pipeline, confidence_gate, handle, ingest, load_plant_models, queue_key,
)
from models.scenario import ScenarioConfig, generate_events
from utils.file_operations import join_documents, load_models, read_event_log
from utils.state_management import SharedState
from utils.visualization import DisplayCommand, Panel, emit_xml

MODEL_FILES = ("comm_model.bsd", "site_graphs.bsd", "trajectory_default.bsd")
TRIGGER = {TRAJECTORY_EVENT: 85760}


def _event(id, tick, priority=0, owner="Robot2_Space", source="Robot2_Controller", kind="malfunction"):
    return EventRecord(id=id, source_device=source, kind=kind, subject_owner=owner, tick=tick, priority=priority)


def _plant():
    return load_plant_models(load_models(FIXTURES_DIR / name for name in MODEL_FILES), TRIGGER)


def _golden(name):
    with open(FIXTURES_DIR / "goldens" / name, "r", encoding="utf-8") as f:
        return f.read()


class TestIngest(unittest.TestCase):
    """Test validation, deduplication and ordering of raw events."""

    def test_tick_breaks_priority_ties(self):
        """Equal priorities dequeue by tick."""
        batch = ingest([_event("a", 5), _event("b", 3)])
        self.assertEqual([e.id for e in batch.events], ["b", "a"])

    def test_priority_first(self):
        """Higher priority wins regardless of tick."""
        batch = ingest([_event("low", 1, priority=2), _event("high", 50, priority=9)])
        self.assertEqual([e.id for e in batch.events], ["high", "low"])

    def test_id_breaks_remaining_ties(self):
        """Identical priority and tick fall back to the id."""
        batch = ingest([_event("z", 1), _event("m", 1)])
        self.assertEqual([e.id for e in batch.events], ["m", "z"])
        self.assertEqual(queue_key(_event("x", 4, priority=3)), (-3, 4, "x"))

    def test_duplicate(self):
        """The second copy of an id is dead-lettered."""
        line = json.dumps({"id": "e1", "source_device": "d", "kind": "k", "subject_owner": "o", "tick": 1})
        batch = ingest([line, line])
        self.assertEqual(len(batch.events), 1)
        self.assertEqual(batch.dead_letters, ((line, "duplicate"),))

    def test_malformed_lines(self):
        """Undecodable lines and non-objects are rejected with a reason."""
        batch = ingest(["{not json", "[1, 2]"])
        self.assertEqual(batch.events, ())
        reasons = [reason for _, reason in batch.dead_letters]
        self.assertTrue(reasons[0].startswith("malformed record: "))
        self.assertEqual(reasons[1], "malformed record: not an object")

    def test_invalid_records(self):
        """Schema violations name the offending field."""
        batch = ingest([
            {"id": "a", "source_device": "d", "kind": "k", "subject_owner": "o"},
            {"id": "b", "source_device": "d", "kind": "k", "subject_owner": "o", "tick": -1},
            {"id": "c", "source_device": "d", "kind": "k", "subject_owner": "o", "tick": 1, "extra": 1},
        ])
        self.assertEqual(batch.events, ())
        reasons = [reason for _, reason in batch.dead_letters]
        self.assertTrue(all(r.startswith("invalid record: ") for r in reasons))
        self.assertIn("tick", reasons[0])
        self.assertIn("tick", reasons[1])
        self.assertIn("extra", reasons[2])

    def test_horizon(self):
        """Ticks beyond the horizon are rejected."""
        batch = ingest([_event("a", 100), _event("b", 101)], horizon=100)
        self.assertEqual([e.id for e in batch.events], ["a"])
        self.assertEqual(batch.dead_letters[0][1], "tick outside horizon")

    def test_records_are_frozen(self):
        """Validated events cannot be changed."""
        with self.assertRaises(ValidationError):
            _event("a", 1).tick = 5


class TestConfidenceGate(unittest.TestCase):
    """Test the k-in-window confidence threshold."""

    def setUp(self):
        self.state = SharedState(history=[(_event("h1", 95), "seen"), (_event("h2", 98), "seen")])

    def test_k_one_always_passes(self):
        """A single report is enough when k is 1."""
        self.assertTrue(confidence_gate(_event("new", 100), SharedState(), 1, 0))

    def test_window_counts_history(self):
        """Two earlier reports plus this one reach k=3 in a 10-tick window."""
        self.assertTrue(confidence_gate(_event("new", 100), self.state, 3, 10))

    def test_narrow_window(self):
        """With a 3-tick window the report at tick 95 falls out."""
        self.assertFalse(confidence_gate(_event("new", 100), self.state, 3, 3))

    def test_other_kinds_ignored(self):
        """Only the same device and kind count."""
        e = _event("new", 100, kind="sensor_alarm")
        self.assertFalse(confidence_gate(e, self.state, 2, 10))

    def test_pending_events_count(self):
        """Admitted but unrecorded events count too."""
        self.assertTrue(confidence_gate(_event("new", 100), SharedState(), 2, 10, pending=[_event("p", 99)]))

    def test_self_not_counted_twice(self):
        """An event already in the history counts once."""
        e = _event("h2", 98)
        self.assertFalse(confidence_gate(e, self.state, 3, 10))
        self.assertTrue(confidence_gate(e, self.state, 2, 10))

    def test_invalid_k(self):
        """k must be positive."""
        with self.assertRaises(ValueError):
            confidence_gate(_event("new", 100), self.state, 0, 10)


class TestHandle(unittest.TestCase):
    """Test turning one event into a display command."""

    @classmethod
    def setUpClass(cls):
        cls.plant = _plant()

    def test_robot2_malfunction(self):
        """The evening malfunction shows the workpiece nearby and the robot cut off."""
        state = SharedState()
        e = _event("evt-001", 85800, priority=9).model_copy(update={"payload": {"code": "E42"}})

        command = handle(e, self.plant, state)

        titles = [p.title for p in command.panels]
        self.assertEqual(titles, ["Incident", "Nearby devices", "Connectivity"])
        self.assertEqual(command.panels[1].related_owners, ("WorkPiece_Space",))
        self.assertIn("Robot2 unreachable from ComHub at 23:50:00", command.panels[2].body)
        self.assertEqual(emit_xml(command) + "\n", _golden("robot2_malfunction.xml"))
        self.assertEqual(state.snapshot().device_status, {"Robot2_Space": "malfunction"})

    def test_belt_reachable(self):
        """The belt is back on the hub at 23:50:10 and the service centers are reachable."""
        e = _event("evt-002", 85810, owner="WorkPiece_Space", source="BeltSensor", kind="sensor_alarm")
        body = handle(e, self.plant, SharedState()).panels[2].body
        self.assertEqual(body, "ConvBelt reachable from ComHub at 23:50:10; "
                               "ServiceCenter1: reachable; ServiceCenter2: reachable")

    def test_unknown_owner(self):
        """An unknown subject gives one diagnostic panel and is still recorded."""
        state = SharedState()
        command = handle(_event("evt-003", 85820, owner="Robot9_Space"), self.plant, state)
        self.assertEqual(len(command.panels), 1)
        self.assertEqual(command.panels[0].title, "Diagnostic")
        self.assertEqual(command.panels[0].body, "unknown owner: Robot9_Space")
        self.assertEqual(len(state), 1)
        self.assertEqual(state.snapshot().device_status, {})

    def test_ticks_past_one_day(self):
        """Ticks beyond one day are printed as raw ticks."""
        body = handle(_event("late", 90000), self.plant, SharedState()).panels[0].body
        self.assertIn("at tick 90000 (tick 90000)", body)

    def test_target(self):
        """The display target is passed through."""
        command = handle(_event("a", 85800), self.plant, SharedState(), target="wall")
        self.assertEqual(command.target, "wall")


class TestPipeline(unittest.TestCase):
    """Test the full ingest, gate and handle run."""

    @classmethod
    def setUpClass(cls):
        cls.plant = _plant()
        owners = ["Robot2_Space", "WorkPiece_Space", "Robot9_Space"]
        cls.events = generate_events(ScenarioConfig(seed=4), 200, owners, horizon=86399)

    def test_deterministic_across_workers(self):
        """One worker and eight workers produce the same documents in the same order."""
        serial = Pipeline(self.plant, workers=1).run(self.events)
        parallel = Pipeline(self.plant, workers=8).run(self.events)
        self.assertEqual(serial.outputs, parallel.outputs)
        self.assertEqual(len(serial.outputs), 200)

    def test_outputs_follow_queue_order(self):
        """Documents come out in (priority desc, tick asc, id asc) order."""
        result = Pipeline(self.plant, workers=4).run(self.events)
        self.assertEqual([event_id for event_id, _ in result.outputs], [e.id for e in result.batch.events])

    def test_suppression(self):
        """With k=2 a lone report is suppressed and logged in the history."""
        state = SharedState()
        events = [_event("a", 85800), _event("b", 85810), _event("c", 10, kind="maintenance")]
        result = Pipeline(self.plant, state=state, k=2, window=60, workers=1).run(events)
        self.assertEqual(result.suppressed, ["c", "a"])
        self.assertEqual([event_id for event_id, _ in result.outputs], ["b"])
        summaries = {entry.event.id: entry.summary for entry in state.history()}
        self.assertEqual(summaries["a"], "suppressed: below confidence threshold")
        self.assertEqual(len(state), 3)

    def test_empty(self):
        """No events, no output."""
        result = Pipeline(self.plant).run([])
        self.assertEqual(result.outputs, [])
        self.assertEqual(result.documents, [])

    @patch("models.event_pipeline.handle")
    def test_handlers_grouped_by_owner(self, mock_handle):
        """Events of one owner are handled in queue order."""
        calls = []
        mock_handle.side_effect = lambda e, models, state, target: calls.append(e.id) or _fake_command()
        events = [_event("r1", 5, priority=1), _event("w1", 6, owner="WorkPiece_Space"), _event("r2", 7)]
        Pipeline(self.plant, workers=1).run(events)
        self.assertEqual(calls, ["r1", "r2", "w1"])

    def test_stress(self):
        """A thousand events are each either handled or dead-lettered, never lost."""
        raw = generate_events(ScenarioConfig(seed=5), 1000, ["Robot2_Space", "WorkPiece_Space"])
        raw[10] = dict(raw[3])
        raw[20] = "not json"
        state = SharedState()
        result = Pipeline(self.plant, state=state, workers=8).run(raw)
        self.assertEqual(len(result.outputs) + len(result.batch.dead_letters), 1000)
        self.assertEqual(len(result.batch.dead_letters), 2)
        self.assertEqual(len(state), len(result.outputs))
        self.assertEqual(len({event_id for event_id, _ in result.outputs}), len(result.outputs))


def _fake_command():
    return DisplayCommand("workstation", (Panel("x"),))


class TestReplay(unittest.TestCase):
    """Test replaying the bundled demo log against the frozen displays."""

    def test_demo_log_matches_goldens(self):
        """The demo log reproduces the golden display stream byte for byte."""
        lines = read_event_log(FIXTURES_DIR / "demo_events.ndlog")
        state = SharedState()

        result = Pipeline(_plant(), state=state, workers=4).run(lines)

        self.assertEqual(result.batch.dead_letters, ())
        self.assertEqual([event_id for event_id, _ in result.outputs], ["evt-001", "evt-002", "evt-003"])
        self.assertEqual(join_documents(result.documents), _golden("demo_displays.xml"))
        self.assertEqual(result.outputs[0][1] + "\n", _golden("robot2_malfunction.xml"))
        self.assertEqual(state.snapshot().device_status,
                         {"Robot2_Space": "malfunction", "WorkPiece_Space": "sensor_alarm"})

    def test_repeated_replays_identical(self):
        """Ten replays with varying worker counts give the same stream."""
        lines = read_event_log(FIXTURES_DIR / "demo_events.ndlog")
        plant = _plant()
        streams = {join_documents(Pipeline(plant, workers=1 + run % 4).run(lines).documents)
                   for run in range(10)}
        self.assertEqual(streams, {_golden("demo_displays.xml")})


if __name__ == '__main__':
    unittest.main()
