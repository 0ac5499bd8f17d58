# tests/test_state_management.py

import threading
import unittest

from models.event_pipeline import EventRecord
from utils.state_management import HistoryEntry, SharedState


def _event(id, tick=0):
    return EventRecord(id=id, source_device="Robot2_Controller", kind="malfunction",
                       subject_owner="Robot2_Space", tick=tick)


class TestSharedState(unittest.TestCase):
    """Test suite for the state shared between event handlers."""

    def test_initial_history(self):
        """Seed history is kept in order as HistoryEntry values."""
        state = SharedState(history=[(_event("a"), "first"), (_event("b"), "second")])
        self.assertEqual(len(state), 2)
        self.assertEqual(state.history()[1], HistoryEntry(_event("b"), "second"))

    def test_record_updates_status(self):
        """record appends and sets the device status together."""
        state = SharedState()
        state.record(_event("a"), "seen", owner="Robot2_Space", status="malfunction")
        state.record(_event("b"), "seen again")

        snapshot = state.snapshot()

        self.assertEqual([entry.event.id for entry in snapshot.event_history], ["a", "b"])
        self.assertEqual(snapshot.device_status, {"Robot2_Space": "malfunction"})

    def test_set_status_overwrites(self):
        """The latest status for an owner wins."""
        state = SharedState(device_status={"Robot2_Space": "ok"})
        state.set_status("Robot2_Space", "malfunction")
        self.assertEqual(state.snapshot().device_status["Robot2_Space"], "malfunction")

    def test_snapshot_is_a_copy(self):
        """Later writes do not change an earlier snapshot."""
        # Setup
        state = SharedState()
        state.append(_event("a"), "one")
        before = state.snapshot()

        # Call the function
        state.record(_event("b"), "two", owner="Robot2_Space", status="malfunction")
        before.device_status["WorkPiece_Space"] = "edited"

        # Verify
        self.assertEqual(len(before.event_history), 1)
        self.assertEqual(state.snapshot().device_status, {"Robot2_Space": "malfunction"})

    def test_history_returns_copy(self):
        """Mutating the returned list leaves the state alone."""
        state = SharedState()
        state.append(_event("a"), "one")
        state.history().clear()
        self.assertEqual(len(state), 1)

    def test_concurrent_appends(self):
        """Appends from many threads are all kept."""
        state = SharedState()

        def worker(prefix):
            for i in range(200):
                state.record(_event(f"{prefix}-{i}", i), "seen", owner=prefix, status="busy")

        threads = [threading.Thread(target=worker, args=(f"t{n}",)) for n in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        self.assertEqual(len(state), 1600)
        self.assertEqual(len({entry.event.id for entry in state.history()}), 1600)
        self.assertEqual(len(state.snapshot().device_status), 8)


if __name__ == '__main__':
    unittest.main()
