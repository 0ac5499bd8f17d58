import threading
from typing import Dict, List, NamedTuple, Tuple


class HistoryEntry(NamedTuple):
    event: object
    summary: str


class StateSnapshot(NamedTuple):
    event_history: Tuple[HistoryEntry, ...]
    device_status: Dict[str, str]


class SharedState:
    """
    Global state shared by the event handlers.

    The history only grows. Every access takes the lock, and reads return
    copies, so a snapshot never changes under its reader.
    """

    def __init__(self, history=None, device_status=None):
        self._lock = threading.Lock()
        self._history: List[HistoryEntry] = [HistoryEntry(e, s) for e, s in (history or [])]
        self._device_status: Dict[str, str] = dict(device_status or {})

    def append(self, event, summary):
        with self._lock:
            self._history.append(HistoryEntry(event, summary))

    def set_status(self, owner, status):
        with self._lock:
            self._device_status[owner] = status

    def record(self, event, summary, owner=None, status=None):
        """Append to the history and update one device status in a single step."""
        with self._lock:
            self._history.append(HistoryEntry(event, summary))
            if owner is not None:
                self._device_status[owner] = status

    def snapshot(self) -> StateSnapshot:
        with self._lock:
            return StateSnapshot(tuple(self._history), dict(self._device_status))

    def history(self):
        with self._lock:
            return list(self._history)

    def __len__(self):
        with self._lock:
            return len(self._history)
