"""
Alarm-driven decision support: ingest plant events, gate them on historical
confidence, run the geometric and topological checks for each admitted event
and turn the answers into display commands.

Handlers for the same subject owner run one after another; different owners
are handled concurrently. Output always follows the sorted queue, so a replay
is byte-identical whatever the worker count.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config import (
    COMM_GRAPH_OWNER, DEFAULT_DEVICE_MAP, GATEWAY_NODE, NEARBY_RADIUS, SERVICE_CENTERS,
    SITE_GRAPH_OWNER, SITE_NODE,
)
from models.checker import NearbyDevices, check, resolve_triggers
from models.errors import PlantSpaceError, UnknownNode
from models.invariant import BigAnd, Invariant, normalize
from models.temporal import SECONDS_PER_DAY, format_clock
from models.topology import TimeIndexedGraph, connected, graph_from_model
from utils.state_management import SharedState
from utils.visualization import DisplayCommand, Panel, emit_xml

logger = logging.getLogger(__name__)


class EventRecord(BaseModel):
    """One alarm or status event reported by a plant device."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., min_length=1, description="Unique per run")
    source_device: str = Field(..., min_length=1)
    kind: str = Field(..., min_length=1, description="e.g. malfunction, sensor_alarm")
    subject_owner: str = Field(..., min_length=1, description="Geometric owner the event concerns")
    tick: int = Field(..., ge=0)
    priority: int = Field(default=0, ge=0)
    payload: Dict[str, str] = Field(default_factory=dict)


def queue_key(event: EventRecord):
    return (-event.priority, event.tick, event.id)


@dataclass(frozen=True)
class QueuedBatch:
    events: Tuple[EventRecord, ...]
    dead_letters: Tuple[Tuple[object, str], ...] = ()


RawEvent = Union[str, dict, EventRecord]


def _validation_reason(exc: ValidationError) -> str:
    problems = "; ".join(
        f"{'.'.join(str(part) for part in error['loc']) or 'record'}: {error['msg']}"
        for error in exc.errors()
    )
    return f"invalid record: {problems}"


def ingest(items: Iterable[RawEvent], horizon: Optional[int] = None) -> QueuedBatch:
    """
    Validate, deduplicate and sort raw events.

    Args:
        items: Log lines (JSON objects), dictionaries or EventRecords
        horizon: Last admissible tick; None admits every tick

    Returns:
        QueuedBatch: Events in (priority desc, tick asc, id asc) order, and a
            (raw event, reason) dead letter for every rejected item
    """
    seen = set()
    events = []
    dead_letters = []
    for item in items:
        raw = item.model_dump() if isinstance(item, EventRecord) else item
        data = raw
        if isinstance(raw, str):
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                dead_letters.append((raw, f"malformed record: {exc.msg}"))
                continue
        if not isinstance(data, dict):
            dead_letters.append((raw, "malformed record: not an object"))
            continue
        try:
            record = EventRecord.model_validate(data)
        except ValidationError as exc:
            dead_letters.append((raw, _validation_reason(exc)))
            continue
        if horizon is not None and record.tick > horizon:
            dead_letters.append((raw, "tick outside horizon"))
            continue
        if record.id in seen:
            dead_letters.append((raw, "duplicate"))
            continue
        seen.add(record.id)
        events.append(record)
    events.sort(key=queue_key)
    logger.info("Ingested %d events, %d dead letters", len(events), len(dead_letters))
    return QueuedBatch(tuple(events), tuple(dead_letters))


def confidence_gate(e: EventRecord, state: SharedState, k: int, window: int,
                    pending: Sequence[EventRecord] = ()) -> bool:
    """
    True iff at least ``k`` events with the same (source_device, kind) fall in
    [e.tick - window, e.tick], counting ``e`` itself, the recorded history and
    ``pending`` events not yet recorded.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        return True
    earlier = [entry.event for entry in state.history()] + list(pending)
    count = 1 + sum(
        1 for other in earlier
        if other.id != e.id
        and other.source_device == e.source_device
        and other.kind == e.kind
        and e.tick - window <= other.tick <= e.tick
    )
    return count >= k


# Handling

@dataclass(frozen=True)
class PlantModels:
    """Everything a handler consults: the trigger-resolved model and the graphs drawn from it."""
    model: Invariant
    comm_graph: TimeIndexedGraph
    site_graph: TimeIndexedGraph
    device_map: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_DEVICE_MAP))
    gateway: str = GATEWAY_NODE
    site_node: str = SITE_NODE
    service_centers: Tuple[str, ...] = tuple(SERVICE_CENTERS)
    radius: int = NEARBY_RADIUS


def load_plant_models(models: Sequence[Invariant], triggers: Optional[Dict[str, int]] = None,
                      device_map: Optional[Dict[str, str]] = None, radius: int = NEARBY_RADIUS) -> PlantModels:
    model = resolve_triggers(normalize(BigAnd(tuple(models))), triggers or {})
    return PlantModels(
        model=model,
        comm_graph=graph_from_model(model, COMM_GRAPH_OWNER),
        site_graph=graph_from_model(model, SITE_GRAPH_OWNER),
        device_map=dict(DEFAULT_DEVICE_MAP if device_map is None else device_map),
        radius=radius,
    )


def _clock_text(t: int) -> str:
    return format_clock(t) if t < SECONDS_PER_DAY else f"tick {t}"


def _reachable(g: TimeIndexedGraph, a: str, b: str, t: int) -> bool:
    try:
        return connected(g, a, b, t)
    except UnknownNode:
        return False


def _connectivity_report(e: EventRecord, models: PlantModels):
    node = models.device_map.get(e.subject_owner, e.subject_owner)
    at_hub = _reachable(models.comm_graph, models.gateway, node, e.tick)
    parts = [f"{node} {'reachable' if at_hub else 'unreachable'} from {models.gateway} at {_clock_text(e.tick)}"]
    for center in models.service_centers:
        remote = at_hub and _reachable(models.site_graph, models.site_node, center, e.tick)
        parts.append(f"{center}: {'reachable' if remote else 'unreachable'}")
    return node, at_hub, "; ".join(parts)


def handle(e: EventRecord, models: PlantModels, state: SharedState,
           target: str = "workstation") -> DisplayCommand:
    """
    Build the display for one admitted event and record it in the shared state.

    Panels: the incident summary, the devices near the subject at the event tick,
    and whether the subject's node and the remote service centers are reachable.
    A model error yields one Diagnostic panel instead.
    """
    try:
        nearby = check(NearbyDevices(e.subject_owner, e.tick, models.radius), [models.model])
    except PlantSpaceError as exc:
        summary = str(exc)
        logger.warning("Event %s: %s", e.id, summary)
        state.append(e, summary)
        return DisplayCommand(target, (Panel("Diagnostic", summary, (e.subject_owner,)),))

    node, at_hub, connectivity = _connectivity_report(e, models)
    related = ", ".join(nearby.related) if nearby.related else "none"
    panels = (
        Panel("Incident",
              f"{e.kind} on {e.subject_owner} reported by {e.source_device} "
              f"at {_clock_text(e.tick)} (tick {e.tick}), priority {e.priority}",
              (e.subject_owner,)),
        Panel("Nearby devices", f"within {models.radius} cells at tick {e.tick}: {related}", nearby.related),
        Panel("Connectivity", connectivity, (e.subject_owner,)),
    )
    summary = f"{e.kind} on {e.subject_owner}: nearby {related}; {node} {'reachable' if at_hub else 'unreachable'}"
    state.record(e, summary, owner=e.subject_owner, status=e.kind)
    return DisplayCommand(target, panels)


# Pipeline

@dataclass
class PipelineResult:
    batch: QueuedBatch
    outputs: List[Tuple[str, str]] = field(default_factory=list)
    suppressed: List[str] = field(default_factory=list)

    @property
    def documents(self) -> List[str]:
        return [document for _, document in self.outputs]


class Pipeline:
    """ingest -> confidence gate -> per-owner handlers -> XML, over one shared state."""

    def __init__(self, models: PlantModels, state: Optional[SharedState] = None, k: int = 1,
                 window: int = 60, workers: int = 4, target: str = "workstation",
                 horizon: Optional[int] = None):
        self.models = models
        self.state = state if state is not None else SharedState()
        self.k = k
        self.window = window
        self.workers = max(1, workers)
        self.target = target
        self.horizon = horizon

    def _handle_group(self, events: Sequence[EventRecord]) -> List[Tuple[str, str]]:
        return [(e.id, emit_xml(handle(e, self.models, self.state, self.target))) for e in events]

    def run(self, items: Iterable[RawEvent]) -> PipelineResult:
        batch = ingest(items, self.horizon)
        result = PipelineResult(batch)

        admitted = []
        for e in batch.events:
            if confidence_gate(e, self.state, self.k, self.window, pending=admitted):
                admitted.append(e)
            else:
                self.state.append(e, "suppressed: below confidence threshold")
                result.suppressed.append(e.id)

        groups: Dict[str, List[EventRecord]] = {}
        for e in admitted:
            groups.setdefault(e.subject_owner, []).append(e)

        documents = {}
        if self.workers > 1 and len(groups) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                for outputs in pool.map(self._handle_group, groups.values()):
                    documents.update(outputs)
        else:
            for events in groups.values():
                documents.update(self._handle_group(events))

        result.outputs = [(e.id, documents[e.id]) for e in admitted]
        logger.info("Handled %d events (%d suppressed, %d dead letters)",
                    len(admitted), len(result.suppressed), len(batch.dead_letters))
        return result
