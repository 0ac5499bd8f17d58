"""
Generators for the manufacturing-plant example: the mid-level communication
schedule, the site-level graphs, the sensor grid and the robot/workpiece
trajectory abstraction.
"""

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Sequence, Tuple

from config import COMM_GRAPH_OWNER, INFLUENCE_GRAPH_OWNER, SITE_GRAPH_OWNER, TRAJECTORY_EVENT
from models.geometry import Box, Circle, Region
from models.invariant import (
    BigAnd, Edge, EventRelativeTime, Implies, Invariant, OccupyBox, OccupyCircle, Owner,
    TimeInterval, TimeStamp,
)
from models.temporal import gmt_day_tick
from models.topology import TimeIndexedGraph, complete_graph, graph_from_model
from utils.file_operations import save_model

logger = logging.getLogger(__name__)

ROBOT_OWNER = "Robot2_Space"
WORKPIECE_OWNER = "WorkPiece_Space"

# (start clock, end clock, hub peers); the hub links are shut down in the evening
COMM_SCHEDULE = [
    ((0, 0, 0), (23, 30, 59), ["Robot1", "Robot2", "Robot3", "Store", "ConvBelt"]),
    ((23, 31, 0), (23, 45, 59), ["Robot1", "Robot2", "Robot3", "Store"]),
    ((23, 46, 0), (23, 59, 59), ["Robot1", "Store", "ConvBelt"]),
]

SITE_EDGES = [("ServiceCenter1", "ManufacturingSite"), ("ServiceCenter2", "ManufacturingSite")]
INFLUENCE_EDGES = [("Robot1", "ConvBelt"), ("Robot2", "ConvBelt"), ("Robot3", "ConvBelt"), ("Robot1", "Store")]


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Parameters of the example plant.

    The workpiece width and y-band are the plant's published constants; the
    belt speed and the robot path are our own choices.
    """
    belt_speed: int = 1
    workpiece_width: int = 20
    workpiece_y: Tuple[int, int] = (100, 120)
    trajectory_ticks: int = 100
    sensor_grid: Tuple[int, int, int, int] = (2, 2, 10, 6)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "workpiece_y", tuple(self.workpiece_y))
        object.__setattr__(self, "sensor_grid", tuple(self.sensor_grid))
        if self.belt_speed < 1:
            raise ValueError(f"belt_speed must be positive, got {self.belt_speed}")
        if self.workpiece_width < 1:
            raise ValueError(f"workpiece_width must be positive, got {self.workpiece_width}")
        if self.workpiece_y[0] > self.workpiece_y[1]:
            raise ValueError(f"workpiece_y band is inverted: {self.workpiece_y}")
        if self.trajectory_ticks < 0:
            raise ValueError(f"trajectory_ticks must be >= 0, got {self.trajectory_ticks}")
        rows, cols, spacing, sensing_range = self.sensor_grid
        if rows < 1 or cols < 1 or spacing < 1 or sensing_range < 0:
            raise ValueError(f"invalid sensor grid {self.sensor_grid}")


# Communication and site topology

def build_comm_model() -> Invariant:
    """The interval-scheduled star topology around the communication hub."""
    slices = []
    for start, end, peers in COMM_SCHEDULE:
        edges = BigAnd(tuple(Edge("ComHub", peer) for peer in peers))
        slices.append(Implies(TimeInterval(gmt_day_tick(*start), gmt_day_tick(*end)), edges))
    return Implies(Owner(COMM_GRAPH_OWNER), BigAnd(tuple(slices)))


def build_site_model() -> Invariant:
    """The untimed site-level communication and physical-influence layers as one model."""
    return BigAnd((
        Implies(Owner(SITE_GRAPH_OWNER), BigAnd(tuple(Edge(a, b) for a, b in SITE_EDGES))),
        Implies(Owner(INFLUENCE_GRAPH_OWNER), BigAnd(tuple(Edge(a, b) for a, b in INFLUENCE_EDGES))),
    ))


def build_site_graphs() -> Tuple[TimeIndexedGraph, TimeIndexedGraph]:
    """Return (site communication graph, physical-influence graph), both valid for all time."""
    model = build_site_model()
    return graph_from_model(model, SITE_GRAPH_OWNER), graph_from_model(model, INFLUENCE_GRAPH_OWNER)


# Trajectories

def move_work_piece(t: int, cfg: ScenarioConfig) -> Box:
    """Workpiece box on the belt; outside 0 < t < 1000 the degenerate box at the origin."""
    if 0 < t < 1000:
        x = cfg.belt_speed * t
        return Box(x, cfg.workpiece_y[0], x + cfg.workpiece_width, cfg.workpiece_y[1])
    return Box(0, 0, 0, 0)


def default_robot_path(t: int) -> Box:
    """
    Robot 2 reaching onto the belt: approach from above (t < 40), dwell inside
    the belt band (40..60), then retreat.
    """
    if t < 40:
        return Box(30, 160 - t, 50, 180 - t)
    if t <= 60:
        return Box(30, 110, 50, 130)
    return Box(30, 121 + (t - 61), 50, 141 + (t - 61))


def _occupy(event: str, t: int, box: Box) -> Invariant:
    return Implies(TimeStamp(EventRelativeTime(event, t)), OccupyBox(box.x1, box.y1, box.x2, box.y2))


def build_trajectory_model(cfg: ScenarioConfig = ScenarioConfig(),
                           robot_path: Callable[[int], Region] = default_robot_path) -> Invariant:
    """
    One event-relative occupancy fact per tick 0..trajectory_ticks for each owner.

    Facts are prepended while iterating, so each owner's BIGAND runs from the
    last tick down to tick 0.
    """
    robot, workpiece = [], []
    for i in range(cfg.trajectory_ticks + 1):
        robot.insert(0, _occupy(TRAJECTORY_EVENT, i, robot_path(i)))
        workpiece.insert(0, _occupy(TRAJECTORY_EVENT, i, move_work_piece(i, cfg)))
    return BigAnd((
        Implies(Owner(ROBOT_OWNER), BigAnd(tuple(robot))),
        Implies(Owner(WORKPIECE_OWNER), BigAnd(tuple(workpiece))),
    ))


# Sensors

def build_sensor_grid(cfg: ScenarioConfig) -> List[Tuple[str, Circle]]:
    """Sensors ``sensor_r_c`` at (c * spacing, r * spacing), row by row."""
    rows, cols, spacing, sensing_range = cfg.sensor_grid
    return [
        (f"sensor_{r}_{c}", Circle(c * spacing, r * spacing, sensing_range))
        for r in range(rows)
        for c in range(cols)
    ]


def build_sensor_model(cfg: ScenarioConfig) -> Invariant:
    return BigAnd(tuple(
        Implies(Owner(name), OccupyCircle(circle.cx, circle.cy, circle.r))
        for name, circle in build_sensor_grid(cfg)
    ))


def sensor_comm_graph(cfg: ScenarioConfig) -> TimeIndexedGraph:
    """Wireless sensors talk to each other directly, independent of physical links."""
    return complete_graph(name for name, _ in build_sensor_grid(cfg))


# Events and fixtures

EVENT_KINDS = ["malfunction", "sensor_alarm", "maintenance"]


def generate_events(cfg: ScenarioConfig, n: int, owners: Sequence[str], horizon: int = 86399) -> List[dict]:
    """A seeded stream of ``n`` raw alarm records spread over ``owners``."""
    rng = random.Random(cfg.seed)
    events = []
    for i in range(n):
        owner = owners[rng.randrange(len(owners))]
        events.append({
            "id": f"evt-{i:05d}",
            "source_device": f"device_{rng.randrange(8)}",
            "kind": EVENT_KINDS[rng.randrange(len(EVENT_KINDS))],
            "subject_owner": owner,
            "tick": rng.randint(0, horizon),
            "priority": rng.randint(0, 9),
            "payload": {},
        })
    return events


def write_fixtures(out_dir, cfg: ScenarioConfig = ScenarioConfig()) -> List[Path]:
    """Write the bundled plant models as .bsd files and return their paths."""
    out_dir = Path(out_dir)
    written = [
        save_model(build_comm_model(), out_dir / "comm_model.bsd", clock=True),
        save_model(build_site_model(), out_dir / "site_graphs.bsd"),
        save_model(build_trajectory_model(cfg), out_dir / "trajectory_default.bsd"),
        save_model(build_sensor_model(cfg), out_dir / "sensor_grid.bsd"),
    ]
    logger.info("Wrote %d fixture models to %s", len(written), out_dir)
    return written
