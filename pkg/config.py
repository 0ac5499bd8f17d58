import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Grounding defaults
DEFAULT_RESOLUTION = int(os.environ.get("PLANTSPACE_RESOLUTION", "1"))
DEFAULT_HORIZON = int(os.environ.get("PLANTSPACE_HORIZON", "86399"))

# Output and solving
OUTPUT_FORMAT = os.environ.get("PLANTSPACE_FORMAT", "text")
SAT_SOLVER = os.environ.get("PLANTSPACE_SAT_SOLVER", "builtin")
LOG_LEVEL = os.environ.get("PLANTSPACE_LOG_LEVEL", "INFO")

# Event pipeline
HANDLER_WORKERS = int(os.environ.get("PLANTSPACE_WORKERS", "4"))
DISPLAY_TARGET = os.environ.get("PLANTSPACE_DISPLAY_TARGET", "workstation")
DISPLAY_TARGETS = ["workstation", "mobile", "wall"]
NEARBY_RADIUS = int(os.environ.get("PLANTSPACE_NEARBY_RADIUS", "5"))
CONFIDENCE_K = int(os.environ.get("PLANTSPACE_CONFIDENCE_K", "1"))
CONFIDENCE_WINDOW = int(os.environ.get("PLANTSPACE_CONFIDENCE_WINDOW", "60"))

# Well-known owners and nodes of the plant models
COMM_GRAPH_OWNER = "midlevelcommgraph"
SITE_GRAPH_OWNER = "sitecommgraph"
INFLUENCE_GRAPH_OWNER = "physicalinfluencegraph"
GATEWAY_NODE = "ComHub"
SITE_NODE = "ManufacturingSite"
SERVICE_CENTERS = ["ServiceCenter1", "ServiceCenter2"]
TRAJECTORY_EVENT = "ConvAct"

# Geometric owner -> communication node
DEFAULT_DEVICE_MAP = {
    "Robot2_Space": "Robot2",
    "WorkPiece_Space": "ConvBelt",
}

# Default scenario settings (belt speed and robot path are our own choices)
DEFAULT_SCENARIO = {
    "belt_speed": 1,
    "workpiece_width": 20,
    "workpiece_y": (100, 120),
    "trajectory_ticks": 100,
    "sensor_grid": (2, 2, 10, 6),
    "seed": 0,
}

FIXTURES_DIR = Path(os.environ.get("PLANTSPACE_FIXTURES", Path(__file__).resolve().parent / "fixtures"))
