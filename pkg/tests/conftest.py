# tests/conftest.py
"""
Configuration file for pytest.
This allows sharing fixtures between test files when using pytest.
"""

import os
import sys

import pytest

# Make the top-level packages (config, models, utils, ui) importable
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import FIXTURES_DIR
from utils.file_operations import load_model, read_event_log


@pytest.fixture
def fixtures_dir():
    """Directory of the bundled models, event log and goldens."""
    return FIXTURES_DIR


@pytest.fixture
def comm_model():
    """The interval-scheduled communication graph, transcribed in :: / Nil syntax."""
    return load_model(FIXTURES_DIR / "comm_model.bsd")


@pytest.fixture
def trajectory_model():
    """Robot 2 and workpiece occupancy, one event-relative box per tick 0..100."""
    return load_model(FIXTURES_DIR / "trajectory_default.bsd")


@pytest.fixture
def demo_lines():
    """Raw lines of the bundled demo event log."""
    return read_event_log(FIXTURES_DIR / "demo_events.ndlog")
