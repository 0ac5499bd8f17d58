# tests/test_config.py

import importlib.util
import os
import unittest
from pathlib import Path
from unittest.mock import patch

CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.py"


def _load_config():
    spec = importlib.util.spec_from_file_location("plantspace_config", CONFIG_PATH)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


class TestConfig(unittest.TestCase):
    """Test the configuration settings."""

    def setUp(self):
        """Set up the test by loading the config module."""
        # Dynamically load a fresh copy so environment patches take effect
        self.config = _load_config()

    def test_grounding_defaults(self):
        """Resolution and horizon default to unit cells over one GMT day."""
        with patch.dict(os.environ, {}, clear=False):
            os.environ.pop("PLANTSPACE_RESOLUTION", None)
            os.environ.pop("PLANTSPACE_HORIZON", None)
            config = _load_config()
        self.assertEqual(config.DEFAULT_RESOLUTION, 1)
        self.assertEqual(config.DEFAULT_HORIZON, 86399)

    def test_environment_overrides(self):
        """PLANTSPACE_* variables override the defaults."""
        with patch.dict(os.environ, {"PLANTSPACE_RESOLUTION": "4", "PLANTSPACE_WORKERS": "2",
                                     "PLANTSPACE_NEARBY_RADIUS": "9"}):
            config = _load_config()
        self.assertEqual(config.DEFAULT_RESOLUTION, 4)
        self.assertEqual(config.HANDLER_WORKERS, 2)
        self.assertEqual(config.NEARBY_RADIUS, 9)

    def test_display_targets(self):
        """The default display target is one of the known targets."""
        self.assertIsInstance(self.config.DISPLAY_TARGETS, list)
        self.assertIn(self.config.DISPLAY_TARGET, self.config.DISPLAY_TARGETS)

    def test_plant_names(self):
        """Well-known owners and nodes of the bundled plant."""
        self.assertEqual(self.config.COMM_GRAPH_OWNER, "midlevelcommgraph")
        self.assertEqual(self.config.GATEWAY_NODE, "ComHub")
        self.assertEqual(self.config.DEFAULT_DEVICE_MAP["Robot2_Space"], "Robot2")
        self.assertEqual(len(self.config.SERVICE_CENTERS), 2)

    def test_default_scenario(self):
        """The default scenario dictionary builds a valid ScenarioConfig."""
        from models.scenario import ScenarioConfig

        self.assertIsInstance(self.config.DEFAULT_SCENARIO, dict)
        cfg = ScenarioConfig(**self.config.DEFAULT_SCENARIO)
        self.assertEqual(cfg.sensor_grid, (2, 2, 10, 6))

    def test_fixtures_dir(self):
        """The bundled fixtures directory exists unless overridden."""
        if os.environ.get("PLANTSPACE_FIXTURES") is None:
            self.assertTrue((self.config.FIXTURES_DIR / "comm_model.bsd").exists())


if __name__ == '__main__':
    unittest.main()
