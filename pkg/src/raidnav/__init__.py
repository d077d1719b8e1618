"""Skid-steer navigation and control: adaptive barrier velocity control,
pure-pursuit path following, LiDAR-odometry geometry and a simulation harness."""

__version__ = "0.1.0"

from .config import RunConfig, default_config, load_config  # noqa: E402
from .scenario import RunRecord, run_scenario  # noqa: E402

__all__ = ["RunConfig", "RunRecord", "default_config", "load_config", "run_scenario", "__version__"]
