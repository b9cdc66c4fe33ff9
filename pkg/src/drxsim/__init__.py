"""Connected-mode DRX simulator for blockage-prone mmWave and THz links."""

__version__ = "0.1.0"

from .config import ConfigError, ScenarioConfig, band_config  # noqa: E402

__all__ = ["ConfigError", "ScenarioConfig", "band_config", "__version__"]
