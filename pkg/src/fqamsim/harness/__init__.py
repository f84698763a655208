from .campaign import MetricsReport, run_campaign, run_drop
from .config import SimConfig, load_config
from .report import emit_report

__all__ = ["MetricsReport", "SimConfig", "emit_report", "load_config", "run_campaign", "run_drop"]
