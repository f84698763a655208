"""Simulation configuration: dataclass defaults plus a strict YAML loader."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..errors import ConfigurationError
from ..modem import SUPPORTED_QAM_ORDERS

SCENARIOS = ("space", "frequency")
MODES = ("all_qam", "hybrid")
FADING_MODELS = ("iid", "flat")
QAM_INTERFERENCE_MODELS = ("gaussian", "exact")


@dataclass
class FqamConfig:
    m_f: int = 4
    m_q: int = 4


@dataclass
class ThresholdConfig:
    gamma_th_db: float = 0.0
    n_th: int = 3


@dataclass
class ServiceConfig:
    lspl: int = 0
    rm: float = 0.6


@dataclass
class MonteCarloConfig:
    n_drops: int = 1000
    mi_samples: int = 64
    seed: int = 1


@dataclass
class SimConfig:
    scenario: str = "space"
    mode: str = "all_qam"
    n_cells: int = 21
    isd: float = 1732.0
    bs_power_dbm: float = 43.0
    ue_bandwidth: float = 20e6
    users_per_cell: int = 2
    noise_temperature: float = 300.0
    beam_phi_3db: float = float(np.pi / 4)
    omni_gain_db: float = 14.0
    fqam: FqamConfig = field(default_factory=FqamConfig)
    qam_m_q: int = 16
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    rho: float = 0.5
    mc: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    aggressor_cap: int = 2
    aggressor_margin_db: float = 0.0
    shadowing_sigma_db: float = 8.0
    fading: str = "iid"
    qam_interference: str = "gaussian"

    @property
    def system_bandwidth(self) -> float:
        """Total band in the frequency scenario: one UE allocation per user slot."""
        return self.ue_bandwidth * self.users_per_cell

    def validate(self) -> "SimConfig":
        checks = [
            ("scenario", self.scenario in SCENARIOS, f"one of {SCENARIOS}"),
            ("mode", self.mode in MODES, f"one of {MODES}"),
            ("n_cells", self.n_cells >= 1, ">= 1"),
            ("isd", self.isd > 0, "> 0"),
            ("ue_bandwidth", self.ue_bandwidth > 0, "> 0"),
            ("users_per_cell", self.users_per_cell >= 1, ">= 1"),
            ("noise_temperature", self.noise_temperature > 0, "> 0"),
            ("beam_phi_3db", 0 < self.beam_phi_3db <= 2 * np.pi + 1e-12, "in (0, 2*pi]"),
            ("fqam.m_f", self.fqam.m_f >= 1 and self.fqam.m_f & (self.fqam.m_f - 1) == 0,
             "a power of 2"),
            ("fqam.m_q", self.fqam.m_q in SUPPORTED_QAM_ORDERS, f"one of {SUPPORTED_QAM_ORDERS}"),
            ("qam_m_q", self.qam_m_q in SUPPORTED_QAM_ORDERS, f"one of {SUPPORTED_QAM_ORDERS}"),
            ("thresholds.n_th", self.thresholds.n_th >= 1, ">= 1"),
            ("service.rm", 0.0 <= self.service.rm <= 1.0, "in [0, 1]"),
            ("rho", 0.0 < self.rho < 1.0, "in (0, 1)"),
            ("mc.n_drops", self.mc.n_drops >= 1, ">= 1"),
            ("mc.mi_samples", self.mc.mi_samples >= 1, ">= 1"),
            ("mc.seed", self.mc.seed >= 0, ">= 0"),
            ("aggressor_cap", self.aggressor_cap >= 0, ">= 0"),
            ("shadowing_sigma_db", self.shadowing_sigma_db >= 0, ">= 0"),
            ("fading", self.fading in FADING_MODELS, f"one of {FADING_MODELS}"),
            ("qam_interference", self.qam_interference in QAM_INTERFERENCE_MODELS,
             f"one of {QAM_INTERFERENCE_MODELS}"),
        ]
        for key, ok, expected in checks:
            if not ok:
                raise ConfigurationError(f"{key}: value {_get(self, key)!r} out of range, expected {expected}")
        return self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "SimConfig":
        """Copy with top-level or dotted-path fields changed, e.g. ``**{"mc.seed": 3}``."""
        data = self.to_dict()
        for path, value in changes.items():
            node = data
            *parents, leaf = path.split(".")
            for p in parents:
                node = node[p]
            node[leaf] = value
        return from_dict(data)


def _get(cfg, dotted: str):
    for part in dotted.split("."):
        cfg = getattr(cfg, part)
    return cfg


def _normalize_token(value):
    return value.replace("-", "_") if isinstance(value, str) else value


def _build(cls, data: dict, prefix: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{prefix or '<root>'}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in fields:
            raise ConfigurationError(f"{path}: unknown configuration key")
        default = fields[key].default_factory() if fields[key].default is dataclasses.MISSING \
            else fields[key].default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value or {}, path + ".")
        else:
            kwargs[key] = _coerce(value, default, path)
    return cls(**kwargs)


def _coerce(value, default, path: str):
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if isinstance(default, str):
            if not isinstance(value, str):
                raise TypeError
            return _normalize_token(value)
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"{path}: expected {type(default).__name__}, got {value!r}") from None
    return value


def from_dict(data: dict | None) -> SimConfig:
    return _build(SimConfig, data or {}, "").validate()


def load_config(path: str | Path) -> SimConfig:
    """Parse a YAML key-value config; missing keys take defaults, unknown keys fail."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: cannot parse config: {exc}") from exc
    return from_dict(data)
