"""Link budget: path loss, shadowing, per-tone fading and thermal noise."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import AntennaPattern, antenna_gain
from .streams import substream

BOLTZMANN = 1.380649e-23  # J/K
SHADOWING_SIGMA_DB = 8.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(p_dbm: float) -> float:
    return float(10.0 ** ((p_dbm - 30.0) / 10.0))


def watts_to_dbm(p_w: float) -> float:
    return float(10.0 * np.log10(p_w) + 30.0)


def path_loss(d):
    """Macro-cell path loss in dB for distance ``d`` in meters (d >= 35)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 35.0 - 1e-9):
        raise ValueError(f"path loss model is valid for d >= 35 m, got {d.min():.3f} m")
    pl = 128.1 + 37.6 * np.log10(d / 1000.0)
    return float(pl) if pl.ndim == 0 else pl


def noise_power(temperature: float, bandwidth: float) -> float:
    """Thermal noise k*T*B in watts."""
    return BOLTZMANN * temperature * bandwidth


@dataclass(frozen=True, eq=False)
class LinkRealization:
    tx: int
    rx: int
    path_loss_db: float
    shadowing_db: float
    tx_gain_db: float
    fading: np.ndarray  # complex, unit mean power, one entry per tone

    @property
    def large_scale_db(self) -> float:
        return self.tx_gain_db - self.path_loss_db + self.shadowing_db

    @property
    def power_gain(self) -> np.ndarray:
        """Composite linear power gain per tone."""
        return db_to_linear(self.large_scale_db) * np.abs(self.fading) ** 2

    @property
    def mean_power_gain(self) -> float:
        return float(np.mean(self.power_gain))

    @property
    def amplitude(self) -> np.ndarray:
        """Complex amplitude gain per tone."""
        return np.sqrt(db_to_linear(self.large_scale_db)) * self.fading

    def with_tx_gain(self, tx_gain_db: float) -> "LinkRealization":
        return LinkRealization(self.tx, self.rx, self.path_loss_db, self.shadowing_db,
                               tx_gain_db, self.fading)


def draw_shadowing(tx: int, rx: int, seed: int, sigma_db: float = SHADOWING_SIGMA_DB) -> float:
    return float(substream(seed, "shadowing", tx, rx).normal(0.0, sigma_db))


def draw_fading(tx: int, rx: int, seed: int, n_tones: int = 1, *,
                subband: int = 0, flat: bool = False) -> np.ndarray:
    """Circularly-symmetric complex Gaussian fading with unit variance per tone."""
    rng = substream(seed, "fading", tx, rx, subband)
    n = 1 if flat else n_tones
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return np.repeat(h, n_tones) if flat else h


def draw_link(tx: int, rx: int, distance: float, off_boresight: float,
              pattern: AntennaPattern | None, seed: int, *, n_tones: int = 1,
              subband: int = 0, shadowing_sigma_db: float = SHADOWING_SIGMA_DB,
              flat_fading: bool = False) -> LinkRealization:
    """One (tx, rx) link.

    Shadowing is keyed on ``(seed, tx, rx)`` and fading on
    ``(seed, tx, rx, subband)``; the same key always gives the same draw.
    ``pattern=None`` means a 0 dBi transmit antenna.
    """
    gain = 0.0 if pattern is None else antenna_gain(off_boresight, pattern)
    return LinkRealization(
        tx=tx,
        rx=rx,
        path_loss_db=path_loss(distance),
        shadowing_db=draw_shadowing(tx, rx, seed, shadowing_sigma_db),
        tx_gain_db=float(gain),
        fading=draw_fading(tx, rx, seed, n_tones, subband=subband, flat=flat_fading),
    )


def sinr_from_powers(signal: float, interference: Sequence[float], noise: float) -> float:
    denom = float(np.sum(interference)) + noise
    if signal == 0:
        return 0.0
    return signal / denom


def mean_sinr(serving: LinkRealization, interferers: Sequence[LinkRealization],
              tx_power: float, interferer_powers: Sequence[float] | float,
              noise: float) -> float:
    """Tone-averaged SINR; interferers count at full transmit power."""
    if np.isscalar(interferer_powers):
        interferer_powers = [interferer_powers] * len(interferers)
    s = serving.mean_power_gain * tx_power
    i = [link.mean_power_gain * p for link, p in zip(interferers, interferer_powers)]
    return sinr_from_powers(s, i, noise)


def shannon_rate(sinr: float) -> float:
    """log2(1 + SINR); a debugging reference only."""
    return float(np.log2(1.0 + sinr))
