"""QAM and FQAM constellations in a discrete per-tone model.

An FQAM symbol occupies a block of ``m_f`` tones.  Exactly one tone of the
block is active and carries an ``m_q``-ary QAM value; the others are silent.
Pure QAM is the ``m_f = 1`` special case.  Every constellation here has unit
mean energy per symbol vector; transmit power is applied by the link budget.

Points are stored in label order: ``points[label]`` is the symbol vector for
the integer value of the bit label.  For FQAM the label is the tone index in
natural binary followed by the Gray-coded QAM label.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .errors import ConfigurationError, UsageError

SUPPORTED_QAM_ORDERS = (2, 4, 16, 64)

Bits = Union[str, Sequence[int]]


class Modulation(str, Enum):
    QAM = "QAM"
    FQAM = "FQAM"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _pam_levels(n_levels: int) -> np.ndarray:
    """Amplitude for each Gray label of an ``n_levels``-PAM axis."""
    levels = np.empty(n_levels)
    for i in range(n_levels):
        levels[_gray(i)] = 2 * i - (n_levels - 1)
    return levels


@dataclass(frozen=True, eq=False)
class Constellation:
    m_f: int
    m_q: int
    points: np.ndarray  # (M, m_f) complex, row index = label value

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex, copy=True)
        if pts.ndim != 2 or pts.shape != (self.m_f * self.m_q, self.m_f):
            raise ConfigurationError(
                f"expected points of shape {(self.m_f * self.m_q, self.m_f)}, got {pts.shape}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return self.m_f * self.m_q

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def modulation(self) -> Modulation:
        return Modulation.QAM if self.m_f == 1 else Modulation.FQAM

    @property
    def labels(self) -> list[str]:
        n = self.bits_per_symbol
        return [format(i, f"0{n}b") if n else "" for i in range(self.order)]

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.sum(np.abs(self.points) ** 2, axis=1)))

    def active_tones(self) -> np.ndarray:
        """Index of the nonzero tone of every point."""
        return np.argmax(np.abs(self.points) > 0, axis=1)

    def __repr__(self) -> str:
        return f"Constellation(m_f={self.m_f}, m_q={self.m_q})"


def _qam_points(m_q: int) -> np.ndarray:
    if m_q not in SUPPORTED_QAM_ORDERS:
        raise ConfigurationError(
            f"unsupported QAM order m_q={m_q}; supported: {SUPPORTED_QAM_ORDERS}"
        )
    if m_q == 2:
        pts = _pam_levels(2).astype(complex)
    else:
        side = int(round(np.sqrt(m_q)))
        half_bits = int(np.log2(side))
        axis = _pam_levels(side)
        labels = np.arange(m_q)
        pts = axis[labels >> half_bits] + 1j * axis[labels & (side - 1)]
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def build_qam(m_q: int) -> Constellation:
    """Unit-energy Gray-labelled square QAM (``m_q = 2`` is BPSK on the real axis)."""
    return Constellation(1, m_q, _qam_points(m_q)[:, None])


def build_fqam(m_f: int, m_q: int) -> Constellation:
    """``(m_f, m_q)``-FQAM: one active tone of ``m_f`` carrying an ``m_q``-QAM value."""
    if not isinstance(m_f, (int, np.integer)) or not _is_power_of_two(int(m_f)):
        raise ConfigurationError(f"tone count m_f={m_f} must be a power of 2")
    qam = _qam_points(m_q)
    points = np.zeros((m_f * m_q, m_f), dtype=complex)
    for tone in range(m_f):
        points[tone * m_q:(tone + 1) * m_q, tone] = qam
    return Constellation(int(m_f), m_q, points)


def build(modulation: Modulation | str, m_f: int, m_q: int) -> Constellation:
    if Modulation(modulation) is Modulation.QAM:
        return build_qam(m_q)
    return build_fqam(m_f, m_q)


def _label_value(c: Constellation, bits: Bits) -> int:
    if isinstance(bits, str):
        chars = bits
        if any(ch not in "01" for ch in chars):
            raise UsageError(f"bit string may only contain 0/1, got {bits!r}")
        values = [int(ch) for ch in chars]
    else:
        values = [int(b) for b in bits]
        if any(b not in (0, 1) for b in values):
            raise UsageError(f"bits must be 0/1, got {list(bits)!r}")
    if len(values) != c.bits_per_symbol:
        raise UsageError(
            f"{c!r} carries {c.bits_per_symbol} bits per symbol, got {len(values)}"
        )
    label = 0
    for b in values:
        label = (label << 1) | b
    return label


def modulate(c: Constellation, bits: Bits) -> np.ndarray:
    """Symbol vector (length ``m_f``) carrying ``bits``."""
    return c.points[_label_value(c, bits)].copy()


def ml_detect(c: Constellation, y, noise_var: float) -> str:
    """Minimum-distance label for the received block ``y``.

    With i.i.d. Gaussian noise this is the ML decision, so ``noise_var`` does
    not change the result; it is validated only.  Ties go to the lowest label.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.shape[0] != c.m_f:
        raise UsageError(f"received block has {y.shape[0]} tones, constellation has {c.m_f}")
    if not noise_var > 0:
        raise UsageError(f"noise_var must be positive, got {noise_var}")
    d = np.sum(np.abs(c.points - y) ** 2, axis=1)
    dmin = d.min()
    label = int(np.flatnonzero(d <= dmin * (1 + 1e-12) + 1e-15)[0])
    return c.labels[label]


def per_tone_spectral_efficiency(c: Constellation) -> float:
    return float(np.log2(c.order) / c.m_f)


def min_distance(c: Constellation) -> float:
    diff = c.points[:, None, :] - c.points[None, :, :]
    d = np.sqrt(np.sum(np.abs(diff) ** 2, axis=2))
    return float(d[~np.eye(c.order, dtype=bool)].min()) if c.order > 1 else np.inf
