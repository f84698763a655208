"""Constellation-constrained mutual information under finite-mixture interference.

The received block on the victim's tones is

    y = g * x + sum_j i_j + n

where ``x`` is the victim symbol vector, ``i_j`` is aggressor ``j``'s symbol
vector seen through its own channel and ``n`` is circular Gaussian noise.
Conditioned on ``x`` the density of ``y`` is an exact finite Gaussian mixture
with one component per joint choice of aggressor symbols, so the Monte Carlo
estimate of I(X;Y) below has no modelling bias beyond the sample average.

Transmit power is specified per tone.  A symbol spanning ``m_f`` tones has unit
mean energy in the constellation, so it is sent with amplitude
``sqrt(power * m_f)``: an FQAM transmitter concentrates the energy of the whole
block on its single active tone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .channel import LinkRealization
from .errors import ConfigurationError, UsageError
from .modem import Constellation, Modulation
from .streams import substream

DEFAULT_AGGRESSOR_CAP = 4
_LN2 = np.log(2.0)
_CHUNK_ELEMENTS = 4_000_000

Gain = Union[LinkRealization, np.ndarray, complex, float]
Transmitter = Tuple[Gain, Constellation, float]


def _amplitude(gain: Gain) -> np.ndarray:
    if isinstance(gain, LinkRealization):
        return np.asarray(gain.amplitude, dtype=complex)
    return np.atleast_1d(np.asarray(gain, dtype=complex))


def tx_amplitude(power: float, c: Constellation) -> float:
    """Symbol amplitude for per-tone transmit power ``power``."""
    return float(np.sqrt(power * c.m_f))


@dataclass(frozen=True, eq=False)
class AggressorTerm:
    """Interference from one aggressor: equiprobable received vectors."""

    offsets: np.ndarray  # (M_j, T) complex
    probs: np.ndarray  # (M_j,)

    @property
    def power(self) -> np.ndarray:
        """Mean received power per tone."""
        return self.probs @ (np.abs(self.offsets) ** 2)


@dataclass(frozen=True, eq=False)
class InterferenceMixture:
    signal_gain: np.ndarray  # (T,) complex amplitude applied to the victim symbol
    terms: tuple = ()
    noise_var: np.ndarray = field(default=None)  # (T,) per-tone complex noise variance

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.signal_gain, dtype=complex))
        object.__setattr__(self, "signal_gain", g)
        nv = np.broadcast_to(np.asarray(self.noise_var, dtype=float), g.shape).copy()
        if np.any(nv <= 0):
            raise UsageError("noise variance must be positive on every tone")
        object.__setattr__(self, "noise_var", nv)
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def n_tones(self) -> int:
        return self.signal_gain.shape[0]

    @property
    def n_aggressors(self) -> int:
        return len(self.terms)

    @property
    def n_components(self) -> int:
        return int(np.prod([len(t.probs) for t in self.terms], dtype=np.int64))

    def components(self, merge: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Joint ``(probabilities (K,), offsets (K, T))`` over all aggressor symbols.

        ``merge=True`` collapses components with identical offsets, which is
        lossless and much smaller for single-tone views of FQAM aggressors.
        """
        probs = np.ones(1)
        offsets = np.zeros((1, self.n_tones), dtype=complex)
        for term in self.terms:
            t_probs, t_offs = term.probs, term.offsets
            if merge:
                t_probs, t_offs = _merge(t_probs, t_offs)
            offsets = (offsets[:, None, :] + t_offs[None, :, :]).reshape(-1, self.n_tones)
            probs = np.outer(probs, t_probs).ravel()
            if merge:
                probs, offsets = _merge(probs, offsets)
        return probs, offsets

    def interference_power(self) -> np.ndarray:
        return sum((t.power for t in self.terms), np.zeros(self.n_tones))


def _merge(probs: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    key = np.ascontiguousarray(offsets).view(np.float64).reshape(len(offsets), -1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    merged = np.bincount(inverse.ravel(), weights=probs, minlength=len(uniq))
    return merged, uniq.view(complex).reshape(len(uniq), -1)


def build_mixture(victim: Transmitter, aggressors: Sequence[Transmitter], noise_var,
                  *, cap: int = DEFAULT_AGGRESSOR_CAP, tone: int | None = None
                  ) -> InterferenceMixture:
    """Interference-plus-noise mixture seen by ``victim``.

    ``victim`` and each aggressor are ``(gain, constellation, per-tone power)``
    where ``gain`` is a link or an array of per-tone complex amplitudes.  All
    transmitters are tone-aligned.  Without ``tone`` the victim observes its
    whole symbol block and every aggressor must use the same block length.
    With ``tone=t`` a single-tone (QAM) victim observes tone ``t`` only and each
    aggressor contributes the projection of its symbols onto that tone.

    Only the ``cap`` strongest aggressors are enumerated; the rest are folded
    into the Gaussian noise with matched per-tone power.
    """
    v_gain, v_const, v_power = victim
    v_amp = _amplitude(v_gain)
    if tone is None:
        if len(v_amp) != v_const.m_f:
            raise ConfigurationError(
                f"victim gain covers {len(v_amp)} tones, constellation block is {v_const.m_f}"
            )
        signal = v_amp * tx_amplitude(v_power, v_const)
        n_tones = v_const.m_f
    else:
        if v_const.m_f != 1:
            raise ConfigurationError("single-tone view requires a QAM victim")
        signal = v_amp[[tone]] * tx_amplitude(v_power, v_const)
        n_tones = 1

    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), (n_tones,)).copy()
    terms = []
    for a_gain, a_const, a_power in aggressors:
        amp = _amplitude(a_gain)
        scale = tx_amplitude(a_power, a_const)
        if tone is None:
            if a_const.m_f != n_tones or len(amp) != n_tones:
                raise ConfigurationError(
                    f"aggressor block of {a_const.m_f} tones does not match victim block of {n_tones}"
                )
            offsets = a_const.points * amp * scale
        else:
            if tone >= len(amp):
                raise ConfigurationError(f"tone {tone} outside aggressor gain of {len(amp)} tones")
            column = a_const.points[:, tone % a_const.m_f]
            offsets = (column * amp[tone] * scale)[:, None]
        terms.append(AggressorTerm(offsets, np.full(a_const.order, 1.0 / a_const.order)))

    if len(terms) > cap:
        order = sorted(range(len(terms)), key=lambda j: -float(np.mean(terms[j].power)))
        keep = sorted(order[:cap])
        for j in order[cap:]:
            nv = nv + terms[j].power
        terms = [terms[j] for j in keep]
    return InterferenceMixture(signal, tuple(terms), nv)


def mi_samples(c: Constellation, mix: InterferenceMixture, n_samples: int,
               seed: int) -> np.ndarray:
    """Per-sample information densities log2 p(y|x)/p(y) (their mean estimates I(X;Y))."""
    if c.order < 1 or len(c.points) == 0:
        raise UsageError("empty constellation")
    if c.m_f != mix.n_tones:
        raise UsageError(f"constellation spans {c.m_f} tones, mixture {mix.n_tones}")
    if n_samples < 1:
        raise UsageError(f"n_samples must be >= 1, got {n_samples}")
    M, T = c.order, mix.n_tones
    probs, offsets = mix.components(merge=True)
    K = len(probs)

    rng = substream(seed, "mi")
    x_idx = (rng.integers(M) + np.arange(n_samples)) % M
    cum = np.cumsum(probs)
    k_idx = np.minimum(np.searchsorted(cum, rng.random(n_samples) * cum[-1], side="right"), K - 1)
    z = (rng.standard_normal((n_samples, T)) + 1j * rng.standard_normal((n_samples, T))) / np.sqrt(2)

    sig = c.points * mix.signal_gain
    std = np.sqrt(mix.noise_var)
    y = (sig[x_idx] + offsets[k_idx]) / std + z

    means = ((sig[:, None, :] + offsets[None, :, :]) / std).reshape(M * K, T)
    bias = np.tile(np.log(probs), M) - np.sum(np.abs(means) ** 2, axis=1)
    means_h = means.conj().T

    out = np.empty(n_samples)
    chunk = max(1, _CHUNK_ELEMENTS // (M * K))
    for start in range(0, n_samples, chunk):
        sl = slice(start, start + chunk)
        ll = (2.0 * (y[sl] @ means_h).real + bias).reshape(-1, M, K)
        per_x = _logsumexp(ll, axis=2)
        num = per_x[np.arange(per_x.shape[0]), x_idx[sl]]
        den = _logsumexp(per_x, axis=1) - np.log(M)
        out[sl] = (num - den) / _LN2
    return out


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def mutual_information(c: Constellation, mix: InterferenceMixture, n_samples: int,
                       seed: int) -> float:
    """Monte Carlo I(X;Y) in bits per symbol, clipped to [0, log2 M]."""
    val = float(np.mean(mi_samples(c, mix, n_samples, seed)))
    return min(max(val, 0.0), float(np.log2(c.order)))


def mutual_information_with_error(c: Constellation, mix: InterferenceMixture,
                                  n_samples: int, seed: int) -> tuple[float, float]:
    """Unclipped MI estimate and its Monte Carlo standard error."""
    s = mi_samples(c, mix, n_samples, seed)
    return float(s.mean()), float(s.std(ddof=1) / np.sqrt(len(s))) if len(s) > 1 else 0.0


def user_rate(mi: float, bandwidth: float, m_f: int) -> float:
    """Throughput in bit/s: bandwidth * (bits per symbol) / (tones per symbol)."""
    return bandwidth * mi / m_f


def sample_interference(mix: InterferenceMixture, n_samples: int, seed: int,
                        tone: int | None = None) -> np.ndarray:
    """Draws of interference plus noise, aggressors sampled independently."""
    rng = substream(seed, "interference")
    T = mix.n_tones
    z = (rng.standard_normal((n_samples, T)) + 1j * rng.standard_normal((n_samples, T))) / np.sqrt(2)
    total = z * np.sqrt(mix.noise_var)
    for term in mix.terms:
        idx = rng.choice(len(term.probs), size=n_samples, p=term.probs)
        total = total + term.offsets[idx]
    return total if tone is None else total[:, tone]


def excess_kurtosis(mix: InterferenceMixture, tone: int = 0, n_samples: int = 1_000_000,
                    seed: int = 0) -> float:
    """Sample excess kurtosis of the real part of interference plus noise on ``tone``.

    Zero for Gaussian interference; large positive values mean impulsive,
    heavy-tailed interference.
    """
    x = sample_interference(mix, n_samples, seed, tone).real
    x = x - x.mean()
    m2 = np.mean(x ** 2)
    return float(np.mean(x ** 4) / m2 ** 2 - 3.0)


@dataclass(frozen=True)
class RateSample:
    ue_id: int
    modulation: Modulation
    mi_bits: float
    rate_bps: float
    sinr_db: float
    n_aggressors: int
    drop: int = 0
    cell: int = -1
    kind: str = ""
