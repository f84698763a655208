"""Monte Carlo drops and campaign aggregation.

Rate model per user
-------------------
Interferers are ranked by mean received power.  Those received no more than
``aggressor_margin_db`` below the serving signal are the user's aggressors
(with the default 0 dB: every interferer at least as strong as the signal).
They set the aggressor count used by the switching rule and form the flip
group.
The ``aggressor_cap`` strongest aggressors that transmit FQAM are enumerated
exactly in the interference mixture.  Everything else is Gaussian noise of
matched per-tone power; with ``qam_interference="exact"`` QAM aggressors of a
QAM victim are enumerated as well.

All powers are normalized to the thermal noise of the user's band.
"""

from __future__ import annotations

import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial
from pathlib import Path

import numpy as np

from .. import __version__
from ..channel import db_to_linear, dbm_to_watts, draw_link, linear_to_db, noise_power
from ..geometry import (AntennaPattern, antenna_gain, bearing, build_lattice, distance,
                        drop_users, first_tier_interferers, form_beams)
from ..modem import Modulation, build_fqam, build_qam
from ..rate import RateSample, build_mixture, mutual_information, user_rate
from ..scheduler import (BeamInfo, ServiceProfile, Subband, Thresholds,
                         centralized_space_assign, classify_users, frequency_partition)
from ..streams import derive_seed, substream
from .config import SimConfig

QAM = Modulation.QAM
FQAM = Modulation.FQAM

BOOTSTRAP_RESAMPLES = 1000


class DropError(RuntimeError):
    pass


@dataclass
class _Interferer:
    key: int
    amplitude: np.ndarray  # per-tone complex amplitude, power included, noise-normalized
    power: float  # mean received power, noise-normalized


@dataclass
class _UserLinks:
    ue: int
    signal: np.ndarray  # per-tone complex amplitude, power included, noise-normalized
    interferers: list  # of _Interferer, strongest first
    aggressors: list  # keys, strongest first
    sinr_db: float
    bandwidth: float


def _rank(interferers: list[_Interferer], signal_power: float, margin_db: float):
    ranked = sorted(interferers, key=lambda i: (-i.power, i.key))
    floor = signal_power * db_to_linear(-margin_db)
    return ranked, [i.key for i in ranked if i.power >= floor]


def _sinr_db(signal_power: float, interferers: list[_Interferer]) -> float:
    return float(linear_to_db(signal_power / (1.0 + sum(i.power for i in interferers))))


class _RateEngine:
    """Per-user MI evaluation cached on the modulations that matter for it."""

    def __init__(self, cfg: SimConfig, drop_seed: int):
        self.cfg = cfg
        self.seed = drop_seed
        self.fqam = build_fqam(cfg.fqam.m_f, cfg.fqam.m_q)
        self.qam = build_qam(cfg.qam_m_q)
        self._cache: dict = {}

    def const(self, mod: Modulation):
        return self.fqam if mod is FQAM else self.qam

    def rate(self, links: _UserLinks, own: Modulation, mods: dict) -> tuple[float, float]:
        cap = self.cfg.aggressor_cap
        top = links.aggressors[:cap]
        key = (links.ue, own, tuple(mods[a] for a in top))
        if key not in self._cache:
            self._cache[key] = self._evaluate(links, own, top, mods, key)
        return self._cache[key]

    def _enumerated(self, own: Modulation, mod: Modulation) -> bool:
        if mod is FQAM:
            return True
        return own is QAM and self.cfg.qam_interference == "exact"

    def _evaluate(self, links: _UserLinks, own, top, mods, key):
        cfg = self.cfg
        n_tones = cfg.fqam.m_f
        exact = [i for i in links.interferers if i.key in top and self._enumerated(own, mods[i.key])]
        exact_keys = {i.key for i in exact}
        noise = np.ones(n_tones)
        for i in links.interferers:
            if i.key not in exact_keys:
                noise = noise + np.abs(i.amplitude) ** 2
        # amplitudes already carry per-tone power; transmitters are passed with unit power
        aggressors = [(i.amplitude, self.const(mods[i.key]), 1.0) for i in exact]
        mi_seed = derive_seed(self.seed, "mi", links.ue, int(own is FQAM),
                              *[int(m is FQAM) for m in key[2]])
        if own is FQAM:
            mix = build_mixture((links.signal, self.fqam, 1.0), aggressors, noise, cap=len(aggressors))
            mi = mutual_information(self.fqam, mix, cfg.mc.mi_samples, mi_seed)
            return mi, user_rate(mi, links.bandwidth, self.fqam.m_f)
        per_tone = -(-cfg.mc.mi_samples // n_tones)
        mis = []
        for t in range(n_tones):
            mix = build_mixture((links.signal, self.qam, 1.0), aggressors, noise[t],
                                cap=len(aggressors), tone=t)
            mis.append(mutual_information(self.qam, mix, per_tone, derive_seed(mi_seed, t)))
        mi = float(np.mean(mis))
        return mi, user_rate(mi, links.bandwidth, 1)


def _drop_context(cfg: SimConfig, drop_seed: int):
    plan = build_lattice(cfg.n_cells, cfg.isd)
    ues = drop_users(plan, cfg.users_per_cell, drop_seed)
    neighbors = {c: first_tier_interferers(plan, c) for c in range(plan.n_cells)}
    return plan, ues, neighbors


def _link(cfg, plan, cell, ue, seed, subband=0):
    return draw_link(cell, ue.ue_id, distance(plan.bs_positions[cell], ue.position), 0.0, None,
                     seed, n_tones=cfg.fqam.m_f, subband=subband,
                     shadowing_sigma_db=cfg.shadowing_sigma_db, flat_fading=cfg.fading == "flat")


def _space_drop(cfg: SimConfig, drop: int, drop_seed: int) -> list[RateSample]:
    plan, ues, neighbors = _drop_context(cfg, drop_seed)
    pattern = AntennaPattern(cfg.beam_phi_3db, cfg.omni_gain_db)
    beams = form_beams(plan, ues, pattern)
    beams_of = {c: [b for b in beams if b.serving_bs == c] for c in range(plan.n_cells)}
    noise = noise_power(cfg.noise_temperature, cfg.ue_bandwidth)
    p_beam = {c: dbm_to_watts(cfg.bs_power_dbm) / max(1, len(beams_of[c])) / noise
              for c in range(plan.n_cells)}

    users = {}
    for ue in ues:
        serving = _link(cfg, plan, ue.cell, ue, drop_seed)
        signal = serving.amplitude * np.sqrt(p_beam[ue.cell] * db_to_linear(pattern.g0))
        interferers = []
        for c in neighbors[ue.cell]:
            link = _link(cfg, plan, c, ue, drop_seed)
            toward = bearing(plan.bs_positions[c], ue.position)
            for b in beams_of[c]:
                g = db_to_linear(antenna_gain(toward - b.boresight, pattern))
                amp = link.amplitude * np.sqrt(p_beam[c] * g)
                interferers.append(_Interferer(b.beam_id, amp, float(np.mean(np.abs(amp) ** 2))))
        s_pow = float(np.mean(np.abs(signal) ** 2))
        ranked, aggressors = _rank(interferers, s_pow, cfg.aggressor_margin_db)
        users[ue.ue_id] = _UserLinks(ue.ue_id, signal, ranked, aggressors,
                                     _sinr_db(s_pow, ranked), cfg.ue_bandwidth)

    engine = _RateEngine(cfg, drop_seed)

    def oracle(assignment):
        return {u: engine.rate(users[u], assignment[u], assignment)[1] for u in users}

    if cfg.mode == "hybrid":
        table = [BeamInfo(u, users[u].sinr_db, tuple(users[u].aggressors)) for u in sorted(users)]
        th = Thresholds(cfg.thresholds.gamma_th_db, cfg.thresholds.n_th)
        profile = ServiceProfile(cfg.service.lspl, cfg.service.rm)
        result = centralized_space_assign(table, oracle, {u: profile for u in users}, th)
        assignment = result.modulation
    else:
        assignment = {u: QAM for u in users}

    out = []
    for ue in ues:
        links = users[ue.ue_id]
        mi, r = engine.rate(links, assignment[ue.ue_id], assignment)
        out.append(RateSample(ue.ue_id, assignment[ue.ue_id], mi, r, links.sinr_db,
                              len(links.aggressors), drop, ue.cell, ue.kind))
    return out


def _frequency_drop(cfg: SimConfig, drop: int, drop_seed: int) -> list[RateSample]:
    plan, ues, neighbors = _drop_context(cfg, drop_seed)
    pattern = AntennaPattern(2 * np.pi, cfg.omni_gain_db)
    g_tx = db_to_linear(pattern.g0)
    p_bs = dbm_to_watts(cfg.bs_power_dbm)
    widths = {Subband.RESERVED: cfg.rho * cfg.system_bandwidth,
              Subband.REGULAR: (1.0 - cfg.rho) * cfg.system_bandwidth}
    # constant PSD: power on a subband is proportional to its width
    p_norm = p_bs / noise_power(cfg.noise_temperature, cfg.system_bandwidth)

    links = {}
    for ue in ues:
        for c in [ue.cell] + neighbors[ue.cell]:
            for s in Subband:
                links[(c, ue.ue_id, s)] = _link(cfg, plan, c, ue, drop_seed, int(s))

    def amp(c, u, s):
        return links[(c, u, s)].amplitude * np.sqrt(p_norm * g_tx)

    wideband = {}
    for ue in ues:
        sig = np.mean([np.mean(np.abs(amp(ue.cell, ue.ue_id, s)) ** 2) for s in Subband])
        intf = sum(np.mean([np.mean(np.abs(amp(c, ue.ue_id, s)) ** 2) for s in Subband])
                   for c in neighbors[ue.cell])
        wideband[ue.ue_id] = float(linear_to_db(sig / (1.0 + intf)))
    low, _ = classify_users(wideband, cfg.thresholds.gamma_th_db)
    cell_of = {ue.ue_id: ue.cell for ue in ues}
    plan_f = frequency_partition(neighbors, cell_of, low, cfg.rho, fqam=cfg.mode == "hybrid")
    sharing = {(c, s): len(plan_f.users_on(cell_of, c, s)) for c in neighbors for s in Subband}
    mods = {(c, s): m for (c, s), m in plan_f.modulation.items()}

    engine = _RateEngine(cfg, drop_seed)
    out = []
    for ue in ues:
        s = plan_f.placement[ue.ue_id]
        signal = amp(ue.cell, ue.ue_id, s)
        interferers = [_Interferer(c, amp(c, ue.ue_id, s), 0.0)
                       for c in neighbors[ue.cell] if sharing[(c, s)] > 0]
        for i in interferers:
            i.power = float(np.mean(np.abs(i.amplitude) ** 2))
        s_pow = float(np.mean(np.abs(signal) ** 2))
        ranked, aggressors = _rank(interferers, s_pow, cfg.aggressor_margin_db)
        user = _UserLinks(ue.ue_id, signal, ranked, aggressors, _sinr_db(s_pow, ranked),
                          widths[s] / sharing[(ue.cell, s)])
        own = mods[(ue.cell, s)]
        cell_mods = {c: mods[(c, s)] for c in neighbors[ue.cell]}
        mi, r = engine.rate(user, own, cell_mods)
        out.append(RateSample(ue.ue_id, own, mi, r, user.sinr_db, len(aggressors),
                              drop, ue.cell, ue.kind))
    return out


def drop_seed(cfg: SimConfig, drop: int) -> int:
    return derive_seed(cfg.mc.seed, "drop", drop)


def run_drop(cfg: SimConfig, drop: int) -> list[RateSample]:
    """One drop; a pure function of ``(cfg, drop)``."""
    seed = drop_seed(cfg, drop)
    try:
        if cfg.scenario == "space":
            return _space_drop(cfg, drop, seed)
        return _frequency_drop(cfg, drop, seed)
    except DropError:
        raise
    except Exception as exc:
        raise DropError(f"drop {drop}: {exc}") from exc


# --------------------------------------------------------------------------
# aggregation

def percentile(values, q: float) -> float:
    return float(np.percentile(np.asarray(values, dtype=float), q, method="linear"))


def bootstrap_ci(values, stat: str, seed: int, n_resamples: int = BOOTSTRAP_RESAMPLES,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile-bootstrap interval for ``stat`` in {"p5", "mean", "p95"}."""
    x = np.asarray(values, dtype=float)
    rng = substream(seed, "bootstrap", stat)
    stats = np.empty(n_resamples)
    chunk = max(1, 2_000_000 // max(1, len(x)))
    for start in range(0, n_resamples, chunk):
        k = min(chunk, n_resamples - start)
        sample = x[rng.integers(len(x), size=(k, len(x)))]
        if stat == "mean":
            stats[start:start + k] = sample.mean(axis=1)
        else:
            q = 5.0 if stat == "p5" else 95.0
            stats[start:start + k] = np.percentile(sample, q, axis=1, method="linear")
    alpha = (1.0 - level) / 2
    return (float(np.quantile(stats, alpha)), float(np.quantile(stats, 1 - alpha)))


def empirical_cdf(values) -> list[tuple[float, float]]:
    x = np.sort(np.asarray(values, dtype=float))
    uniq = np.unique(x)
    frac = np.searchsorted(x, uniq, side="right") / len(x)
    return [(float(v), float(f)) for v, f in zip(uniq, frac)]


@lru_cache(maxsize=1)
def build_tag() -> str:
    """``git describe``-style identifier, falling back to the package version."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"fqamsim-{__version__}-{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"fqamsim-{__version__}"


@dataclass
class MetricsReport:
    config: SimConfig
    samples: list
    available_rate_95: float
    average_rate: float
    peak_rate_5: float
    ci: dict = field(default_factory=dict)
    cdf: list = field(default_factory=list)
    build_tag: str = ""

    @property
    def seed(self) -> int:
        return self.config.mc.seed

    @property
    def rates(self) -> np.ndarray:
        return np.array([s.rate_bps for s in self.samples])

    def metrics(self) -> dict[str, float]:
        return {"p5": self.available_rate_95, "mean": self.average_rate, "p95": self.peak_rate_5}


def summarize(cfg: SimConfig, samples: list) -> MetricsReport:
    rates = np.array([s.rate_bps for s in samples], dtype=float)
    ci = {stat: bootstrap_ci(rates, stat, derive_seed(cfg.mc.seed, "ci")) for stat in ("p5", "mean", "p95")}
    return MetricsReport(
        config=cfg,
        samples=samples,
        available_rate_95=percentile(rates, 5),
        average_rate=float(rates.mean()),
        peak_rate_5=percentile(rates, 95),
        ci=ci,
        cdf=empirical_cdf(rates),
        build_tag=build_tag(),
    )


def run_drops(cfg: SimConfig, workers: int = 1) -> list[RateSample]:
    drops = range(cfg.mc.n_drops)
    if workers <= 1:
        per_drop = [run_drop(cfg, d) for d in drops]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_drop = list(pool.map(partial(run_drop, cfg), drops,
                                     chunksize=max(1, cfg.mc.n_drops // (4 * workers))))
    return [s for batch in per_drop for s in batch]


def run_campaign(cfg: SimConfig, workers: int = 1) -> MetricsReport:
    """All drops of ``cfg`` aggregated into one report; independent of ``workers``."""
    return summarize(cfg, run_drops(cfg, workers))
