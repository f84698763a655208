"""QAM/FQAM resource partitioning in the space and frequency domains.

Space domain: a central scheduler keeps a table of beams and chooses QAM or
FQAM per beam.  A victim beam whose user sees low SINR from few aggressors can
ask for all of its aggressor beams to switch to FQAM.  The switch costs the
aggressors some of their own rate, bounded by each beam's rate margin unless
the victim's service priority is higher.

Frequency domain: the band is split into a reserved and a regular subband.
Low-SINR users are served on the reserved subband, where every first-tier
interferer of a victim cell transmits FQAM; everything else uses QAM.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ConfigurationError
from .modem import Modulation

QAM = Modulation.QAM
FQAM = Modulation.FQAM

MAX_BRUTE_FORCE_BEAMS = 16
_TOL = 1e-12


@dataclass(frozen=True)
class Thresholds:
    gamma_th: float = 0.0  # dB
    n_th: int = 3

    def __post_init__(self):
        if self.n_th < 1:
            raise ConfigurationError(f"n_th must be >= 1, got {self.n_th}")


@dataclass(frozen=True)
class ServiceProfile:
    lspl: int = 0
    rm: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.rm <= 1.0:
            raise ConfigurationError(f"rm must be in [0, 1], got {self.rm}")


def classify_users(sinrs_db: Mapping[int, float], gamma_th: float) -> tuple[list[int], list[int]]:
    """Split user ids into ``(low, high)``; a user exactly at the threshold is high."""
    low = sorted(u for u, s in sinrs_db.items() if s < gamma_th)
    high = sorted(u for u, s in sinrs_db.items() if not s < gamma_th)
    return low, high


def switch_eligible(gamma: float, n_aggressors: int, th: Thresholds) -> bool:
    return gamma < th.gamma_th and n_aggressors < th.n_th


# --------------------------------------------------------------------------
# space domain

@dataclass(frozen=True)
class BeamInfo:
    beam_id: int
    sinr_db: float
    aggressors: tuple[int, ...] = ()


RateOracle = Callable[[Mapping[int, Modulation]], Mapping[int, float]]


@dataclass
class SpaceAssignment:
    modulation: dict[int, Modulation]
    rates: dict[int, float]
    requested_by: dict[int, frozenset] = field(default_factory=dict)

    @property
    def sum_rate(self) -> float:
        return float(sum(self.rates.values()))

    @property
    def fqam_beams(self) -> list[int]:
        return sorted(b for b, m in self.modulation.items() if m is FQAM)


def _call_oracle(oracle: RateOracle, assignment: Mapping[int, Modulation],
                 context: str) -> dict[int, float]:
    try:
        return dict(oracle(assignment))
    except Exception as exc:
        fq = sorted(b for b, m in assignment.items() if m is FQAM)
        raise RuntimeError(f"rate oracle failed {context} (FQAM beams {fq}): {exc}") from exc


def _profile(profiles: Mapping[int, ServiceProfile], beam: int) -> ServiceProfile:
    return profiles.get(beam, ServiceProfile())


def is_feasible(modulation: Mapping[int, Modulation], rates: Mapping[int, float],
                base_rates: Mapping[int, float], requested_by: Mapping[int, Iterable[int]],
                profiles: Mapping[int, ServiceProfile]) -> bool:
    """Every FQAM beam stays within its rate margin or serves a higher-priority victim."""
    for b, m in modulation.items():
        if m is not FQAM:
            continue
        prof = _profile(profiles, b)
        base = base_rates[b]
        loss = (base - rates[b]) / base if base > 0 else 0.0
        if loss <= prof.rm + _TOL:
            continue
        victims = requested_by.get(b, ())
        if not any(_profile(profiles, v).lspl > prof.lspl for v in victims):
            return False
    return True


def _eligible(beams: Sequence[BeamInfo], th: Thresholds) -> list[BeamInfo]:
    return sorted((b for b in beams if switch_eligible(b.sinr_db, len(b.aggressors), th)),
                  key=lambda b: b.beam_id)


def centralized_space_assign(beams: Sequence[BeamInfo], oracle: RateOracle,
                             profiles: Mapping[int, ServiceProfile], th: Thresholds
                             ) -> SpaceAssignment:
    """Greedy hill climb over flip groups, starting from all-QAM.

    Each step tries, for every eligible victim, switching all of its
    still-QAM aggressors to FQAM, and accepts the feasible group with the
    largest positive sum-rate gain (lowest victim id on ties).
    """
    current = {b.beam_id: QAM for b in beams}
    base = _call_oracle(oracle, current, "on the all-QAM baseline")
    rates = dict(base)
    requested: dict[int, frozenset] = {}
    eligible = _eligible(beams, th)

    while True:
        best = None
        best_gain = 0.0
        for victim in eligible:
            group = [a for a in victim.aggressors if current[a] is QAM]
            if not group:
                continue
            cand = dict(current)
            cand_req = dict(requested)
            for a in group:
                cand[a] = FQAM
                cand_req[a] = cand_req.get(a, frozenset()) | {victim.beam_id}
            cand_rates = _call_oracle(oracle, cand, f"for victim beam {victim.beam_id}")
            if not is_feasible(cand, cand_rates, base, cand_req, profiles):
                continue
            gain = sum(cand_rates.values()) - sum(rates.values())
            if gain > best_gain + _TOL:
                best, best_gain = (cand, cand_rates, cand_req), gain
        if best is None:
            break
        current, rates, requested = best
    return SpaceAssignment(current, rates, requested)


def brute_force_space_assign(beams: Sequence[BeamInfo], oracle: RateOracle,
                             profiles: Mapping[int, ServiceProfile], th: Thresholds
                             ) -> SpaceAssignment:
    """Exhaustive optimum over FQAM subsets of the eligible victims' aggressors.

    A beam may be FQAM only if it is an aggressor of an eligible victim; the
    feasibility rule is the greedy's, with every such victim counted as a
    requester.
    """
    if len(beams) > MAX_BRUTE_FORCE_BEAMS:
        raise ConfigurationError(
            f"brute force is limited to {MAX_BRUTE_FORCE_BEAMS} beams, got {len(beams)}")
    eligible = _eligible(beams, th)
    requesters: dict[int, set] = {}
    for v in eligible:
        for a in v.aggressors:
            requesters.setdefault(a, set()).add(v.beam_id)
    candidates = sorted(requesters)
    all_qam = {b.beam_id: QAM for b in beams}
    base = _call_oracle(oracle, all_qam, "on the all-QAM baseline")

    best = SpaceAssignment(all_qam, dict(base), {})
    for mask in range(1, 1 << len(candidates)):
        cand = dict(all_qam)
        req = {}
        for i, b in enumerate(candidates):
            if mask >> i & 1:
                cand[b] = FQAM
                req[b] = frozenset(requesters[b])
        rates = _call_oracle(oracle, cand, "during enumeration")
        if not is_feasible(cand, rates, base, req, profiles):
            continue
        if sum(rates.values()) > best.sum_rate + _TOL:
            best = SpaceAssignment(cand, rates, req)
    return best


# --------------------------------------------------------------------------
# frequency domain

class Subband(IntEnum):
    RESERVED = 0
    REGULAR = 1


@dataclass
class FrequencyAssignment:
    rho: float
    placement: dict[int, Subband]
    modulation: dict[tuple[int, Subband], Modulation]
    victims: frozenset

    def users_on(self, cell_of: Mapping[int, int], cell: int, subband: Subband) -> list[int]:
        return sorted(u for u, s in self.placement.items() if s is subband and cell_of[u] == cell)


def frequency_partition(neighbors: Mapping[int, Sequence[int]], cell_of: Mapping[int, int],
                        low: Iterable[int], rho: float, *, fqam: bool = True
                        ) -> FrequencyAssignment:
    """Reserve a fraction ``rho`` of the band for low-SINR users.

    ``neighbors`` maps every cell to its first-tier interferers and ``cell_of``
    maps every user to its serving cell.  With ``fqam=False`` the same split
    is produced but the reserved subband carries QAM (the all-QAM reference).
    """
    if not 0.0 < rho < 1.0:
        raise ConfigurationError(f"reserved fraction rho must be in (0, 1), got {rho}")
    low = set(low)
    placement = {u: (Subband.RESERVED if u in low else Subband.REGULAR) for u in sorted(cell_of)}
    victims = frozenset(cell_of[u] for u in low)
    aggressors = {a for v in victims for a in neighbors[v]}
    modulation = {}
    for cell in sorted(neighbors):
        on_reserved = FQAM if (fqam and cell in aggressors) else QAM
        modulation[(cell, Subband.RESERVED)] = on_reserved
        modulation[(cell, Subband.REGULAR)] = QAM
    return FrequencyAssignment(rho, placement, modulation, victims)
