"""Site layout, user drops, beams and the directional antenna pattern."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .streams import substream

CELL_EDGE = "cell_edge"
UNIFORM_RANDOM = "uniform_random"

MIN_UE_DISTANCE = 35.0
_LATTICE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SitePlan:
    bs_positions: np.ndarray  # (n_cells, 2) meters
    isd: float

    @property
    def n_cells(self) -> int:
        return len(self.bs_positions)


def build_lattice(n_cells: int, isd: float) -> SitePlan:
    """First ``n_cells`` triangular-lattice sites ordered by distance then angle."""
    if n_cells < 1:
        raise ConfigurationError(f"n_cells must be >= 1, got {n_cells}")
    if not isd > 0:
        raise ConfigurationError(f"isd must be positive, got {isd}")
    rings = int(np.ceil(np.sqrt(n_cells))) + 2
    a, b = np.meshgrid(np.arange(-rings, rings + 1), np.arange(-rings, rings + 1))
    a, b = a.ravel(), b.ravel()
    x = (a + 0.5 * b) * isd
    y = (np.sqrt(3) / 2 * b) * isd
    dist = np.round(np.hypot(x, y) / isd, 9)
    ang = np.round(np.mod(np.arctan2(y, x), 2 * np.pi), 9)
    ang[dist == 0] = 0.0
    order = np.lexsort((ang, dist))[:n_cells]
    pos = np.column_stack([x[order], y[order]])
    pos[np.abs(pos) < 1e-9 * isd] = 0.0
    pos.setflags(write=False)
    return SitePlan(pos, float(isd))


def first_tier_interferers(plan: SitePlan, cell: int) -> list[int]:
    d = np.hypot(*(plan.bs_positions - plan.bs_positions[cell]).T)
    return [int(j) for j in np.flatnonzero(np.abs(d - plan.isd) <= _LATTICE_TOL)]


def in_hexagon(offset: np.ndarray, isd: float) -> np.ndarray:
    """True where ``offset`` (relative to a site) lies in that site's Voronoi cell.

    Neighbours sit at multiples of 60 degrees, so the cell is the hexagon with
    apothem ``isd/2`` whose edges are normal to those directions.
    """
    offset = np.atleast_2d(offset)
    normals = np.array([[np.cos(k * np.pi / 3), np.sin(k * np.pi / 3)] for k in range(6)])
    return np.all(offset @ normals.T <= isd / 2 + 1e-9, axis=1)


@dataclass(frozen=True)
class UePlacement:
    ue_id: int
    cell: int
    position: tuple[float, float]
    kind: str


def drop_users(plan: SitePlan, users_per_cell: int, seed: int) -> list[UePlacement]:
    """Per cell: one user on the ring of radius isd/2, the rest uniform in the hexagon."""
    if users_per_cell < 1:
        raise ConfigurationError(f"users_per_cell must be >= 1, got {users_per_cell}")
    if plan.isd / 2 < MIN_UE_DISTANCE:
        raise ConfigurationError(
            f"isd={plan.isd} too small: cell-edge users must be at least {MIN_UE_DISTANCE} m away")
    ues = []
    r_out = plan.isd / np.sqrt(3)
    for cell in range(plan.n_cells):
        rng = substream(seed, "drop_users", cell)
        bs = plan.bs_positions[cell]
        theta = rng.uniform(0, 2 * np.pi)
        pos = bs + plan.isd / 2 * np.array([np.cos(theta), np.sin(theta)])
        ues.append(UePlacement(cell * users_per_cell, cell, (float(pos[0]), float(pos[1])), CELL_EDGE))
        for j in range(1, users_per_cell):
            while True:
                off = rng.uniform(-r_out, r_out, size=2)
                if np.hypot(*off) >= MIN_UE_DISTANCE and in_hexagon(off, plan.isd)[0]:
                    break
            pos = bs + off
            ues.append(UePlacement(cell * users_per_cell + j, cell,
                                   (float(pos[0]), float(pos[1])), UNIFORM_RANDOM))
    return ues


@dataclass(frozen=True)
class AntennaPattern:
    """Main-lobe/side-lobe reference pattern, or isotropic when ``phi_3db >= 2*pi``.

    Angles are in radians throughout.
    """

    phi_3db: float
    omni_gain: float = 14.0

    def __post_init__(self):
        if not 0 < self.phi_3db <= 2 * np.pi + 1e-12:
            raise ConfigurationError(f"phi_3db must be in (0, 2*pi], got {self.phi_3db}")

    @property
    def is_omni(self) -> bool:
        return self.phi_3db >= 2 * np.pi - 1e-12

    @property
    def phi_ml(self) -> float:
        return 2.6 * self.phi_3db

    @property
    def g0(self) -> float:
        if self.is_omni:
            return self.omni_gain
        return 10 * np.log10((1.6162 / np.sin(self.phi_3db / 2)) ** 2)

    @property
    def gsl(self) -> float:
        if self.is_omni:
            return self.omni_gain
        return -0.4111 * np.log(self.phi_3db) - 10.579


def wrap_angle(phi):
    """Map angles onto (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    w = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def antenna_gain(phi, pattern: AntennaPattern):
    """Gain in dB at angle ``phi`` off boresight."""
    a = np.abs(wrap_angle(phi))
    if pattern.is_omni:
        g = np.full_like(a, pattern.omni_gain)
    else:
        main = pattern.g0 - 3.01 * (2 * a / pattern.phi_3db) ** 2
        g = np.where(a <= pattern.phi_ml / 2, main, pattern.gsl)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class Beam:
    beam_id: int
    serving_bs: int
    served_ue: int
    boresight: float
    pattern: AntennaPattern


def bearing(src: Sequence[float], dst: Sequence[float]) -> float:
    return float(np.arctan2(dst[1] - src[1], dst[0] - src[0]))


def distance(src: Sequence[float], dst: Sequence[float]) -> float:
    return float(np.hypot(dst[0] - src[0], dst[1] - src[1]))


def form_beams(plan: SitePlan, ues: Sequence[UePlacement], pattern: AntennaPattern) -> list[Beam]:
    """One beam per user, pointed at the user; beam id equals ue id."""
    return [
        Beam(ue.ue_id, ue.cell, ue.ue_id, bearing(plan.bs_positions[ue.cell], ue.position), pattern)
        for ue in ues
    ]


def serving_cell(plan: SitePlan, position: Sequence[float]) -> int:
    d = np.hypot(*(plan.bs_positions - np.asarray(position)).T)
    return int(np.argmin(d))
