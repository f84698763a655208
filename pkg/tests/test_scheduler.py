import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqamsim.errors import ConfigurationError
from fqamsim.modem import Modulation
from fqamsim.scheduler import (
    BeamInfo,
    ServiceProfile,
    Subband,
    Thresholds,
    brute_force_space_assign,
    centralized_space_assign,
    classify_users,
    frequency_partition,
    is_feasible,
    switch_eligible,
)

QAM, FQAM = Modulation.QAM, Modulation.FQAM


class ToyOracle:
    """Per-beam rate: own modulation cost plus a bonus once its aggressors use FQAM.

    ``bonus[b]`` is earned in proportion to the fraction of b's aggressors
    that are FQAM, squared, so a partial switch helps little.
    """

    def __init__(self, beams, qam_rate, fqam_rate, bonus):
        self.beams = {b.beam_id: b for b in beams}
        self.qam_rate, self.fqam_rate, self.bonus = qam_rate, fqam_rate, bonus
        self.calls = 0

    def __call__(self, assignment):
        self.calls += 1
        out = {}
        for b, info in self.beams.items():
            r = self.fqam_rate[b] if assignment[b] is FQAM else self.qam_rate[b]
            if info.aggressors:
                frac = np.mean([assignment[a] is FQAM for a in info.aggressors])
                r += self.bonus[b] * frac ** 2
            out[b] = r
        return out


def test_classify_users():
    low, high = classify_users({1: -3.0, 2: 0.0, 3: 12.0}, 5.0)
    assert low == [1, 2] and high == [3]
    assert classify_users({1: 5.0}, 5.0) == ([], [1])
    assert classify_users({1: 9.0, 2: 7.0}, 5.0)[0] == []


@pytest.mark.parametrize("gamma,n,th,expected", [
    (-2.0, 2, Thresholds(0.0, 4), True),
    (-2.0, 4, Thresholds(0.0, 4), False),
    (0.0, 1, Thresholds(0.0, 4), False),
    (-0.1, 0, Thresholds(0.0, 1), True),
])
def test_switch_eligible(gamma, n, th, expected):
    assert switch_eligible(gamma, n, th) is expected


def test_profile_validation():
    with pytest.raises(ConfigurationError):
        Thresholds(0.0, 0)
    with pytest.raises(ConfigurationError):
        ServiceProfile(0, 1.5)


def symmetric_toy():
    # two cells with two beams each; the blue beams 0 and 2 overlap and hurt each other
    beams = [BeamInfo(0, -4.0, (2,)), BeamInfo(1, 10.0, ()), BeamInfo(2, -5.0, (0,)),
             BeamInfo(3, 12.0, ())]
    oracle = ToyOracle(beams, qam_rate={0: 2.0, 1: 60.0, 2: 1.5, 3: 70.0},
                       fqam_rate={0: 1.8, 1: 20.0, 2: 1.4, 3: 20.0},
                       bonus={0: 12.0, 1: 0.0, 2: 11.0, 3: 0.0})
    return beams, oracle


def test_symmetric_overlap_toy():
    beams, oracle = symmetric_toy()
    profiles = {b.beam_id: ServiceProfile(0, 0.3) for b in beams}
    greedy = centralized_space_assign(beams, oracle, profiles, Thresholds(0.0, 3))
    brute = brute_force_space_assign(beams, oracle, profiles, Thresholds(0.0, 3))
    assert greedy.fqam_beams == [0, 2]
    assert greedy.modulation == brute.modulation
    assert greedy.sum_rate == pytest.approx(brute.sum_rate)


def asymmetric_toy(victim_lspl):
    # S2's user sits between S1 and S3; switching them costs each far more than its margin
    beams = [BeamInfo(1, 15.0, ()), BeamInfo(2, -6.0, (1, 3)), BeamInfo(3, 14.0, ())]
    oracle = ToyOracle(beams, qam_rate={1: 70.0, 2: 1.0, 3: 65.0},
                       fqam_rate={1: 20.0, 2: 1.0, 3: 20.0}, bonus={1: 0.0, 2: 200.0, 3: 0.0})
    profiles = {1: ServiceProfile(0, 0.3), 2: ServiceProfile(victim_lspl, 0.3),
                3: ServiceProfile(0, 0.3)}
    return beams, oracle, profiles


def test_asymmetric_costly_flip_rejected():
    beams, oracle, profiles = asymmetric_toy(victim_lspl=0)
    res = centralized_space_assign(beams, oracle, profiles, Thresholds(0.0, 3))
    assert res.fqam_beams == []
    assert brute_force_space_assign(beams, oracle, profiles, Thresholds(0.0, 3)).fqam_beams == []


def test_higher_priority_victim_overrides_margin():
    beams, oracle, profiles = asymmetric_toy(victim_lspl=2)
    res = centralized_space_assign(beams, oracle, profiles, Thresholds(0.0, 3))
    assert res.fqam_beams == [1, 3]
    assert res.requested_by[1] == {2}


def test_no_eligible_victims_keeps_all_qam():
    beams = [BeamInfo(0, 5.0, (1,)), BeamInfo(1, 3.0, (0,))]
    oracle = ToyOracle(beams, {0: 1.0, 1: 1.0}, {0: 0.5, 1: 0.5}, {0: 9.0, 1: 9.0})
    res = centralized_space_assign(beams, oracle, {}, Thresholds(0.0, 3))
    assert res.fqam_beams == []
    assert res.rates == oracle({0: QAM, 1: QAM})


def test_single_beam_brute_force():
    beams = [BeamInfo(0, 5.0, ())]
    oracle = ToyOracle(beams, {0: 1.0}, {0: 0.5}, {0: 0.0})
    assert brute_force_space_assign(beams, oracle, {}, Thresholds()).fqam_beams == []


def test_brute_force_size_limit():
    beams = [BeamInfo(i, 0.0, ()) for i in range(17)]
    with pytest.raises(ConfigurationError):
        brute_force_space_assign(beams, lambda a: {}, {}, Thresholds())


def test_oracle_failure_has_context():
    beams = [BeamInfo(0, -3.0, (1,)), BeamInfo(1, 5.0, ())]

    def oracle(assignment):
        if assignment[1] is FQAM:
            raise ValueError("boom")
        return {0: 1.0, 1: 1.0}

    with pytest.raises(RuntimeError, match="victim beam 0.*boom"):
        centralized_space_assign(beams, oracle, {}, Thresholds())


def test_greedy_tie_break_lowest_victim():
    # two victims whose flips yield the same gain; only one can be applied
    beams = [BeamInfo(0, -3.0, (2,)), BeamInfo(1, -3.0, (3,)), BeamInfo(2, 5.0, ()),
             BeamInfo(3, 5.0, ())]

    def oracle(a):
        n = sum(m is FQAM for m in a.values())
        base = {0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0}
        if n == 1:
            base[0 if a[2] is FQAM else 1] += 1.0
        return base

    res = centralized_space_assign(beams, oracle, {}, Thresholds())
    assert res.fqam_beams == [2]


def random_instance(rng, n=8):
    beams = []
    for b in range(n):
        others = [o for o in range(n) if o != b]
        k = min(int(rng.integers(0, 4)), len(others))
        aggs = tuple(sorted(rng.choice(others, size=k, replace=False).tolist()))
        beams.append(BeamInfo(b, float(rng.uniform(-10, 15)), aggs))
    qam = {b: float(rng.uniform(1, 80)) for b in range(n)}
    fqam = {b: min(qam[b], 20.0) * float(rng.uniform(0.6, 1.0)) for b in range(n)}
    bonus = {b: float(rng.uniform(0, 30)) for b in range(n)}
    profiles = {b: ServiceProfile(int(rng.integers(0, 3)), float(rng.uniform(0.1, 0.8)))
                for b in range(n)}
    th = Thresholds(float(rng.uniform(-2, 5)), int(rng.integers(1, 5)))
    return beams, ToyOracle(beams, qam, fqam, bonus), profiles, th


def check_instance(beams, oracle, profiles, th):
    greedy = centralized_space_assign(beams, oracle, profiles, th)
    brute = brute_force_space_assign(beams, oracle, profiles, th)
    all_qam = oracle({b.beam_id: QAM for b in beams})
    base_sum = sum(all_qam.values())
    # post-hoc feasibility against a fresh oracle evaluation
    rates = oracle(greedy.modulation)
    assert rates == greedy.rates
    assert is_feasible(greedy.modulation, rates, all_qam, greedy.requested_by, profiles)
    assert greedy.sum_rate >= base_sum - 1e-9
    assert brute.sum_rate >= greedy.sum_rate - 1e-9
    eligible = {b.beam_id for b in beams if switch_eligible(b.sinr_db, len(b.aggressors), th)}
    by_id = {b.beam_id: b for b in beams}
    for f in greedy.fqam_beams:
        assert any(f in by_id[v].aggressors for v in eligible)
        assert greedy.requested_by[f] <= eligible
    return greedy.sum_rate / brute.sum_rate


def test_random_instances_against_brute_force():
    rng = np.random.default_rng(2024)
    ratios = [check_instance(*random_instance(rng)) for _ in range(100)]
    assert min(ratios) >= 0.9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 9))
def test_greedy_properties(seed, n):
    check_instance(*random_instance(np.random.default_rng(seed), n))


def test_greedy_deterministic():
    inst = random_instance(np.random.default_rng(5))
    a = centralized_space_assign(*inst)
    b = centralized_space_assign(*inst)
    assert a.modulation == b.modulation and a.rates == b.rates


# --------------------------------------------------------------------------
# frequency domain

NEIGHBORS = {0: [1, 2], 1: [0, 2], 2: [0, 1], 3: []}


def test_partition_edge_users_reserved():
    cell_of = {0: 0, 1: 0, 2: 1, 3: 1, 4: 2, 5: 2, 6: 3, 7: 3}
    plan = frequency_partition(NEIGHBORS, cell_of, low=[0, 2], rho=0.5)
    assert plan.placement[0] is Subband.RESERVED and plan.placement[1] is Subband.REGULAR
    assert plan.victims == {0, 1}
    # cells 0, 1, 2 interfere with a victim cell; cell 3 is isolated
    assert [plan.modulation[(c, Subband.RESERVED)] for c in range(4)] == [FQAM, FQAM, FQAM, QAM]
    assert all(plan.modulation[(c, Subband.REGULAR)] is QAM for c in range(4))
    assert plan.users_on(cell_of, 0, Subband.RESERVED) == [0]


def test_partition_without_low_users():
    cell_of = {0: 0, 1: 1}
    plan = frequency_partition(NEIGHBORS, cell_of, low=[], rho=0.3)
    assert all(m is QAM for m in plan.modulation.values())
    assert set(plan.placement.values()) == {Subband.REGULAR}


def test_partition_all_qam_reference():
    cell_of = {0: 0, 1: 1}
    plan = frequency_partition(NEIGHBORS, cell_of, low=[0, 1], rho=0.5, fqam=False)
    assert all(m is QAM for m in plan.modulation.values())
    assert plan.placement[0] is Subband.RESERVED


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.2, 1.5])
def test_partition_rho_range(rho):
    with pytest.raises(ConfigurationError):
        frequency_partition(NEIGHBORS, {0: 0}, [], rho)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_partition_properties(data):
    n_cells = data.draw(st.integers(1, 7))
    neighbors = {c: [o for o in range(n_cells) if o != c and abs(o - c) == 1] for c in range(n_cells)}
    n_users = data.draw(st.integers(1, 20))
    cell_of = {u: data.draw(st.integers(0, n_cells - 1)) for u in range(n_users)}
    low = data.draw(st.sets(st.sampled_from(range(n_users))))
    plan = frequency_partition(neighbors, cell_of, low, 0.5)
    assert set(plan.placement) == set(cell_of)
    assert all(plan.placement[u] is Subband.RESERVED for u in low)
    assert all(plan.placement[u] is Subband.REGULAR for u in set(cell_of) - low)
    for (cell, sb), m in plan.modulation.items():
        if m is FQAM:
            assert sb is Subband.RESERVED
            assert any(cell in neighbors[v] for v in plan.victims)
