import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqamsim.channel import (
    LinkRealization,
    db_to_linear,
    dbm_to_watts,
    draw_fading,
    draw_link,
    draw_shadowing,
    linear_to_db,
    mean_sinr,
    noise_power,
    path_loss,
    shannon_rate,
    sinr_from_powers,
    watts_to_dbm,
)
from fqamsim.geometry import AntennaPattern, antenna_gain


@pytest.mark.parametrize("d,expected", [(1000, 128.1), (100, 90.5), (866, 125.7516)])
def test_path_loss(d, expected):
    assert path_loss(d) == pytest.approx(expected, abs=1e-3)


def test_path_loss_minimum_distance():
    with pytest.raises(ValueError):
        path_loss(10.0)


def test_noise_power():
    n = noise_power(300, 20e6)
    assert n == pytest.approx(8.28e-14, rel=1e-3)
    assert watts_to_dbm(n) == pytest.approx(-100.8, abs=0.05)
    assert noise_power(300, 0) == 0.0
    assert noise_power(300, 40e6) == pytest.approx(2 * n)


def test_bs_power_conversion():
    assert dbm_to_watts(43) == pytest.approx(19.95, abs=0.01)
    assert watts_to_dbm(dbm_to_watts(43)) == pytest.approx(43)


@settings(max_examples=200)
@given(x=st.floats(-200, 200))
def test_db_round_trip(x):
    assert float(linear_to_db(db_to_linear(x))) == pytest.approx(x, rel=1e-12, abs=1e-12)
    lin = float(db_to_linear(x))
    assert float(db_to_linear(linear_to_db(lin))) == pytest.approx(lin, rel=1e-12)


def test_link_determinism():
    p = AntennaPattern(np.pi / 4)
    a = draw_link(3, 7, 500.0, 0.2, p, seed=9, n_tones=4)
    b = draw_link(3, 7, 500.0, 0.2, p, seed=9, n_tones=4)
    assert a.shadowing_db == b.shadowing_db
    assert np.array_equal(a.fading, b.fading)
    c = draw_link(7, 3, 500.0, 0.2, p, seed=9, n_tones=4)
    assert c.shadowing_db != a.shadowing_db


def test_link_composition():
    p = AntennaPattern(np.pi / 4)
    link = draw_link(1, 2, 866.0, 0.3, p, seed=1, n_tones=4)
    assert link.tx_gain_db == pytest.approx(antenna_gain(0.3, p))
    expected = 10 ** ((link.tx_gain_db - path_loss(866.0) + link.shadowing_db) / 10) \
        * np.abs(link.fading) ** 2
    assert np.allclose(link.power_gain, expected, rtol=1e-12)
    assert np.allclose(np.abs(link.amplitude) ** 2, link.power_gain, rtol=1e-12)
    assert draw_link(1, 2, 866.0, 0.3, None, seed=1).tx_gain_db == 0.0


def test_fading_statistics():
    h = draw_fading(0, 0, seed=4, n_tones=100_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)
    assert abs(np.mean(h)) < 0.01
    # independent across links
    g = draw_fading(0, 1, seed=4, n_tones=100_000)
    assert abs(np.mean(h * np.conj(g))) < 0.01


def test_flat_fading_repeats():
    h = draw_fading(2, 5, seed=1, n_tones=4, flat=True)
    assert np.all(h == h[0])


def test_fading_subbands_differ():
    assert not np.array_equal(draw_fading(1, 1, 3, 4, subband=0), draw_fading(1, 1, 3, 4, subband=1))


def test_shadowing_statistics():
    s = np.array([draw_shadowing(tx, rx, seed=2) for tx in range(400) for rx in range(250)])
    assert s.std() == pytest.approx(8.0, abs=0.1)
    assert abs(s.mean()) < 0.1


def _link(gain_db):
    return LinkRealization(0, 0, 0.0, 0.0, gain_db, np.ones(1, dtype=complex))


def test_mean_sinr_examples():
    noise = 8.28e-14
    snr = mean_sinr(_link(-120.0), [], 20.0, [], noise)
    assert snr == pytest.approx(241.5, rel=1e-3)
    assert 10 * np.log10(snr) == pytest.approx(23.8, abs=0.05)
    # interference equal to the noise halves the SNR
    half = mean_sinr(_link(-120.0), [_link(10 * np.log10(noise))], 20.0, 1.0, noise)
    assert half == pytest.approx(snr / 2)
    assert sinr_from_powers(0.0, [1.0], 1.0) == 0.0


@settings(max_examples=100)
@given(s=st.floats(1e-3, 1e3), i=st.floats(1e-3, 1e3), n=st.floats(1e-3, 1e3), f=st.floats(1.01, 10))
def test_sinr_monotone(s, i, n, f):
    assert sinr_from_powers(s, [i * f], n) < sinr_from_powers(s, [i], n)
    assert sinr_from_powers(s * f, [i], n) > sinr_from_powers(s, [i], n)


def test_shannon_reference():
    assert shannon_rate(1.0) == 1.0
