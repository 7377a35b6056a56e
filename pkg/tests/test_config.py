import math

import pytest

from airbeam.config import (
    Bisection,
    ConfigError,
    SystemConfig,
    db_to_linear,
    dbm_to_watts,
    is_power_of_two,
    linear_to_db,
    path_loss,
)


def test_dbm_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert dbm_to_watts(-90.0) == pytest.approx(1e-12)
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    with pytest.raises(ConfigError):
        dbm_to_watts(math.nan)


def test_path_loss_matches_hand_value():
    # -30 dB at 1 m, exponent 2.2 over 20 m
    assert path_loss(-30.0, 20.0, 2.2) == pytest.approx(1e-3 * 20.0**-2.2, rel=1e-12)
    with pytest.raises(ConfigError):
        path_loss(-30.0, 0.0, 2.0)


def test_power_of_two():
    assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]
    assert not is_power_of_two(0)


def test_defaults_echo_reference_setup():
    c = SystemConfig()
    assert (c.c0_db, c.beta_t, c.beta_k, c.beta_d) == (-30.0, 2.2, 2.8, 3.5)
    assert (c.d_t, c.d_k, c.d_d) == (20.0, 30.0, 50.0)
    assert c.sigma_s2 == pytest.approx(1e-12)
    assert c.p_bs_w == pytest.approx(1e-3)
    assert c.budget_sigma2 == c.sigma_s2
    assert c.with_(budget_noise="sigma_v", sigma_v_dbm=-80).budget_sigma2 == pytest.approx(1e-11)


def test_with_recomputes_watts():
    c = SystemConfig().with_(p_a_dbm=10.0)
    assert c.p_a_w == pytest.approx(1e-2)


@pytest.mark.parametrize(
    "changes",
    [
        {"users": 3},  # does not divide tx_antennas=2
        {"mod_order": 3},
        {"rx_antennas": 6},
        {"n_ris": 0},
        {"d_k": -1.0},
        {"delta_r": 1.0},
        {"seed": -1},
        {"trials": 0},
        {"p_bs_dbm": math.inf},
        {"bisection": Bisection(gamma_lo_db=10, gamma_hi_db=0)},
        {"budget_noise": "other"},
    ],
)
def test_invalid_configs_rejected(changes):
    with pytest.raises(ConfigError):
        SystemConfig(**changes)


def test_all_errors_reported_together():
    with pytest.raises(ConfigError) as exc:
        SystemConfig(n_ris=0, mod_order=3, d_t=0.0)
    msg = str(exc.value)
    assert "n_ris" in msg and "mod_order" in msg and "d_t" in msg
