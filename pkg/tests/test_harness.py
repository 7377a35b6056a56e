import subprocess
import sys
from dataclasses import replace

import pytest

from airbeam.config import ConfigError, dbm_to_watts
from airbeam.harness import (
    HEADER,
    ResultRow,
    format_csv,
    load_config,
    parse_text,
    read_csv,
    run_experiment,
    spec_from_mapping,
    write_csv,
)
from airbeam.harness.cli import main
from airbeam.harness.config_io import KEYS, NO_POWER_DBM

MINIMAL = """
experiment.kind = sumrate-zf
sweep.variable = p_total_dbm
sweep.values = 0, 5
system.users = 2
"""


def _spec(text, **kw):
    return spec_from_mapping(parse_text(text), **kw)


def test_exact_key_list():
    assert set(KEYS) == {
        "experiment.kind", "sweep.variable", "sweep.values", "system.n_ris",
        "system.tx_antennas", "system.users", "system.rx_antennas", "system.mod_order",
        "power.p_total_dbm", "power.p_bs_dbm", "power.p_a_dbm", "channel.c0_db",
        "channel.beta_t", "channel.beta_k", "channel.beta_d", "channel.d_t", "channel.d_k",
        "channel.d_d", "noise.sigma_s_dbm", "noise.sigma_v_dbm", "mc.trials", "mc.seed",
        "sdr.candidates", "sdr.delta_r", "bisect.gamma_lo_db", "bisect.gamma_hi_db",
        "bisect.max_iter", "bisect.tol_db",
    }


def test_minimal_file_gets_reference_defaults(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text(MINIMAL)
    spec = load_config(p)
    b = spec.base
    assert spec.kind == "sumrate-zf" and spec.sweep.values == (0.0, 5.0)
    assert (b.c0_db, b.sigma_s_dbm, b.beta_t, b.beta_k, b.beta_d) == (-30.0, -90.0, 2.2, 2.8, 3.5)
    assert (b.d_t, b.d_k, b.d_d) == (20.0, 30.0, 50.0)


def test_parse_comments_and_errors():
    assert parse_text("a = 1 # note\n\n# c\nb=x") == {"a": "1", "b": "x"}
    with pytest.raises(ConfigError, match="duplicate key 'a'"):
        parse_text("a = 1\na = 2")
    with pytest.raises(ConfigError, match="line 1"):
        parse_text("just words")


def test_all_problems_listed_at_once():
    with pytest.raises(ConfigError) as exc:
        _spec("experiment.kind = ber-im\nsweep.values = \nbogus = 3\nmc.trials = x\n")
    msg = str(exc.value)
    for part in ("unknown key 'bogus'", "sweep.variable", "sweep.values must not be empty",
                 "mc.trials", "system.rx_antennas"):
        assert part in msg


@pytest.mark.parametrize("values", ["5, 0", "1, 1", "0, nan"])
def test_sweep_values_validated(values):
    with pytest.raises(ConfigError):
        _spec(MINIMAL.replace("0, 5", values))


def test_kind_from_command_line():
    text = MINIMAL.replace("experiment.kind = sumrate-zf\n", "")
    assert _spec(text, kind="sumrate-ota").kind == "sumrate-ota"
    with pytest.raises(ConfigError, match="command asks"):
        _spec(MINIMAL, kind="sumrate-ota")
    with pytest.raises(ConfigError, match="experiment.kind"):
        _spec(text)


def test_rsm_needs_enough_tx_antennas():
    text = "experiment.kind = ber-rsm\nsweep.variable = p_total_dbm\nsweep.values = 0\n" \
           "system.rx_antennas = 4\nsystem.tx_antennas = 2\nsystem.users = 1\n"
    with pytest.raises(ConfigError, match="rx_antennas <= tx_antennas"):
        _spec(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


def test_power_split():
    spec = _spec(MINIMAL + "power.p_bs_dbm = 0\npower.p_total_dbm = 30\n")
    cfg = spec.point_config(10.0)
    assert cfg.p_a_w == pytest.approx(dbm_to_watts(10.0) - 1e-3)
    assert spec.point_config(0.0).p_a_dbm == NO_POWER_DBM
    pa = replace(spec, sweep=replace(spec.sweep, variable="p_a_dbm"))
    cfg = pa.point_config(20.0)
    assert cfg.p_bs_w == pytest.approx(1.0 - 0.1)
    assert cfg.p_a_w + cfg.p_bs_w == pytest.approx(1.0)
    n = replace(spec, sweep=replace(spec.sweep, variable="n_ris"))
    assert n.point_config(64).n_ris == 64


# --- CSV ------------------------------------------------------------------------


ROWS = [
    ResultRow("ber-im", 5.0, 2, 16, 2, 2, 2, "ber", 1 / 3, 0.1, 0.6, 100, 7),
    ResultRow("ber-im", 10.0, 2, 16, 2, 2, 2, "ber", 0.0, 0.0, 0.0123456789012, 100, 7),
]


def test_csv_header_and_format(tmp_path):
    p = tmp_path / "o.csv"
    write_csv([], p)
    assert p.read_text() == ",".join(HEADER) + "\n"
    assert ",".join(HEADER) == "experiment,sweep_value,k,n,t_x,r_x,m,metric,value,ci_low,ci_high,trials,seed"
    text = format_csv(ROWS)
    assert text.splitlines()[1] == "ber-im,5,2,16,2,2,2,ber,0.3333333333,0.1,0.6,100,7"
    assert text.endswith("\n")


def test_csv_roundtrip_and_determinism(tmp_path):
    p = tmp_path / "o.csv"
    write_csv(ROWS, p)
    back = read_csv(p)
    for a, b in zip(ROWS, back):
        for fa, fb in zip(a.__dict__.values(), b.__dict__.values()):
            if isinstance(fa, float):
                assert fb == pytest.approx(fa, rel=1e-9)
            else:
                assert fa == fb
    first = p.read_bytes()
    write_csv(ROWS, p)
    assert p.read_bytes() == first


def test_csv_write_error_names_path(tmp_path):
    with pytest.raises(OSError, match="nodir"):
        write_csv(ROWS, tmp_path / "nodir" / "x.csv")


# --- runs -----------------------------------------------------------------------


def test_zf_sweep_monotone_and_rows():
    spec = _spec(MINIMAL.replace("0, 5", "0, 10, 20, 30") + "mc.trials = 60\n")
    rows = run_experiment(spec)
    vals = [r.value for r in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for r in rows:
        assert r.metric == "sum_rate_bps_hz" and r.ci_low <= r.value <= r.ci_high
        assert (r.k, r.n, r.trials, r.seed) == (2, 16, 60, 1)


def test_worker_count_does_not_change_results():
    text = """experiment.kind = sumrate-ota
sweep.variable = p_total_dbm
sweep.values = 5, 10
system.users = 2
system.n_ris = 8
sdr.candidates = 30
mc.trials = 3
mc.seed = 11
"""
    spec = _spec(text)
    one = format_csv(run_experiment(spec, workers=1))
    two = format_csv(run_experiment(spec, workers=2))
    assert one == two


def test_single_trial_worker_invariance_ber():
    text = "experiment.kind = ber-im\nsweep.variable = p_total_dbm\nsweep.values = 0, 10\n" \
           "system.rx_antennas = 2\nsystem.mod_order = 2\nmc.trials = 1\nsdr.candidates = 20\n"
    spec = _spec(text)
    assert run_experiment(spec, workers=1) == run_experiment(spec, workers=3)


def test_ber_rows_zero_without_noise():
    text = "experiment.kind = ber-im\nsweep.variable = p_total_dbm\nsweep.values = 10, 20\n" \
           "system.rx_antennas = 2\nsystem.mod_order = 2\nmc.trials = 40\nsdr.candidates = 20\n" \
           "noise.sigma_s_dbm = -200\nnoise.sigma_v_dbm = -200\n"
    for kind in ("ber-im", "ber-rsm"):
        rows = run_experiment(_spec(text.replace("ber-im", kind)))
        assert all(r.metric == "ber" and r.value == 0.0 and r.ci_low == 0.0 for r in rows)
    rsm = run_experiment(_spec(text.replace("ber-im", "ber-rsm")))
    assert rsm[0].m == 4  # rate-matched PSK order


def test_no_reflection_power_gives_zero_rate():
    text = MINIMAL.replace("sumrate-zf", "sumrate-ota").replace("0, 5", "0") + "mc.trials = 2\n"
    rows = run_experiment(_spec(text))
    assert rows[0].value == 0.0


def test_pipeline_error_names_point_and_trial(monkeypatch):
    import airbeam.harness.experiment as ex

    def boom(*a, **k):
        raise ValueError("solver blew up")

    monkeypatch.setattr(ex, "_sumrate_zf", boom)
    with pytest.raises(ex.TrialError, match=r"p_total_dbm=0, trial 0: solver blew up"):
        run_experiment(_spec(MINIMAL))


# --- CLI ------------------------------------------------------------------------


def test_cli_validate_and_run(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(MINIMAL)
    assert main(["validate", "--config", str(cfg)]) == 0
    out = tmp_path / "o.csv"
    assert main(["sumrate-zf", "--config", str(cfg), "--trials", "5", "--seed", "3",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 2 and rows[0].trials == 5 and rows[0].seed == 3
    assert main(["sumrate-zf", "--config", str(cfg), "--trials", "2"]) == 0
    assert capsys.readouterr().out.startswith("experiment,sweep_value")


def test_cli_failures_exit_nonzero(tmp_path):
    bad = tmp_path / "b.cfg"
    bad.write_text("sweep.values = \n")
    assert main(["validate", "--config", str(bad)]) == 1
    assert main(["sumrate-ota", "--config", str(tmp_path / "missing.cfg")]) == 1
    good = tmp_path / "a.cfg"
    good.write_text(MINIMAL)
    assert main(["sumrate-zf", "--config", str(good), "--out", str(tmp_path / "no" / "x.csv")]) == 1


def test_console_script_and_progress_log(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(MINIMAL)
    res = subprocess.run([sys.executable, "-m", "airbeam.harness.cli", "sumrate-zf",
                          "--config", str(cfg), "--trials", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    points = [ln for ln in res.stderr.splitlines() if " point " in ln]
    assert len(points) == 2 and "p_total_dbm=5" in points[1]
    res = subprocess.run([sys.executable, "-m", "airbeam.harness.cli", "validate",
                          "--config", str(cfg), "--seed", "-1"], capture_output=True, text=True)
    assert res.returncode != 0
