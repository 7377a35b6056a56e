"""Monte Carlo sweeps over a pool of trial workers.

One work item is one trial evaluated at every sweep point. Each trial draws
from substreams keyed by ``(seed, trial, tag)``, so sweep points share
their channels, payloads and noise (common random numbers), and the
results do not depend on which worker ran the trial or in what order.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..beamforming import max_min_sinr, sinr_mu, sum_rate, zf_precoder, zf_sinr
from ..channels import (
    STREAM_BITS,
    STREAM_CHANNEL,
    STREAM_NOISE,
    STREAM_ROUNDING,
    generate_channels,
    substream,
)
from ..config import ConfigError
from ..receive_im import build_im_codebook, draw_trial, im_bit_errors, im_spectral_efficiency, rsm_bit_errors
from ..stats import normal_interval, wilson_interval
from .config_io import NO_POWER_DBM, ExperimentSpec

log = logging.getLogger("airbeam.harness")

SUM_RATE = "sum_rate_bps_hz"
BER = "ber"


class TrialError(RuntimeError):
    """A pipeline failed; the message names the sweep value and trial."""


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    sweep_value: float
    k: int
    n: int
    t_x: int
    r_x: int
    m: int
    metric: str
    value: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int


def _sumrate_zf(cfg, ch, t):
    pre = zf_precoder(ch.f, cfg.p_total_w)
    return sum_rate(zf_sinr(ch.f, pre, cfg.sigma_s2))


def _sumrate_ota(cfg, ch, t):
    if cfg.p_a_dbm <= NO_POWER_DBM:
        return 0.0
    mm = max_min_sinr(ch, cfg, substream(cfg.seed, t, STREAM_ROUNDING))
    return sum_rate(sinr_mu(ch, mm.z, cfg))


def run_trial(spec: ExperimentSpec, trial: int, detectors=("greedy",)) -> np.ndarray:
    """Metric of one trial at every sweep point (sum-rate or bit errors).

    Returns shape ``(points,)``, or ``(points, len(detectors))`` for
    ``ber-im`` when more than one detector is requested; all detectors then
    see the same received samples.
    """
    base = spec.base
    seed = base.seed
    per_point_channels = spec.sweep.variable == "n_ris"
    uplink = spec.kind in ("ber-im", "ber-rsm")
    receivers = base.rx_antennas if uplink else base.users
    multi = spec.kind == "ber-im" and len(detectors) > 1
    out = np.zeros((len(spec.sweep.values), len(detectors)) if multi else len(spec.sweep.values))
    ch = draws = codebook = None
    for i, value in enumerate(spec.sweep.values):
        cfg = spec.point_config(value)
        try:
            if ch is None or per_point_channels:
                ch = generate_channels(cfg, substream(seed, trial, STREAM_CHANNEL), receivers)
                codebook = draws = None
            if spec.kind == "sumrate-zf":
                out[i] = _sumrate_zf(cfg, ch, trial)
            elif spec.kind == "sumrate-ota":
                out[i] = _sumrate_ota(cfg, ch, trial)
            else:
                if draws is None:
                    draws = draw_trial(cfg, 1, substream(seed, trial, STREAM_BITS),
                                       substream(seed, trial, STREAM_NOISE))
                if spec.kind == "ber-rsm":
                    out[i] = rsm_bit_errors(ch, cfg, draws, cfg.p_total_w)
                else:
                    if codebook is None:
                        codebook = build_im_codebook(ch, cfg, substream(seed, trial, STREAM_ROUNDING))
                    errs = im_bit_errors(ch, codebook, draws, cfg.p_bs_w, cfg.p_a_w, detectors)
                    out[i] = errs if multi else errs[0]
        except Exception as exc:
            raise TrialError(
                f"{spec.kind} failed at {spec.sweep.variable}={value:g}, trial {trial}: {exc}"
            ) from exc
    return out


def run_trials(spec: ExperimentSpec, workers: int = 1, detectors=("greedy",)) -> np.ndarray:
    """``(trials, points[, detectors])`` array of per-trial metrics, indexed by trial."""
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}")
    trials = spec.base.trials
    fn = partial(run_trial, spec, detectors=tuple(detectors))
    if workers == 1:
        rows = [fn(t) for t in range(trials)]
    else:
        chunk = max(1, trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(fn, range(trials), chunksize=chunk))
    return np.array(rows)


def summarize(spec: ExperimentSpec, per_trial: np.ndarray) -> list[ResultRow]:
    base = spec.base
    trials = per_trial.shape[0]
    m = base.mod_order
    if spec.kind == "ber-rsm":
        m = base.mod_order**base.tx_antennas
    rows = []
    for i, value in enumerate(spec.sweep.values):
        cfg = spec.point_config(value)
        col = per_trial[:, i]
        if spec.kind.startswith("sumrate"):
            metric = SUM_RATE
            mean, lo, hi = normal_interval(col)
            lo = max(lo, 0.0)
        else:
            metric = BER
            eta = im_spectral_efficiency(cfg.tx_antennas, cfg.mod_order, cfg.rx_antennas)
            errors = int(round(col.sum()))
            bits = eta * trials
            mean = errors / bits
            lo, hi = wilson_interval(errors, bits)
        row = ResultRow(spec.kind, float(value), cfg.users, cfg.n_ris, cfg.tx_antennas,
                        cfg.rx_antennas, m, metric, float(mean), float(lo), float(hi),
                        trials, base.seed)
        log.info("point kind=%s %s=%g %s=%.6g ci=[%.6g, %.6g] trials=%d seed=%d",
                 spec.kind, spec.sweep.variable, value, metric, mean, lo, hi, trials, base.seed)
        rows.append(row)
    return rows


def run_experiment(spec: ExperimentSpec, *, workers: int = 1) -> list[ResultRow]:
    """Run every trial and reduce to one row per sweep value."""
    log.info("start kind=%s sweep=%s points=%d trials=%d seed=%d workers=%d",
             spec.kind, spec.sweep.variable, len(spec.sweep.values), spec.base.trials,
             spec.base.seed, workers)
    return summarize(spec, run_trials(spec, workers))
