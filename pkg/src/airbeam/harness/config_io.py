"""Experiment files: a flat ``section.key = value`` text format.

Example::

    # sum-rate vs total power
    experiment.kind = sumrate-ota
    sweep.variable = p_total_dbm
    sweep.values = 0, 5, 10, 15
    system.users = 8
    system.tx_antennas = 8

Blank lines and ``#`` comments are ignored. Lists are comma separated.
Every problem found is reported in a single :class:`ConfigError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ..config import Bisection, ConfigError, SystemConfig, dbm_to_watts

KINDS = ("sumrate-zf", "sumrate-ota", "ber-im", "ber-rsm")
SWEEP_VARIABLES = ("p_total_dbm", "p_a_dbm", "n_ris")
# stands for "no power at all" when a budget split leaves nothing over
NO_POWER_DBM = -300.0

# file key -> (SystemConfig field, parser)
_INT, _FLOAT = "int", "float"
SYSTEM_KEYS = {
    "system.n_ris": ("n_ris", _INT),
    "system.tx_antennas": ("tx_antennas", _INT),
    "system.users": ("users", _INT),
    "system.rx_antennas": ("rx_antennas", _INT),
    "system.mod_order": ("mod_order", _INT),
    "power.p_total_dbm": ("p_total_dbm", _FLOAT),
    "power.p_bs_dbm": ("p_bs_dbm", _FLOAT),
    "power.p_a_dbm": ("p_a_dbm", _FLOAT),
    "channel.c0_db": ("c0_db", _FLOAT),
    "channel.beta_t": ("beta_t", _FLOAT),
    "channel.beta_k": ("beta_k", _FLOAT),
    "channel.beta_d": ("beta_d", _FLOAT),
    "channel.d_t": ("d_t", _FLOAT),
    "channel.d_k": ("d_k", _FLOAT),
    "channel.d_d": ("d_d", _FLOAT),
    "noise.sigma_s_dbm": ("sigma_s_dbm", _FLOAT),
    "noise.sigma_v_dbm": ("sigma_v_dbm", _FLOAT),
    "mc.trials": ("trials", _INT),
    "mc.seed": ("seed", _INT),
    "sdr.candidates": ("sdr_candidates", _INT),
    "sdr.delta_r": ("delta_r", _FLOAT),
}
BISECT_KEYS = {
    "bisect.gamma_lo_db": ("gamma_lo_db", _FLOAT),
    "bisect.gamma_hi_db": ("gamma_hi_db", _FLOAT),
    "bisect.max_iter": ("max_iter", _INT),
    "bisect.tol_db": ("tol_db", _FLOAT),
}
KEYS = ("experiment.kind", "sweep.variable", "sweep.values", *SYSTEM_KEYS, *BISECT_KEYS)

REQUIRED_BY_KIND = {
    "sumrate-zf": ("system.users",),
    "sumrate-ota": ("system.users",),
    "ber-im": ("system.rx_antennas",),
    "ber-rsm": ("system.rx_antennas",),
}


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    sweep: Sweep
    base: SystemConfig
    output_path: str | None = None
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def point_config(self, value) -> SystemConfig:
        """System configuration at one sweep value.

        The transmit budget splits as ``P_T = P_BS + P_A`` in watts: sweeping
        ``p_total_dbm`` keeps ``P_BS`` and gives the rest to the RIS, sweeping
        ``p_a_dbm`` keeps ``P_T`` and gives the rest to the transmitter. A
        share left with nothing is set to ``NO_POWER_DBM``.
        """
        b = self.base
        if self.sweep.variable == "n_ris":
            return b.with_(n_ris=int(value))
        if self.sweep.variable == "p_total_dbm":
            rest = dbm_to_watts(value) - b.p_bs_w
            return b.with_(p_total_dbm=float(value), p_a_dbm=_to_dbm(rest))
        rest = b.p_total_w - dbm_to_watts(value)
        return b.with_(p_a_dbm=float(value), p_bs_dbm=_to_dbm(rest))


def _to_dbm(watts: float) -> float:
    if watts <= dbm_to_watts(NO_POWER_DBM):
        return NO_POWER_DBM
    return 10.0 * math.log10(watts) + 30.0


def parse_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; duplicate keys are an error."""
    out: dict[str, str] = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            errors.append(f"line {lineno}: empty key")
        elif key in out:
            errors.append(f"line {lineno}: duplicate key '{key}'")
        else:
            out[key] = value
    if errors:
        raise ConfigError("; ".join(errors))
    return out


def _parse_scalar(key: str, raw: str, kind: str, errors: list):
    try:
        if kind == _INT:
            return int(raw)
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError
        return v
    except ValueError:
        errors.append(f"{key}: expected {'an integer' if kind == _INT else 'a finite number'}, got {raw!r}")
        return None


def spec_from_mapping(values: dict[str, str], *, kind: str | None = None,
                      output_path: str | None = None) -> ExperimentSpec:
    """Validate a parsed key/value mapping into an :class:`ExperimentSpec`.

    ``kind`` (from the command line) fills in ``experiment.kind`` when the
    file leaves it out; a conflicting value is an error.
    """
    errors = []
    unknown = sorted(set(values) - set(KEYS))
    errors += [f"unknown key '{k}'" for k in unknown]

    file_kind = values.get("experiment.kind")
    if file_kind is not None and kind is not None and file_kind != kind:
        errors.append(f"experiment.kind is '{file_kind}' but the command asks for '{kind}'")
    kind = file_kind or kind
    if kind is None:
        errors.append("missing key 'experiment.kind'")
    elif kind not in KINDS:
        errors.append(f"experiment.kind must be one of {', '.join(KINDS)}, got '{kind}'")
    else:
        errors += [f"missing key '{k}' (required for {kind})"
                   for k in REQUIRED_BY_KIND[kind] if k not in values]

    variable = values.get("sweep.variable")
    if variable is None:
        errors.append("missing key 'sweep.variable'")
    elif variable not in SWEEP_VARIABLES:
        errors.append(f"sweep.variable must be one of {', '.join(SWEEP_VARIABLES)}, got '{variable}'")

    sweep_values: tuple = ()
    raw = values.get("sweep.values")
    if raw is None:
        errors.append("missing key 'sweep.values'")
    else:
        items = [s.strip() for s in raw.split(",") if s.strip()]
        parsed = [_parse_scalar("sweep.values", s, _INT if variable == "n_ris" else _FLOAT, errors)
                  for s in items]
        if not items:
            errors.append("sweep.values must not be empty")
        elif None not in parsed:
            if any(b <= a for a, b in zip(parsed, parsed[1:])):
                errors.append("sweep.values must be strictly increasing")
            sweep_values = tuple(parsed)

    fields = {}
    for key, (name, typ) in SYSTEM_KEYS.items():
        if key in values:
            fields[name] = _parse_scalar(key, values[key], typ, errors)
    bis = {}
    for key, (name, typ) in BISECT_KEYS.items():
        if key in values:
            bis[name] = _parse_scalar(key, values[key], typ, errors)

    base = None
    try:
        base = SystemConfig(**{k: v for k, v in fields.items() if v is not None},
                            bisection=Bisection(**{k: v for k, v in bis.items() if v is not None}))
    except (ConfigError, TypeError) as exc:
        errors.append(str(exc))
    if base is not None and kind == "ber-rsm" and base.rx_antennas > base.tx_antennas:
        errors.append("ber-rsm needs rx_antennas <= tx_antennas for ZF steering")
    if base is not None and variable == "n_ris" and any(v < 1 for v in sweep_values):
        errors.append("n_ris sweep values must be positive")
    if errors:
        raise ConfigError("invalid experiment configuration: " + "; ".join(errors))
    return ExperimentSpec(kind, Sweep(variable, sweep_values), base, output_path, dict(values))


def load_config(path, *, kind: str | None = None, output_path: str | None = None) -> ExperimentSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}") from exc
    try:
        return spec_from_mapping(parse_text(text), kind=kind, output_path=output_path)
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
