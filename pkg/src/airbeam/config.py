"""System configuration and unit conversions.

All powers enter the configuration in dBm and are converted to watts once,
when the :class:`SystemConfig` is constructed. Everything downstream works
in linear scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


class ConfigError(ValueError):
    """Raised when a configuration or an input argument is invalid."""


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power in dBm to watts."""
    if not math.isfinite(p_dbm):
        raise ConfigError(f"power must be finite, got {p_dbm!r} dBm")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def path_loss(c0_db: float, d: float, beta: float) -> float:
    """Distance-dependent attenuation ``C0 * d**-beta``.

    Parameters
    ----------
    c0_db : float
        Reference attenuation at 1 m, in dB (a ratio, so -30 dB -> 1e-3).
    d : float
        Link distance in meters, strictly positive.
    beta : float
        Path-loss exponent.
    """
    if not d > 0:
        raise ConfigError(f"distance must be positive, got {d!r}")
    return db_to_linear(c0_db) * d ** (-beta)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Bisection:
    """Common-target SINR search bracket, in dB."""

    gamma_lo_db: float = -20.0
    gamma_hi_db: float = 40.0
    max_iter: int = 40
    tol_db: float = 0.05


@dataclass(frozen=True)
class SystemConfig:
    """Geometry, powers, counts and solver knobs for one simulated system.

    The ``*_dbm`` fields are the user-facing values; the matching ``*_w``
    attributes are filled in at construction.

    ``budget_noise`` selects which noise variance appears in the reflection
    power budget: ``"sigma_s"`` (the static receiver noise, as printed) or
    ``"sigma_v"`` (the RIS amplifier noise).
    """

    n_ris: int = 16
    tx_antennas: int = 2
    users: int = 2
    rx_antennas: int = 2
    mod_order: int = 4
    p_total_dbm: float = 30.0
    p_bs_dbm: float = 0.0
    p_a_dbm: float = 20.0
    c0_db: float = -30.0
    beta_t: float = 2.2
    beta_k: float = 2.8
    beta_d: float = 3.5
    d_t: float = 20.0
    d_k: float = 30.0
    d_d: float = 50.0
    sigma_s_dbm: float = -90.0
    sigma_v_dbm: float = -90.0
    trials: int = 100
    seed: int = 1
    sdr_candidates: int = 200
    delta_r: float = 100.0
    bisection: Bisection = field(default_factory=Bisection)
    budget_noise: str = "sigma_s"

    p_total_w: float = field(init=False, repr=False)
    p_bs_w: float = field(init=False, repr=False)
    p_a_w: float = field(init=False, repr=False)
    sigma_s2: float = field(init=False, repr=False)
    sigma_v2: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        errors = self.validation_errors()
        if errors:
            raise ConfigError("; ".join(errors))
        set_ = object.__setattr__
        set_(self, "p_total_w", dbm_to_watts(self.p_total_dbm))
        set_(self, "p_bs_w", dbm_to_watts(self.p_bs_dbm))
        set_(self, "p_a_w", dbm_to_watts(self.p_a_dbm))
        set_(self, "sigma_s2", dbm_to_watts(self.sigma_s_dbm))
        set_(self, "sigma_v2", dbm_to_watts(self.sigma_v_dbm))

    def validation_errors(self) -> list[str]:
        errs = []
        for name in ("n_ris", "tx_antennas", "users", "rx_antennas", "mod_order",
                     "trials", "sdr_candidates"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                errs.append(f"{name} must be a positive integer, got {v!r}")
        if not errs and self.tx_antennas % self.users:
            errs.append(f"users ({self.users}) must divide tx_antennas ({self.tx_antennas})")
        if isinstance(self.mod_order, int) and not is_power_of_two(self.mod_order):
            errs.append(f"mod_order must be a power of two, got {self.mod_order}")
        if isinstance(self.rx_antennas, int) and not is_power_of_two(self.rx_antennas):
            errs.append(f"rx_antennas must be a power of two, got {self.rx_antennas}")
        for name in ("p_total_dbm", "p_bs_dbm", "p_a_dbm", "c0_db", "beta_t", "beta_k",
                     "beta_d", "sigma_s_dbm", "sigma_v_dbm", "delta_r"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                errs.append(f"{name} must be a finite number, got {v!r}")
        for name in ("d_t", "d_k", "d_d"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                errs.append(f"{name} must be a positive distance, got {v!r}")
        if isinstance(self.delta_r, (int, float)) and not self.delta_r > 1:
            errs.append(f"delta_r must exceed 1, got {self.delta_r!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            errs.append(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        b = self.bisection
        if b.gamma_hi_db < b.gamma_lo_db:
            errs.append("bisection gamma_hi_db must not be below gamma_lo_db")
        if b.max_iter < 1 or not b.tol_db > 0:
            errs.append("bisection needs max_iter >= 1 and tol_db > 0")
        if self.budget_noise not in ("sigma_s", "sigma_v"):
            errs.append(f"budget_noise must be 'sigma_s' or 'sigma_v', got {self.budget_noise!r}")
        return errs

    @property
    def tx_per_user(self) -> int:
        return self.tx_antennas // self.users

    @property
    def budget_sigma2(self) -> float:
        return self.sigma_s2 if self.budget_noise == "sigma_s" else self.sigma_v2

    @property
    def l_t(self) -> float:
        return path_loss(self.c0_db, self.d_t, self.beta_t)

    @property
    def l_k(self) -> float:
        return path_loss(self.c0_db, self.d_k, self.beta_k)

    @property
    def l_d(self) -> float:
        return path_loss(self.c0_db, self.d_d, self.beta_d)

    def with_(self, **changes) -> "SystemConfig":
        """Copy with fields replaced; derived watt values are recomputed."""
        return replace(self, **changes)
