"""Simulation configuration with the study's default operating point."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

import numpy as np

from .protocols import PROTOCOLS, THRESHOLD_MODES, MAX_RELAYS, ProtocolConfig, ThresholdConfig


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SimulationConfig:
    """Everything that defines one Monte Carlo run.

    Relay density and power are given relative to the sources:
    ``lambda_r = lambda_ratio * lambda_s`` and
    ``P_r = P_s * 10 ** (power_ratio_db / 10)``. When ``nc`` is unset the
    compression variance is optimized over a log grid of ``nc_points``
    values on ``[nc_min, nc_max]``.
    """

    lambda_s: float = 1e-4
    lambda_ratio: float = 500.0
    D: float = 10.0
    epsilon: float = 1.0
    n_r: int = 1
    P_s: float = 1.0
    power_ratio_db: float = -10.0
    alpha: float = 4.0
    R: float = 1.0
    window_radius: float = 1000.0
    protocols: tuple[str, ...] = PROTOCOLS
    threshold_mode: str = "none"
    threshold: float = 0.0
    nc: float | None = None
    nc_min: float = 1e-8
    nc_max: float = 1e-2
    nc_points: int = 25
    noise_floor: float = 0.0
    dt_relays: bool = False
    trials: int = 100_000
    base_seed: int = 0
    batch_size: int = 500
    workers: int = 1

    def __post_init__(self):
        positive = ("lambda_s", "lambda_ratio", "D", "P_s", "nc_min", "nc_max", "batch_size")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")
        if not self.alpha > 2:
            raise ConfigError("alpha", f"must exceed 2 (the interference constant diverges), got {self.alpha}")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon", f"must lie in [0, 1], got {self.epsilon}")
        if not 0 <= self.n_r <= MAX_RELAYS:
            raise ConfigError("n_r", f"must lie in [0, {MAX_RELAYS}], got {self.n_r}")
        if self.R < 0:
            raise ConfigError("R", f"must be non-negative, got {self.R}")
        if self.window_radius < 0:
            raise ConfigError("window_radius", f"must be non-negative, got {self.window_radius}")
        if self.trials < 1:
            raise ConfigError("trials", f"must be at least 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be at least 1, got {self.workers}")
        if not self.protocols or set(self.protocols) - set(PROTOCOLS):
            raise ConfigError("protocols", f"must be a non-empty subset of {PROTOCOLS}, got {self.protocols}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ConfigError("threshold_mode", f"must be one of {THRESHOLD_MODES}, got {self.threshold_mode!r}")
        if self.threshold < 0:
            raise ConfigError("threshold", f"must be non-negative, got {self.threshold}")
        if self.nc is not None and not self.nc > 0:
            raise ConfigError("nc", f"must be positive, got {self.nc}")
        if self.nc_min > self.nc_max:
            raise ConfigError("nc_min", "must not exceed nc_max")
        if self.nc_points < 1:
            raise ConfigError("nc_points", f"must be at least 1, got {self.nc_points}")
        if self.noise_floor < 0:
            raise ConfigError("noise_floor", f"must be non-negative, got {self.noise_floor}")

    @property
    def lambda_r(self) -> float:
        return self.lambda_ratio * self.lambda_s

    @property
    def P_r(self) -> float:
        return self.P_s * 10.0 ** (self.power_ratio_db / 10.0)

    @property
    def nc_grid(self) -> tuple[float, ...]:
        if self.nc is not None:
            return (float(self.nc),)
        return tuple(float(x) for x in np.logspace(np.log10(self.nc_min), np.log10(self.nc_max), self.nc_points))

    @property
    def needs_internal_links(self) -> bool:
        return self.threshold_mode != "none"

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            protocols=tuple(self.protocols),
            R=self.R,
            P_s=self.P_s,
            P_r=self.P_r,
            threshold=ThresholdConfig(self.threshold_mode, self.threshold),
            nc_grid=self.nc_grid,
            noise_floor=self.noise_floor,
            dt_relays=self.dt_relays,
        )

    def replace(self, **changes) -> SimulationConfig:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["protocols"] = list(self.protocols)
        return d

    @classmethod
    def from_mapping(cls, values: dict) -> SimulationConfig:
        """Build from loosely typed values (strings from a file or the command line)."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(key, "unknown configuration field")
            kwargs[name] = _coerce(name, raw)
        return cls(**kwargs)


_INT_FIELDS = {"n_r", "nc_points", "trials", "base_seed", "batch_size", "workers"}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return tuple(raw) if name == "protocols" else raw
    text = raw.strip()
    try:
        if name == "protocols":
            return tuple(p.strip().upper() for p in text.replace(";", ",").split(",") if p.strip())
        if name == "threshold_mode":
            return text
        if name == "dt_relays":
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if name == "nc" and text.lower() in ("", "none", "opt", "optimize"):
            return None
        if name in _INT_FIELDS:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r}") from None

