"""Closed-form outage of direct transmission in a Poisson field of interferers."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DtParams:
    lambda_s: float
    R: float
    alpha: float
    distance: float

    def __post_init__(self):
        if self.alpha <= 2:
            raise ValueError("alpha must exceed 2")
        if self.lambda_s < 0 or self.R < 0 or self.distance < 0:
            raise ValueError("lambda_s, R and distance must be non-negative")


def constant_C(alpha: float) -> float:
    """``(2 pi / alpha) Gamma(2 / alpha) Gamma(1 - 2 / alpha)``; diverges as alpha -> 2."""
    if alpha <= 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    delta = 2.0 / alpha
    return 2.0 * math.pi / alpha * math.gamma(delta) * math.gamma(1.0 - delta)


def dt_outage_closed_form(params: DtParams) -> float:
    """``1 - exp(-lambda_s C T^(2/alpha) d^2)`` with SIR threshold ``T = 2^R - 1``.

    Rayleigh fading on every link, no noise, interferers everywhere in the plane.
    """
    T = 2.0**params.R - 1.0
    exponent = params.lambda_s * constant_C(params.alpha) * T ** (2.0 / params.alpha) * params.distance**2
    return -math.expm1(-exponent)
