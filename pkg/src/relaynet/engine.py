"""Monte Carlo orchestration: seeding, batching, parallel reduction, sweeps.

Trial ``k`` of a run draws all of its randomness from the seed
``base_seed + k``. Trials are grouped into fixed chunks of ``batch_size``
consecutive seeds; the chunking depends only on the configuration, so a run
gives bit-identical counts whatever the number of workers.

Sweeps reuse the same seeds at every axis value (common random numbers).
Axes that only change how a realization is evaluated (relay power,
threshold) evaluate every value on one shared set of sampled realizations.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import ChannelBatch, realize_channel_batch
from .config import SimulationConfig
from .geometry import sample_network_batch
from .protocols import COMPRESSING, ProtocolConfig, TrialFlags, evaluate_batch

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
DEGENERATE_BUDGET = 1e-3
AXES = ("lambda_ratio", "power_ratio_db", "epsilon", "n_r", "threshold")
# axes that leave the sampled realizations untouched
EVALUATION_AXES = ("power_ratio_db", "threshold")


class DegeneracyBudgetExceeded(RuntimeError):
    pass


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval as ``(center, half_width)``."""
    if n <= 0:
        return math.nan, math.nan
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return center, half


@dataclass(frozen=True)
class OutageEstimate:
    protocol: str
    trials: int  # non-degenerate trials
    outages: int
    degenerate: int
    nc: float | None = None
    axis: str = ""
    value: float | None = None
    n_r: int = 0
    power_ratio_db: float = 0.0
    epsilon: float = 0.0

    @property
    def op(self) -> float:
        return self.outages / self.trials if self.trials else math.nan

    @property
    def ci_halfwidth(self) -> float:
        return wilson_interval(self.outages, self.trials)[1]

    @property
    def standard_error(self) -> float:
        """Wilson half-width at one standard deviation."""
        return wilson_interval(self.outages, self.trials, z=1.0)[1]

    def contains(self, p: float, n_se: float = 3.0) -> bool:
        center, half = wilson_interval(self.outages, self.trials, z=n_se)
        return abs(p - center) <= half


@dataclass
class Counts:
    """Per-protocol ``(width,)`` outage and degeneracy tallies."""

    outages: dict[str, np.ndarray]
    degenerate: dict[str, np.ndarray]
    trials: int

    def __add__(self, other: Counts) -> Counts:
        return Counts(
            {p: self.outages[p] + other.outages[p] for p in self.outages},
            {p: self.degenerate[p] + other.degenerate[p] for p in self.degenerate},
            self.trials + other.trials,
        )

    @classmethod
    def from_flags(cls, flags: TrialFlags) -> Counts:
        n = next(iter(flags.outage.values())).shape[0]
        return cls(
            {p: v.sum(axis=0) for p, v in flags.outage.items()},
            {p: v.sum(axis=0) for p, v in flags.degenerate.items()},
            n,
        )


def trial_seeds(config: SimulationConfig) -> range:
    return range(config.base_seed, config.base_seed + config.trials)


def chunks(config: SimulationConfig) -> list[range]:
    seeds = trial_seeds(config)
    size = config.batch_size
    return [seeds[i : i + size] for i in range(0, len(seeds), size)]


def sample_batch(config: SimulationConfig, seeds) -> ChannelBatch:
    """Realizations for ``seeds``; each seed owns a geometry and a fading stream."""
    geo_rngs, fading_rngs = [], []
    for seed in seeds:
        g, f = np.random.default_rng(seed).spawn(2)
        geo_rngs.append(g)
        fading_rngs.append(f)
    geometry = sample_network_batch(
        config.lambda_s,
        config.D,
        config.epsilon,
        config.n_r,
        config.lambda_r,
        config.window_radius,
        geo_rngs,
    )
    return realize_channel_batch(geometry, config.alpha, fading_rngs, config.needs_internal_links)


def run_trial(config: SimulationConfig, seed: int) -> TrialFlags:
    """Flags of every configured protocol for the single trial ``seed``.

    Each array has one entry per compression variance of the grid (one entry
    for protocols without compression).
    """
    flags = evaluate_batch(config.protocol_config(), sample_batch(config, [seed]))
    return TrialFlags({p: v[0] for p, v in flags.outage.items()}, {p: v[0] for p, v in flags.degenerate.items()})


def _protocol_config(config: SimulationConfig, grid=None) -> ProtocolConfig:
    pc = config.protocol_config()
    return pc if grid is None else dataclasses.replace(pc, nc_grid=tuple(grid))


def _chunk_counts(args) -> list[Counts]:
    base, variants, grid, seeds = args
    batch = sample_batch(base, seeds)
    return [Counts.from_flags(evaluate_batch(_protocol_config(v, grid), batch)) for v in variants]


def simulate(config: SimulationConfig, variants=None, grid=None) -> list[Counts]:
    """Tally flags over all trials for each evaluation variant of ``config``.

    ``variants`` are configurations that differ from ``config`` only in
    evaluation fields; they all see the same sampled realizations. ``grid``
    overrides the compression-variance grid of every variant.
    """
    variants = [config] if variants is None else list(variants)
    if any(v.needs_internal_links for v in variants) and not config.needs_internal_links:
        # draw the relays' own links so every variant sees the same fading
        base = config.replace(threshold_mode="source_relay")
    else:
        base = config
    jobs = [(base, variants, grid, seeds) for seeds in chunks(config)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_chunk_counts, jobs))
    else:
        results = [_chunk_counts(job) for job in jobs]
    totals = results[0]
    for r in results[1:]:
        totals = [a + b for a, b in zip(totals, r)]
    return totals


def _estimate(config, counts: Counts, protocol: str, j: int, nc, axis="", value=None) -> OutageEstimate:
    degenerate = int(counts.degenerate[protocol][j])
    return OutageEstimate(
        protocol=protocol,
        trials=counts.trials - degenerate,
        outages=int(counts.outages[protocol][j]),
        degenerate=degenerate,
        nc=nc if protocol in COMPRESSING else None,
        axis=axis,
        value=value,
        n_r=config.n_r,
        power_ratio_db=config.power_ratio_db,
        epsilon=config.epsilon,
    )


def _estimates(config: SimulationConfig, counts: Counts, grid=None, axis="", value=None) -> list[OutageEstimate]:
    """Per protocol, the estimate at the grid point of lowest outage frequency."""
    grid = config.nc_grid if grid is None else tuple(grid)
    out = []
    for p in config.protocols:
        valid = counts.trials - counts.degenerate[p]
        op = np.where(valid > 0, counts.outages[p] / np.maximum(valid, 1), np.inf)
        j = int(np.argmin(op))  # first minimum: ties go to the smaller n_c
        out.append(_estimate(config, counts, p, j, grid[j], axis, value))
    return out


def check_degeneracy(estimates, total_trials: int, budget: float = DEGENERATE_BUDGET) -> None:
    for e in estimates:
        if e.degenerate > budget * total_trials:
            raise DegeneracyBudgetExceeded(
                f"{e.protocol}: {e.degenerate} of {total_trials} trials were numerically degenerate"
            )


def estimate_op(config: SimulationConfig) -> list[OutageEstimate]:
    """Outage probability per protocol, compression variance optimized on the grid."""
    estimates = _estimates(config, simulate(config)[0])
    check_degeneracy(estimates, config.trials)
    return estimates


def optimize_nc(config: SimulationConfig, grid=None):
    """Best compression variance on ``grid``, every point on the same seeds.

    Returns ``(best_nc, estimates, trace)``: ``estimates`` has one row per
    protocol at that protocol's best grid point, ``trace`` one row per
    (grid point, protocol). ``best_nc`` is the minimizer for the first
    compressing protocol requested (the first grid point if there is none).
    """
    grid = config.nc_grid if grid is None else tuple(sorted(float(g) for g in grid))
    if not grid or min(grid) <= 0:
        raise ValueError("grid must be non-empty with positive values")
    counts = simulate(config, grid=grid)[0]
    trace = [
        _estimate(config, counts, p, j if p in COMPRESSING else 0, n_c, "nc", n_c)
        for j, n_c in enumerate(grid)
        for p in config.protocols
    ]
    estimates = _estimates(config, counts, grid)
    check_degeneracy(estimates, config.trials)
    compressing = [e.nc for e in estimates if e.protocol in COMPRESSING]
    return (compressing[0] if compressing else grid[0]), estimates, trace


def sweep(config: SimulationConfig, axis: str, values) -> list[OutageEstimate]:
    """One estimate per (value, protocol), rows in input order."""
    axis = {"power_ratio_dB": "power_ratio_db"}.get(axis, axis)
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("values must be non-empty")
    caster = int if axis == "n_r" else float
    variants = [config.replace(**{axis: caster(v)}) for v in values]
    rows: list[OutageEstimate] = []
    if axis in EVALUATION_AXES:
        counts = simulate(config, variants)
    else:
        counts = [simulate(v)[0] for v in variants]
    for v, value, c in zip(variants, values, counts):
        estimates = _estimates(v, c, axis=axis, value=caster(value))
        check_degeneracy(estimates, v.trials)
        rows.extend(estimates)
    return rows
