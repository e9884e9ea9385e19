"""Relay activation, decoding sets and outage decisions for DT, ODF, NNC and MNNC.

Everything here is vectorized over a leading trial axis. A single realization
is a batch of one (see :func:`evaluate_trial`).

Relay indices are 0-based. A trial is in outage for a protocol when the
attempted rate ``R`` is not strictly below the achievable rate; equality
counts as outage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .channel import ChannelBatch, ChannelRealization
from .gaussian_info import CovarianceBundle, build_bundle
from .interference import interference_batch, select_receivers

PROTOCOLS = ("DT", "ODF", "NNC", "MNNC")
COMPRESSING = ("NNC", "MNNC")
THRESHOLD_MODES = ("none", "source_relay", "relay_destination")
MAX_RELAYS = 12


@dataclass(frozen=True)
class ThresholdConfig:
    mode: str = "none"
    threshold: float = 0.0

    def __post_init__(self):
        if self.mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold mode must be one of {THRESHOLD_MODES}, got {self.mode!r}")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")


@dataclass(frozen=True)
class ProtocolConfig:
    """What to evaluate on each realization.

    ``nc_grid`` lists the shared compression variances tried for NNC/MNNC;
    the outage flags of those protocols carry one column per grid value.
    ``dt_relays`` lets interferer relays transmit in the direct-transmission
    baseline (off by default: the baseline is a network without relays).
    """

    protocols: tuple[str, ...] = PROTOCOLS
    R: float = 1.0
    P_s: float = 1.0
    P_r: float = 0.1
    threshold: ThresholdConfig = field(default_factory=ThresholdConfig)
    nc_grid: tuple[float, ...] = (1e-4,)
    noise_floor: float = 0.0
    dt_relays: bool = False

    def __post_init__(self):
        unknown = set(self.protocols) - set(PROTOCOLS)
        if unknown:
            raise ValueError(f"unknown protocols {sorted(unknown)}")
        if not self.nc_grid or min(self.nc_grid) <= 0:
            raise ValueError("nc_grid must be non-empty and positive")

    def width(self, protocol: str) -> int:
        return len(self.nc_grid) if protocol in COMPRESSING else 1


@dataclass
class TrialFlags:
    """Per-protocol ``(B, width)`` outage and degeneracy masks."""

    outage: dict[str, np.ndarray]
    degenerate: dict[str, np.ndarray]


def subsets(items):
    """All subsets of ``items`` by increasing size, the empty set first."""
    items = tuple(items)
    for k in range(len(items) + 1):
        yield from combinations(items, k)


def activation_set(source_relay, relay_dest, threshold: ThresholdConfig) -> np.ndarray:
    """Mask of relays allowed to transmit under threshold activation.

    Works on the gains of any cluster, with any leading shape.
    """
    if threshold.mode == "none":
        return np.ones(np.shape(source_relay), dtype=bool)
    gains = source_relay if threshold.mode == "source_relay" else relay_dest
    return np.abs(gains) > threshold.threshold


def decoding_set(R, source_relay, relay_relay, relay_interference, active, P_s, P_r) -> np.ndarray:
    """Mask of active relays that decode the source, treating everything else as noise.

    ``relay_interference[..., i]`` is the interference power at relay ``i``
    with every active interferer relay transmitting; all active typical relays
    also transmit. ``relay_relay[..., m, i]`` is the gain from ``m`` to ``i``.
    """
    active = np.asarray(active, dtype=bool)
    own = P_r * np.einsum("...mi,...m->...i", np.abs(relay_relay) ** 2, active)
    noise = np.real(relay_interference) + own
    signal = np.abs(source_relay) ** 2 * P_s
    with np.errstate(divide="ignore"):
        rate = np.log2(1.0 + signal / noise)
    return active & (R < rate)


def channel_gains(batch: ChannelBatch, relays) -> tuple[np.ndarray, np.ndarray]:
    """Gain matrices into the relays ``relays`` and into the destination.

    Returns ``(relay_gains, dest_gains)`` shaped ``(B, Na, Na + 1)`` and
    ``(B, Na + 1)``, transmitters ordered ``(s, u_1, ..., u_Na)``.
    """
    u = list(relays)
    into_relays = np.swapaxes(batch.relay_relay[:, u][:, :, u], -1, -2)
    relay_gains = np.concatenate([batch.source_relay[:, u, None], into_relays], axis=-1)
    dest_gains = np.concatenate([batch.source_dest[:, None], batch.relay_dest[:, u]], axis=-1)
    return relay_gains, dest_gains


def _take(bundle: CovarianceBundle, rows) -> CovarianceBundle:
    return CovarianceBundle(bundle.q_u[rows], bundle.h_tilde[rows], bundle.q_v[rows], bundle.relays, bundle.compressing)


def maxmin_term(bundle: CovarianceBundle, decoders, T, S, rows=None) -> np.ndarray:
    """One inner term of the mixed noisy-network-coding rate.

    ``I(X_s, X_D, X_S; Yhat_{T\\S}, Y_d | X_{T\\S})
    - I(Yhat_S; Y_S | X_s, X_D, X_T, Yhat_{T\\S}, Y_d)``; relays outside
    ``D`` and ``T`` are left out of every set and so act as noise.
    ``rows`` restricts a batched bundle to some of its rows.
    """
    rest = [t for t in T if t not in S]
    a = [bundle.xs] + bundle.x(decoders) + bundle.x(S)
    b = bundle.yhat(rest) + [bundle.yd]
    term = bundle.cmi(a, b, bundle.x(rest), rows)
    if S:
        cond = [bundle.xs] + bundle.x(decoders) + bundle.x(T) + bundle.yhat(rest) + [bundle.yd]
        term = term - bundle.cmi(bundle.yhat(S), bundle.y(S), cond, rows)
    return term


def maxmin_rate(bundle: CovarianceBundle, decoders=()) -> np.ndarray:
    """Exhaustive ``max_T min_S`` rate over subsets of the compressing relays."""
    best = None
    for T in subsets(bundle.compressing):
        worst = None
        for S in subsets(T):
            f = maxmin_term(bundle, decoders, T, S)
            worst = f if worst is None else np.minimum(worst, f)
        best = worst if best is None else np.maximum(best, worst)
    return best


def maxmin_outage(R, bundle: CovarianceBundle, decoders=(), undecided=None, skip_empty=False):
    """Outage of the max-min rate with early exits.

    A subset ``T`` is abandoned at its first ``S`` whose term is at or below
    ``R``; a row stops as soon as some ``T`` has every term above ``R``.
    Returns ``(outage, degenerate)``. ``undecided`` restricts evaluation to
    some rows (others report no outage); ``skip_empty`` skips ``T = {}``
    when the caller has already evaluated it.
    """
    if bundle.q_v.ndim == 2:
        single = _take(bundle, np.newaxis)
        mask = None if undecided is None else np.atleast_1d(undecided)
        outage, degenerate = maxmin_outage(R, single, decoders, mask, skip_empty)
        return outage[0], degenerate[0]
    n = bundle.q_v.shape[0]
    undecided = np.ones(n, dtype=bool) if undecided is None else undecided.copy()
    success = np.zeros(n, dtype=bool)
    degenerate = np.zeros(n, dtype=bool)
    for T in subsets(bundle.compressing):
        if skip_empty and not T:
            continue
        alive = undecided.copy()
        for S in subsets(T):
            rows = np.flatnonzero(alive)
            if rows.size == 0:
                break
            f = maxmin_term(bundle, decoders, T, S, rows)
            nan = np.isnan(f)
            degenerate[rows[nan]] = True
            undecided[rows[nan]] = False
            alive[rows[nan | ~(f > R)]] = False
        success |= alive
        undecided &= ~alive
        if not undecided.any():
            break
    return undecided, degenerate


def dt_outage(R, bundle: CovarianceBundle):
    """Direct transmission: outage unless ``R < I(X_s; Y_d)``."""
    return _outage(R, bundle.cmi([bundle.xs], [bundle.yd]))


def odf_outage(R, bundle: CovarianceBundle):
    """Decoders act as distributed antennas: outage unless ``R < I(X_s, X_D; Y_d)``.

    ``bundle.relays`` is the decoding set.
    """
    mi = bundle.cmi([bundle.xs] + bundle.x(bundle.relays), [bundle.yd])
    return _outage(R, mi)


def nnc_outage(R, bundle: CovarianceBundle):
    """Every transmitting relay compresses; ``bundle.compressing`` is the active set."""
    return maxmin_outage(R, bundle)


def mnnc_outage(R, bundle: CovarianceBundle, decoders):
    """Decoders forward, the remaining transmitting relays compress."""
    return maxmin_outage(R, bundle, tuple(decoders))


def _outage(R, mi):
    mi = np.asarray(mi)
    degenerate = np.isnan(mi)
    return ~(R < mi) & ~degenerate, degenerate


def _masks_to_relays(mask_row) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(mask_row))


def _group_rows(*masks):
    # group trials sharing the same relay sets
    n_r = masks[0].shape[1]
    weights = 1 << np.arange(n_r * len(masks))
    key = np.concatenate(masks, axis=1).astype(np.int64) @ weights if n_r else np.zeros(masks[0].shape[0], int)
    for value in np.unique(key):
        rows = np.flatnonzero(key == value)
        yield rows, [_masks_to_relays(m[rows[0]]) for m in masks]


def evaluate_batch(config: ProtocolConfig, batch: ChannelBatch) -> TrialFlags:
    """Outage flags of every requested protocol on every trial of ``batch``."""
    n_r = batch.n_r
    if n_r > MAX_RELAYS:
        raise ValueError(f"n_r={n_r} exceeds the subset-enumeration limit {MAX_RELAYS}")
    B = batch.size
    th = config.threshold
    A_s = activation_set(batch.source_relay, batch.relay_dest, th)
    if th.mode == "none":
        A_x = np.broadcast_to(batch.present[..., None], batch.present.shape + (n_r,))
    else:
        if batch.own_source_relay is None:
            raise ValueError("threshold activation needs the interferers' internal links")
        A_x = activation_set(batch.own_source_relay, batch.own_relay_dest, th) & batch.present[..., None]

    P_s, P_r, R = config.P_s, config.P_r, config.R
    # interferer relays transmit whenever active (B_x = A_x) for the relaying protocols
    q_on = interference_batch(batch, A_x, P_s, P_r, config.noise_floor)
    silent = (batch.counts == 0) & (config.noise_floor == 0)
    live = np.flatnonzero(~silent)

    outage = {p: np.zeros((B, config.width(p)), dtype=bool) for p in config.protocols}
    degenerate = {p: np.zeros((B, config.width(p)), dtype=bool) for p in config.protocols}
    if live.size == 0:
        return TrialFlags(outage, degenerate)

    sub = _subbatch(batch, live)
    q_on = q_on[live]
    A_s = A_s[live]
    relay_power = np.real(np.diagonal(q_on, axis1=-2, axis2=-1))[:, :n_r]
    D = decoding_set(R, sub.source_relay, sub.relay_relay, relay_power, A_s, P_s, P_r)

    def store(p, rows, out, deg):
        outage[p][live[rows]] = out.reshape(len(rows), -1)
        degenerate[p][live[rows]] = deg.reshape(len(rows), -1)

    if "DT" in config.protocols:
        relays_dt = A_x[live] if config.dt_relays else None
        q_dt = interference_batch(sub, relays_dt, P_s, P_r, config.noise_floor)
        rg, dg = channel_gains(sub, ())
        bundle = build_bundle(P_s, P_r, select_receivers(q_dt, ()), rg, dg, (), (), 1.0)
        store("DT", np.arange(live.size), *dt_outage(R, bundle))

    if "ODF" in config.protocols:
        for rows, (dec,) in _group_rows(D):
            rg, dg = channel_gains(_subbatch(sub, rows), dec)
            bundle = build_bundle(P_s, P_r, select_receivers(q_on[rows], dec), rg, dg, dec, (), 1.0)
            store("ODF", rows, *odf_outage(R, bundle))

    for p in COMPRESSING:
        if p not in config.protocols:
            continue
        dec_mask = D if p == "MNNC" else np.zeros_like(D)
        for rows, (act, dec) in _group_rows(A_s, dec_mask):
            comp = tuple(r for r in act if r not in dec)
            out, deg = _compressing_outage(config, _subbatch(sub, rows), q_on[rows], act, dec, comp)
            store(p, rows, out, deg)
    return TrialFlags(outage, degenerate)


def _compressing_outage(config, sub, q_z_full, active, decoders, compressing):
    """NNC/MNNC flags over the compression grid for trials sharing one state."""
    R = config.R
    grid = config.nc_grid
    rg, dg = channel_gains(sub, active)
    base = build_bundle(
        config.P_s, config.P_r, select_receivers(q_z_full, active), rg, dg, active, compressing, grid[0]
    )
    n = sub.size
    out = np.zeros((n, len(grid)), dtype=bool)
    deg = np.zeros((n, len(grid)), dtype=bool)
    # the T = {} term does not involve any compressed observation
    first, first_deg = _outage(R, maxmin_term(base, decoders, (), ()))
    deg[first_deg] = True
    pending = first & ~first_deg
    if not compressing or not pending.any():
        out[pending] = True
        return out, deg
    rows = np.flatnonzero(pending)
    reduced = _take(base, rows)
    for j, n_c in enumerate(grid):
        bundle = reduced.with_compression_noise(n_c)
        o, d = maxmin_outage(R, bundle, decoders, skip_empty=True)
        out[rows, j] = o
        deg[rows, j] = d
    return out, deg


def _subbatch(batch: ChannelBatch, rows) -> ChannelBatch:
    pick = lambda a: None if a is None else a[rows]
    return ChannelBatch(
        batch.source_relay[rows],
        batch.source_dest[rows],
        batch.relay_relay[rows],
        batch.relay_dest[rows],
        batch.interferer_source[rows],
        batch.interferer_relay[rows],
        batch.present[rows],
        pick(batch.own_source_relay),
        pick(batch.own_relay_dest),
    )


def evaluate_trial(config: ProtocolConfig, realization: ChannelRealization) -> TrialFlags:
    """Flags for one realization; arrays have shape ``(width,)`` per protocol."""
    flags = evaluate_batch(config, ChannelBatch.stack([realization]))
    return TrialFlags(
        {p: v[0] for p, v in flags.outage.items()},
        {p: v[0] for p, v in flags.degenerate.items()},
    )
