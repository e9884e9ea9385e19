"""Conditional interference covariance at the typical receivers.

Conditioned on positions and fading, the interference seen by the typical
relays and destination is jointly Gaussian. Its covariance ``Q_Z`` is a sum of
rank-one terms ``P_t a_t a_t^H``, one per interfering transmitter ``t``, where
``a_t`` collects the gains from ``t`` to the receivers. Diagonal entries are
interference powers, off-diagonal entries the cross-correlations.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelBatch, ChannelRealization


def _gram(gains: np.ndarray) -> np.ndarray:
    # gains (..., T, n) -> sum_t a_t a_t^H, shape (..., n, n)
    return np.swapaxes(gains, -1, -2) @ gains.conj()


def interference_batch(
    batch: ChannelBatch,
    relay_active: np.ndarray | None,
    P_s: float,
    P_r: float,
    noise_floor: float = 0.0,
) -> np.ndarray:
    """Full ``(B, n_r + 1, n_r + 1)`` covariance over (relays..., destination).

    ``relay_active`` is a ``(B, Kmax, n_r)`` mask of transmitting interferer
    relays; ``None`` switches all interferer relays off.
    """
    q = P_s * _gram(batch.interferer_source)
    if relay_active is not None and batch.n_r > 0:
        b, kmax, n_r, n = batch.interferer_relay.shape
        rel = (batch.interferer_relay * relay_active[..., None]).reshape(b, kmax * n_r, n)
        q = q + P_r * _gram(rel)
    if noise_floor:
        q = q + noise_floor * np.eye(q.shape[-1])
    return q


def select_receivers(q_full: np.ndarray, order) -> np.ndarray:
    """Restrict a full covariance to relays ``order`` followed by the destination."""
    n_r = q_full.shape[-1] - 1
    idx = list(order) + [n_r]
    return q_full[..., idx, :][..., :, idx]


def interference_matrix(
    realization: ChannelRealization,
    relay_active: np.ndarray | None,
    P_s: float,
    P_r: float,
    receiver_order=None,
    noise_floor: float = 0.0,
) -> np.ndarray:
    """``Q_Z`` for one realization, ordered ``(u_1, ..., u_Na, d)``.

    ``relay_active`` is the ``(K, n_r)`` mask of transmitting interferer
    relays (``None`` means none transmit). ``receiver_order`` lists typical
    relay indices; by default every relay in index order.
    """
    batch = ChannelBatch.stack([realization])
    active = None if relay_active is None else np.asarray(relay_active, dtype=bool)[None]
    q = interference_batch(batch, active, P_s, P_r, noise_floor)[0]
    if receiver_order is None:
        return q
    return select_receivers(q, receiver_order)
