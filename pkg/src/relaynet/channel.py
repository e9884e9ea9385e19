"""Channel gains ``g = h * sqrt(l)`` with Rayleigh fading and power-law path loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import NetworkBatch, NetworkGeometry


def _sq_dist(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d2 = (a[..., 0] - b[..., 0]) ** 2 + (a[..., 1] - b[..., 1]) ** 2
    if np.any(d2 == 0.0):
        raise ValueError("coincident points give a singular path loss")
    return d2


def path_loss(a, b, alpha: float):
    """``|a - b| ** -alpha``, broadcast over leading axes of the point arrays."""
    return _sq_dist(a, b) ** (-alpha / 2)


def _amplitude(a, b, alpha):
    # sqrt of the path loss
    return _sq_dist(a, b) ** (-alpha / 4)


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-variance circularly symmetric complex Gaussian coefficient(s)."""
    shape = () if size is None else np.atleast_1d(size).tolist()
    z = rng.standard_normal(tuple(shape) + (2,)).view(complex)[..., 0] / np.sqrt(2.0)
    return complex(z) if size is None else z


@dataclass(frozen=True)
class ChannelRealization:
    """All complex gains one trial needs.

    Typical-cluster relays are indexed ``0..n_r-1``. Receiver arrays over the
    typical cluster have ``n_r + 1`` columns: the relays followed by the
    destination.

    ``relay_relay[m, i]`` is the gain from relay ``m`` to relay ``i`` (zero on
    the diagonal). ``interferer_source[k]`` holds the gains from interfering
    source ``k`` to the typical receivers and ``interferer_relay[k, m]`` those
    from its ``m``-th relay. ``own_source_relay`` / ``own_relay_dest`` are the
    interferers' internal links, drawn only when threshold activation needs
    them.
    """

    source_relay: np.ndarray  # (n_r,)
    source_dest: complex
    relay_relay: np.ndarray  # (n_r, n_r)
    relay_dest: np.ndarray  # (n_r,)
    interferer_source: np.ndarray  # (K, n_r + 1)
    interferer_relay: np.ndarray  # (K, n_r, n_r + 1)
    own_source_relay: np.ndarray | None = None  # (K, n_r)
    own_relay_dest: np.ndarray | None = None  # (K, n_r)

    @property
    def n_r(self) -> int:
        return self.source_relay.shape[0]

    @property
    def n_interferers(self) -> int:
        return self.interferer_source.shape[0]


@dataclass(frozen=True)
class ChannelBatch:
    """Realizations stacked along a leading trial axis.

    Interferer arrays are zero-padded to the largest interferer count in the
    batch; ``present`` marks the real entries. Zero gains make padded rows
    contribute nothing to any interference sum.
    """

    source_relay: np.ndarray  # (B, n_r)
    source_dest: np.ndarray  # (B,)
    relay_relay: np.ndarray  # (B, n_r, n_r)
    relay_dest: np.ndarray  # (B, n_r)
    interferer_source: np.ndarray  # (B, Kmax, n_r + 1)
    interferer_relay: np.ndarray  # (B, Kmax, n_r, n_r + 1)
    present: np.ndarray  # (B, Kmax) bool
    own_source_relay: np.ndarray | None = None
    own_relay_dest: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.source_dest.shape[0]

    @property
    def n_r(self) -> int:
        return self.source_relay.shape[1]

    @property
    def counts(self) -> np.ndarray:
        return self.present.sum(axis=1)

    def __getitem__(self, b: int) -> ChannelRealization:
        k = int(self.present[b].sum())
        own_sr = None if self.own_source_relay is None else self.own_source_relay[b, :k]
        own_rd = None if self.own_relay_dest is None else self.own_relay_dest[b, :k]
        return ChannelRealization(
            self.source_relay[b],
            complex(self.source_dest[b]),
            self.relay_relay[b],
            self.relay_dest[b],
            self.interferer_source[b, :k],
            self.interferer_relay[b, :k],
            own_sr,
            own_rd,
        )

    @classmethod
    def stack(cls, realizations: list[ChannelRealization]) -> ChannelBatch:
        if not realizations:
            raise ValueError("cannot stack an empty list of realizations")
        n_r = realizations[0].n_r
        if any(r.n_r != n_r for r in realizations):
            raise ValueError("all realizations must share n_r")
        b = len(realizations)
        kmax = max(r.n_interferers for r in realizations)
        with_internal = all(r.own_source_relay is not None for r in realizations)

        src = np.zeros((b, kmax, n_r + 1), dtype=complex)
        rel = np.zeros((b, kmax, n_r, n_r + 1), dtype=complex)
        present = np.zeros((b, kmax), dtype=bool)
        own_sr = np.zeros((b, kmax, n_r), dtype=complex) if with_internal else None
        own_rd = np.zeros((b, kmax, n_r), dtype=complex) if with_internal else None
        for j, r in enumerate(realizations):
            k = r.n_interferers
            src[j, :k] = r.interferer_source
            rel[j, :k] = r.interferer_relay
            present[j, :k] = True
            if with_internal:
                own_sr[j, :k] = r.own_source_relay
                own_rd[j, :k] = r.own_relay_dest
        return cls(
            source_relay=np.stack([r.source_relay for r in realizations]),
            source_dest=np.array([r.source_dest for r in realizations], dtype=complex),
            relay_relay=np.stack([r.relay_relay for r in realizations]),
            relay_dest=np.stack([r.relay_dest for r in realizations]),
            interferer_source=src,
            interferer_relay=rel,
            present=present,
            own_source_relay=own_sr,
            own_relay_dest=own_rd,
        )


def realize_channel_batch(
    geometry: NetworkBatch,
    alpha: float,
    rngs,
    internal_links: bool = True,
) -> ChannelBatch:
    """Fresh fading for every link of every snapshot in ``geometry``.

    Trial ``j`` draws from ``rngs[j]`` only. Links emitted by sources and by
    relays come from separate child streams; within the source stream the
    destination-side gains are drawn first, so they do not depend on ``n_r``.
    The interferers' internal links are drawn last and only on request.
    """
    b, kmax, n_r = geometry.size, geometry.present.shape[1], geometry.n_r
    counts = geometry.present.sum(axis=1)
    n_pairs = n_r * (n_r - 1)

    h_sd = np.empty(b, dtype=complex)
    h_src = np.zeros((b, kmax, n_r + 1), dtype=complex)
    h_sr = np.empty((b, n_r), dtype=complex)
    h_rr = np.empty((b, n_pairs), dtype=complex)
    h_rd = np.empty((b, n_r), dtype=complex)
    h_rel = np.zeros((b, kmax, n_r, n_r + 1), dtype=complex)
    h_own = np.zeros((2, b, kmax, n_r), dtype=complex)
    for j, rng in enumerate(rngs):
        source_rng, relay_rng = rng.spawn(2)
        k = counts[j]
        h = sample_fading(source_rng, 1 + k * (n_r + 1))
        h_sd[j] = h[0]
        h_src[j, :k, n_r] = h[1 : 1 + k]
        h_src[j, :k, :n_r] = h[1 + k :].reshape(k, n_r)

        n_own = 2 * k * n_r if internal_links else 0
        h = sample_fading(relay_rng, 2 * n_r + n_pairs + k * n_r * (n_r + 1) + n_own)
        h_sr[j] = h[:n_r]
        h_rr[j] = h[n_r : n_r + n_pairs]
        pos = n_r + n_pairs
        h_rd[j] = h[pos : pos + n_r]
        pos += n_r
        h_rel[j, :k] = h[pos : pos + k * n_r * (n_r + 1)].reshape(k, n_r, n_r + 1)
        if internal_links:
            h_own[:, j, :k] = h[pos + k * n_r * (n_r + 1) :].reshape(2, k, n_r)

    src, dst = geometry.typical_source, geometry.typical_destination
    relays = geometry.typical_relays
    # typical receivers: relays then destination
    receivers = np.concatenate([relays, np.broadcast_to(dst, (b, 1, 2))], axis=1)
    mask = geometry.present

    source_dest = h_sd * _amplitude(src, dst, alpha)
    source_relay = h_sr * _amplitude(src, relays, alpha)
    relay_dest = h_rd * _amplitude(relays, dst, alpha)
    relay_relay = np.zeros((b, n_r, n_r), dtype=complex)
    if n_r > 1:
        off = ~np.eye(n_r, dtype=bool)
        m_idx, i_idx = np.nonzero(off)
        relay_relay[:, m_idx, i_idx] = h_rr * _amplitude(relays[:, m_idx], relays[:, i_idx], alpha)

    amp = _amplitude(geometry.sources[:, :, None, :], receivers[:, None], alpha)
    interferer_source = h_src * np.where(mask[..., None], amp, 0.0)
    amp = _amplitude(geometry.relays[:, :, :, None, :], receivers[:, None, None], alpha)
    interferer_relay = h_rel * np.where(mask[..., None, None], amp, 0.0)

    own_sr = own_rd = None
    if internal_links:
        m = mask[..., None]
        own_sr = h_own[0] * np.where(m, _amplitude(geometry.sources[:, :, None, :], geometry.relays, alpha), 0.0)
        own_rd = h_own[1] * np.where(
            m, _amplitude(geometry.relays, geometry.destinations[:, :, None, :], alpha), 0.0
        )
    return ChannelBatch(
        source_relay,
        source_dest,
        relay_relay,
        relay_dest,
        interferer_source,
        interferer_relay,
        mask.copy(),
        own_sr,
        own_rd,
    )


def realize_channels(
    geometry: NetworkGeometry,
    alpha: float,
    rng: np.random.Generator,
    internal_links: bool = True,
) -> ChannelRealization:
    """Draw fresh fading for every link of one snapshot."""
    batch = realize_channel_batch(NetworkBatch.stack([geometry]), alpha, [rng], internal_links)
    return batch[0]


