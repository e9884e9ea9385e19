"""Spatial layout of network snapshots.

The typical destination sits at the origin with its source at ``(-D, 0)``.
Interfering sources form a homogeneous Poisson field inside a disc window
centered on the origin; each has a destination at distance ``D`` in a uniform
direction. Every cluster gets ``n_r`` potential relays, drawn independently
per cluster as the nearest points of a Poisson field of intensity
``lambda_r`` around the cluster center.

Points are plain ``(2,)`` float arrays; collections are ``(..., 2)`` arrays.
Sampling is done per trial from that trial's own random stream, but the
geometry is assembled for many trials at once in zero-padded arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ClusterGeometry:
    source: np.ndarray
    destination: np.ndarray
    center: np.ndarray
    relays: np.ndarray  # (n_r, 2), sorted by distance to center


@dataclass(frozen=True)
class NetworkGeometry:
    """Typical cluster plus the interferer field of one snapshot.

    Interferer ``k`` has source ``sources[k]``, destination
    ``destinations[k]``, center ``centers[k]`` and relays ``relays[k]``.
    """

    typical: ClusterGeometry
    sources: np.ndarray  # (K, 2)
    destinations: np.ndarray  # (K, 2)
    centers: np.ndarray  # (K, 2)
    relays: np.ndarray  # (K, n_r, 2)
    window_radius: float

    @property
    def n_interferers(self) -> int:
        return self.sources.shape[0]

    @property
    def n_r(self) -> int:
        return self.typical.relays.shape[0]

    @property
    def interferers(self) -> list[ClusterGeometry]:
        return [
            ClusterGeometry(self.sources[k], self.destinations[k], self.centers[k], self.relays[k])
            for k in range(self.n_interferers)
        ]


@dataclass(frozen=True)
class NetworkBatch:
    """Snapshots of several trials, interferer arrays padded to ``Kmax``.

    Padded interferer slots have ``present == False``; their coordinates are
    finite placeholders and must be masked by consumers.
    """

    typical_source: np.ndarray  # (2,)
    typical_destination: np.ndarray  # (2,)
    typical_center: np.ndarray  # (2,)
    typical_relays: np.ndarray  # (B, n_r, 2)
    sources: np.ndarray  # (B, Kmax, 2)
    destinations: np.ndarray  # (B, Kmax, 2)
    centers: np.ndarray  # (B, Kmax, 2)
    relays: np.ndarray  # (B, Kmax, n_r, 2)
    present: np.ndarray  # (B, Kmax)
    window_radius: float

    @property
    def size(self) -> int:
        return self.typical_relays.shape[0]

    @property
    def n_r(self) -> int:
        return self.typical_relays.shape[1]

    def __getitem__(self, b: int) -> NetworkGeometry:
        k = int(self.present[b].sum())
        typical = ClusterGeometry(
            self.typical_source, self.typical_destination, self.typical_center, self.typical_relays[b]
        )
        return NetworkGeometry(
            typical,
            self.sources[b, :k],
            self.destinations[b, :k],
            self.centers[b, :k],
            self.relays[b, :k],
            self.window_radius,
        )

    @classmethod
    def stack(cls, geometries: Sequence[NetworkGeometry]) -> NetworkBatch:
        first = geometries[0]
        b = len(geometries)
        n_r = first.n_r
        kmax = max(g.n_interferers for g in geometries)
        sources = np.zeros((b, kmax, 2))
        destinations = np.zeros((b, kmax, 2))
        centers = np.zeros((b, kmax, 2))
        relays = np.zeros((b, kmax, n_r, 2))
        present = np.zeros((b, kmax), dtype=bool)
        for j, g in enumerate(geometries):
            k = g.n_interferers
            sources[j, :k] = g.sources
            destinations[j, :k] = g.destinations
            centers[j, :k] = g.centers
            relays[j, :k] = g.relays
            present[j, :k] = True
        t = first.typical
        return cls(
            t.source,
            t.destination,
            t.center,
            np.stack([g.typical.relays for g in geometries]),
            sources,
            destinations,
            centers,
            relays,
            present,
            first.window_radius,
        )


def cluster_center(source, destination, epsilon: float) -> np.ndarray:
    """Point at fraction ``epsilon`` of the way from source to destination."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    source = np.asarray(source, dtype=float)
    destination = np.asarray(destination, dtype=float)
    return source + epsilon * (destination - source)


def _offsets(gaps: np.ndarray, phases: np.ndarray, lambda_r: float) -> np.ndarray:
    # squared distances are arrival times of a 1-D PPP of rate lambda_r*pi
    radius = np.sqrt(np.cumsum(gaps, axis=-1) / (lambda_r * np.pi))
    return np.stack([radius * np.cos(phases), radius * np.sin(phases)], axis=-1)


def sample_relays(center, n_r: int, lambda_r: float, rng: np.random.Generator) -> np.ndarray:
    """The ``n_r`` nearest points of a PPP of intensity ``lambda_r`` to ``center``.

    Returns an ``(n_r, 2)`` array ordered by increasing distance.
    """
    if n_r < 0:
        raise ValueError("n_r must be non-negative")
    if lambda_r <= 0:
        raise ValueError("lambda_r must be positive")
    gaps = rng.standard_exponential(n_r)
    phases = 2.0 * np.pi * rng.random(n_r)
    return np.asarray(center, dtype=float) + _offsets(gaps, phases, lambda_r)


def sample_network_batch(
    lambda_s: float,
    D: float,
    epsilon: float,
    n_r: int,
    lambda_r: float,
    window_radius: float,
    rngs: Sequence[np.random.Generator],
) -> NetworkBatch:
    """One snapshot per generator in ``rngs``.

    Each generator spawns a source-field and a relay-field child stream, so
    the interferer sources of a trial do not change when only relay
    parameters vary.
    """
    if lambda_s <= 0 or lambda_r <= 0:
        raise ValueError("intensities must be positive")
    if window_radius < 0:
        raise ValueError("window_radius must be non-negative")
    if n_r < 0:
        raise ValueError("n_r must be non-negative")
    mean_count = lambda_s * np.pi * window_radius**2

    draws = []
    for rng in rngs:
        source_rng, relay_rng = rng.spawn(2)
        k = source_rng.poisson(mean_count)
        u = source_rng.random((k, 3))
        # row 0: typical cluster, rows 1..k: interferers
        gaps = relay_rng.standard_exponential((k + 1, n_r))
        phases = relay_rng.random((k + 1, n_r))
        draws.append((k, u, gaps, phases))

    b = len(draws)
    kmax = max(d[0] for d in draws)
    # padded slots: unit uniforms and gaps keep coordinates finite and distinct
    u = np.ones((b, kmax, 3))
    gaps = np.ones((b, kmax + 1, n_r))
    phases = np.zeros((b, kmax + 1, n_r))
    present = np.zeros((b, kmax), dtype=bool)
    for j, (k, uj, gj, pj) in enumerate(draws):
        u[j, :k] = uj
        gaps[j, : k + 1] = gj
        phases[j, : k + 1] = pj
        present[j, :k] = True

    r = window_radius * np.sqrt(u[..., 0])
    theta = 2.0 * np.pi * u[..., 1]
    phi = 2.0 * np.pi * u[..., 2]
    sources = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    destinations = sources + D * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    centers = sources + epsilon * (destinations - sources)

    typ_source = np.array([-float(D), 0.0])
    typ_dest = np.zeros(2)
    typ_center = cluster_center(typ_source, typ_dest, epsilon)
    offsets = _offsets(gaps, 2.0 * np.pi * phases, lambda_r)
    return NetworkBatch(
        typ_source,
        typ_dest,
        typ_center,
        typ_center + offsets[:, 0],
        sources,
        destinations,
        centers,
        centers[:, :, None, :] + offsets[:, 1:],
        present,
        float(window_radius),
    )


def sample_network(
    lambda_s: float,
    D: float,
    epsilon: float,
    n_r: int,
    lambda_r: float,
    window_radius: float,
    rng: np.random.Generator,
) -> NetworkGeometry:
    """Draw one network snapshot."""
    return sample_network_batch(lambda_s, D, epsilon, n_r, lambda_r, window_radius, [rng])[0]
