"""Covariance assembly and log-det entropies for jointly CCSG vectors.

Conditioned on one network realization every signal of the typical cluster is
a linear map ``v = H~ u`` of the independent Gaussian vector

    u = [X_s, X_u1..X_uNa, Z_u1..Z_uNa, Z_d, Zc_t1..Zc_tNnnc]

so ``Q_v = H~ Q_u H~^H`` holds every covariance needed. Entropies of any
subset of ``v`` come from principal submatrices of ``Q_v``.

All functions accept stacked matrices with arbitrary leading batch axes.
Entropies and mutual informations are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG2_PI_E = float(np.log2(np.pi * np.e))
MI_CLAMP = 1e-9
# squared Cholesky pivot (of the unit-diagonal matrix) treated as rank loss
SINGULAR_PIVOT = 1e-13
JITTER = 1e-12


class NumericalDegeneracyError(ArithmeticError):
    """A covariance that should be PSD could not be factorized."""


def _chol_pivots(c: np.ndarray):
    """Squared Cholesky pivots of one unit-diagonal matrix, with one jitter retry.

    Returns ``(pivots, jittered)`` or ``None`` when the matrix is not PSD.
    """
    try:
        return np.abs(np.diagonal(np.linalg.cholesky(c))) ** 2, False
    except np.linalg.LinAlgError:
        pass
    k = c.shape[-1]
    c = 0.5 * (c + c.conj().T) + JITTER * np.real(np.trace(c)) / k * np.eye(k)
    try:
        return np.abs(np.diagonal(np.linalg.cholesky(c))) ** 2, True
    except np.linalg.LinAlgError:
        return None


def log2det(q: np.ndarray):
    """``log2 det q`` for stacked Hermitian PSD matrices.

    Returns ``(values, bad)``: ``values`` is ``-inf`` where the matrix is
    singular within tolerance, and ``bad`` flags matrices that are not PSD even
    after one jitter step (their value is ``nan``).
    """
    q = np.asarray(q)
    shape = q.shape[:-2]
    k = q.shape[-1]
    flat = q.reshape((-1, k, k))
    n = flat.shape[0]
    values = np.full(n, np.nan)
    bad = np.zeros(n, dtype=bool)
    if k == 0:
        return np.zeros(shape), np.zeros(shape, dtype=bool)

    d = np.real(np.diagonal(flat, axis1=-2, axis2=-1))
    scale = d.max(axis=-1, keepdims=True)
    negative = (d < -1e-12 * np.maximum(scale, 0)).any(axis=-1)
    zero_var = (d <= 0).any(axis=-1) & ~negative
    bad[negative] = True
    values[zero_var] = -np.inf
    ok = ~(negative | zero_var)
    if ok.any():
        s = 1.0 / np.sqrt(d[ok])
        c = flat[ok] * s[:, :, None] * s[:, None, :]
        log_d = np.log2(d[ok]).sum(axis=-1)
        try:
            piv = np.abs(np.diagonal(np.linalg.cholesky(c), axis1=-2, axis2=-1)) ** 2
            singular = piv.min(axis=-1) <= SINGULAR_PIVOT
            v = log_d + np.log2(piv).sum(axis=-1)
            v[singular] = -np.inf
            values[ok] = v
        except np.linalg.LinAlgError:
            out = np.empty(c.shape[0])
            out_bad = np.zeros(c.shape[0], dtype=bool)
            for j in range(c.shape[0]):
                res = _chol_pivots(c[j])
                if res is None:
                    out[j] = np.nan
                    out_bad[j] = True
                    continue
                piv, jittered = res
                limit = 10 * JITTER if jittered else SINGULAR_PIVOT
                out[j] = -np.inf if piv.min() <= limit else log_d[j] + np.log2(piv).sum()
            values[ok] = out
            idx = np.flatnonzero(ok)
            bad[idx[out_bad]] = True
    return values.reshape(shape), bad.reshape(shape)


def _submatrix(q_v: np.ndarray, subset) -> np.ndarray:
    idx = np.asarray(sorted(subset), dtype=int)
    return q_v[..., idx[:, None], idx[None, :]]


def entropy_bits(q_v: np.ndarray, subset):
    """Entropy of the variables ``subset`` and the non-PSD mask, unchecked."""
    subset = tuple(subset)
    if not subset:
        shape = np.shape(q_v)[:-2]
        return np.zeros(shape), np.zeros(shape, dtype=bool)
    ld, bad = log2det(_submatrix(q_v, subset))
    return len(subset) * LOG2_PI_E + ld, bad


def _clamp(x):
    x = np.asarray(x, dtype=float)
    return np.where((x < 0) & (x >= -MI_CLAMP), 0.0, x)


def _combine(terms):
    # sum of +/- entropies; inf - inf and non-PSD pieces become nan
    with np.errstate(invalid="ignore"):
        total = sum(sign * h for sign, (h, _) in terms)
    bad = np.logical_or.reduce([b for _, (_, b) in terms])
    return np.where(bad, np.nan, total)


def _cmi_from(entropy, a, b, c):
    a, b, c = set(a), set(b), set(c)
    val = _combine([
        (1, entropy(a | c)),
        (1, entropy(b | c)),
        (-1, entropy(a | b | c)),
        (-1, entropy(c)),
    ])
    return _clamp(val)


def cmi_bits(q_v: np.ndarray, a, b, c=()):
    """``I(A; B | C)`` without raising; ``nan`` marks degenerate instances."""
    return _cmi_from(lambda s: entropy_bits(q_v, s), a, b, c)


def _checked(x):
    if np.any(np.isnan(x)):
        raise NumericalDegeneracyError("covariance is not PSD or the information is undefined")
    return float(x) if np.ndim(x) == 0 else x


def joint_entropy(q_v: np.ndarray, subset):
    """``log2 det(pi e Q_v[subset, subset])``; ``-inf`` for a singular block."""
    subset = tuple(subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    h, bad = entropy_bits(q_v, subset)
    if np.any(bad):
        raise NumericalDegeneracyError("covariance submatrix is not PSD")
    return float(h) if np.ndim(h) == 0 else h


def _check_sets(*sets, allow_empty_last=False):
    for i, s in enumerate(sets):
        if not s and not (allow_empty_last and i == len(sets) - 1):
            raise ValueError("index sets must be non-empty")
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if set(sets[i]) & set(sets[j]):
                raise ValueError("index sets must be disjoint")


def mutual_info(q_v: np.ndarray, a, b):
    """``I(A; B) = h(A) + h(B) - h(A, B)``."""
    _check_sets(tuple(a), tuple(b))
    return _checked(cmi_bits(q_v, a, b))


def conditional_mutual_info(q_v: np.ndarray, a, b, c=()):
    """``I(A; B | C) = h(A, C) + h(B, C) - h(A, B, C) - h(C)``."""
    _check_sets(tuple(a), tuple(b), tuple(c), allow_empty_last=True)
    return _checked(cmi_bits(q_v, a, b, c))


def assemble_qu(P_s, P_r, q_z, n_c, n_a: int, n_nnc: int) -> np.ndarray:
    """Block-diagonal ``diag(P_s, P_r I_Na, Q_Z, n_c I_Nnnc)``."""
    q_z = np.asarray(q_z)
    if q_z.shape[-2:] != (n_a + 1, n_a + 1):
        raise ValueError(f"Q_Z must be {(n_a + 1, n_a + 1)}, got {q_z.shape[-2:]}")
    if n_nnc and np.any(np.asarray(n_c) <= 0):
        raise ValueError("compression noise variance must be positive")
    m = 2 * n_a + n_nnc + 2
    q_u = np.zeros(q_z.shape[:-2] + (m, m), dtype=complex)
    q_u[..., 0, 0] = P_s
    ar = np.arange(1, n_a + 1)
    q_u[..., ar, ar] = P_r
    z = slice(n_a + 1, 2 * n_a + 2)
    q_u[..., z, z] = q_z
    cr = np.arange(2 * n_a + 2, m)
    q_u[..., cr, cr] = np.asarray(n_c)[..., None] if np.ndim(n_c) else n_c
    return q_u


def assemble_htilde(relay_gains, dest_gains, nnc_positions) -> np.ndarray:
    """Linear map from ``u`` to ``v = [X_s, X_u, Y_u, Y_d, Yhat_t]``.

    ``relay_gains[..., i, :]`` holds the gains from ``(s, u_1, ..., u_Na)`` into
    relay ``u_i`` (zero where the transmitter is ``u_i`` itself);
    ``dest_gains[..., :]`` the gains from the same transmitters into the
    destination. ``nnc_positions`` are positions within ``u_1..u_Na``.
    """
    relay_gains = np.asarray(relay_gains, dtype=complex)
    dest_gains = np.asarray(dest_gains, dtype=complex)
    n_a = dest_gains.shape[-1] - 1
    if relay_gains.shape[-2:] != (n_a, n_a + 1):
        raise ValueError("relay_gains must be (N_a, N_a + 1)")
    nnc = list(nnc_positions)
    if len(set(nnc)) != len(nnc) or any(not 0 <= t < n_a for t in nnc):
        raise ValueError(f"invalid compression positions {nnc} for N_a={n_a}")
    n_nnc = len(nnc)
    m = 2 * n_a + n_nnc + 2
    lead = np.broadcast_shapes(relay_gains.shape[:-2], dest_gains.shape[:-1])
    h = np.zeros(lead + (m, m), dtype=complex)
    ix = np.arange(n_a + 1)
    h[..., ix, ix] = 1.0
    y = slice(n_a + 1, 2 * n_a + 1)
    h[..., y, : n_a + 1] = relay_gains
    ia = np.arange(n_a)
    h[..., n_a + 1 + ia, n_a + 1 + ia] = 1.0
    yd = 2 * n_a + 1
    h[..., yd, : n_a + 1] = dest_gains
    h[..., yd, yd] = 1.0
    for l, t in enumerate(nnc):
        row = 2 * n_a + 2 + l
        h[..., row, : n_a + 1] = relay_gains[..., t, :]
        h[..., row, n_a + 1 + t] = 1.0
        h[..., row, row] = 1.0
    return h


def compute_qv(q_u: np.ndarray, h_tilde: np.ndarray) -> np.ndarray:
    """``H~ Q_u H~^H``, symmetrized."""
    if q_u.shape[-1] != h_tilde.shape[-1]:
        raise ValueError("H~ and Q_u are not conformable")
    q = h_tilde @ q_u @ np.conj(np.swapaxes(h_tilde, -1, -2))
    return 0.5 * (q + np.conj(np.swapaxes(q, -1, -2)))


@dataclass(frozen=True)
class CovarianceBundle:
    """``Q_u``, ``H~`` and ``Q_v`` for one protocol state, with named indices.

    ``relays`` are the transmitting typical relays ``u_1..u_Na`` (relay
    indices) and ``compressing`` the subset ``t_1..t_Nnnc`` that also emits a
    compressed observation.
    """

    q_u: np.ndarray
    h_tilde: np.ndarray
    q_v: np.ndarray
    relays: tuple[int, ...]
    compressing: tuple[int, ...]
    _pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_pos", {r: j for j, r in enumerate(self.relays)})

    @property
    def n_a(self) -> int:
        return len(self.relays)

    xs = 0

    @property
    def yd(self) -> int:
        return 2 * self.n_a + 1

    def x(self, relays) -> list[int]:
        return [1 + self._pos[r] for r in relays]

    def y(self, relays) -> list[int]:
        return [1 + self.n_a + self._pos[r] for r in relays]

    def yhat(self, relays) -> list[int]:
        where = {r: j for j, r in enumerate(self.compressing)}
        return [2 * self.n_a + 2 + where[r] for r in relays]

    def entropy(self, subset, rows=None):
        """Entropy of ``subset`` of ``v`` (optionally on some batch rows) and the non-PSD mask.

        Whenever both ``Y_t`` and ``Yhat_t`` are in the set, ``Yhat_t - Y_t`` is
        the compression noise, independent of everything else, so its entropy
        is split off exactly. Forming ``Q_v`` loses the small ``n_c`` against
        the relay signal power, which this avoids.
        """
        subset = set(subset)
        q_v = self.q_v if rows is None else self.q_v[rows]
        q_u = self.q_u if rows is None else self.q_u[rows]
        paired = [
            l for l, t in enumerate(self.compressing)
            if self.y([t])[0] in subset and 2 * self.n_a + 2 + l in subset
        ]
        subset -= {2 * self.n_a + 2 + l for l in paired}
        h, bad = entropy_bits(q_v, subset)
        for l in paired:
            cr = 2 * self.n_a + 2 + l
            h = h + LOG2_PI_E + np.log2(np.real(q_u[..., cr, cr]))
        return h, bad

    def cmi(self, a, b, c=(), rows=None):
        """``I(A; B | C)`` through :meth:`entropy`; ``nan`` marks degenerate rows."""
        return _cmi_from(lambda s: self.entropy(s, rows), a, b, c)

    def with_compression_noise(self, n_c) -> CovarianceBundle:
        """Same bundle with a different shared compression variance.

        Only the ``Yhat`` diagonal depends on ``n_c``; everything else is reused.
        """
        n_a, n_nnc = self.n_a, len(self.compressing)
        cr = np.arange(2 * n_a + 2, 2 * n_a + 2 + n_nnc)
        q_u = self.q_u.copy()
        q_v = self.q_v.copy()
        old = np.real(q_u[..., cr, cr])
        delta = np.asarray(n_c)[..., None] - old if np.ndim(n_c) else n_c - old
        q_u[..., cr, cr] += delta
        q_v[..., cr, cr] += delta
        return CovarianceBundle(q_u, self.h_tilde, q_v, self.relays, self.compressing)


def build_bundle(P_s, P_r, q_z, relay_gains, dest_gains, relays, compressing, n_c) -> CovarianceBundle:
    """Assemble a bundle; ``compressing`` must be a subset of ``relays``."""
    relays = tuple(relays)
    compressing = tuple(compressing)
    pos = {r: j for j, r in enumerate(relays)}
    q_u = assemble_qu(P_s, P_r, q_z, n_c, len(relays), len(compressing))
    h = assemble_htilde(relay_gains, dest_gains, [pos[t] for t in compressing])
    return CovarianceBundle(q_u, h, compute_qv(q_u, h), relays, compressing)
