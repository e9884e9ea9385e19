"""Slow reference implementations used only by the tests.

Nothing here shares code with the package beyond the realization container.
Every signal is written as a coefficient vector over independent Gaussian
sources (typical source, typical relays, every interfering transmitter and
the compression noises), covariances are formed from those vectors and
entropies come from ``numpy.linalg.slogdet``.
"""

from itertools import combinations

import numpy as np


def powerset(items):
    items = tuple(items)
    return [c for k in range(len(items) + 1) for c in combinations(items, k)]


def interferers(real, P_s, P_r, relays_on=True):
    """``[(power, gains to (relay 0..n_r-1, d))]`` for every interfering transmitter."""
    out = []
    for k in range(real.n_interferers):
        out.append((P_s, np.asarray(real.interferer_source[k])))
        if relays_on:
            for m in range(real.n_r):
                out.append((P_r, np.asarray(real.interferer_relay[k, m])))
    return out


class SignalModel:
    """Jointly Gaussian signals of the typical cluster for one protocol state."""

    def __init__(self, real, active, compressing, n_c, P_s, P_r, relays_on=True):
        self.active = list(active)
        self.compressing = list(compressing)
        ext = interferers(real, P_s, P_r, relays_on)
        n_r = real.n_r
        # basis: X_s, X_active..., W_t..., Zc_compressing...
        powers = [P_s] + [P_r] * len(self.active) + [p for p, _ in ext] + [n_c] * len(self.compressing)
        self.powers = np.array(powers, dtype=float)
        n = len(powers)
        col_x = {m: 1 + j for j, m in enumerate(self.active)}
        w0 = 1 + len(self.active)
        c0 = w0 + len(ext)
        vec = {}
        e = np.zeros(n, complex)
        e[0] = 1
        vec["Xs"] = e
        for m in self.active:
            e = np.zeros(n, complex)
            e[col_x[m]] = 1
            vec[("X", m)] = e

        def received(rx):
            # rx: relay index or "d"
            col = n_r if rx == "d" else rx
            e = np.zeros(n, complex)
            e[0] = real.source_dest if rx == "d" else real.source_relay[rx]
            for m in self.active:
                if m == rx:
                    continue
                e[col_x[m]] = real.relay_dest[m] if rx == "d" else real.relay_relay[m, rx]
            for j, (_, g) in enumerate(ext):
                e[w0 + j] = g[col]
            return e

        for i in self.active:
            vec[("Y", i)] = received(i)
        vec["Yd"] = received("d")
        for j, t in enumerate(self.compressing):
            e = vec[("Y", t)].copy()
            e[c0 + j] = 1
            vec[("Yh", t)] = e
        self.vec = vec

    def cov(self, names):
        c = np.array([self.vec[v] for v in names])
        return (c * self.powers) @ c.conj().T

    def h(self, names):
        names = list(names)
        if not names:
            return 0.0
        sign, logdet = np.linalg.slogdet(np.pi * np.e * self.cov(names))
        return logdet / np.log(2) if sign.real > 0 else -np.inf

    def mi(self, a, b, c=()):
        a, b, c = list(a), list(b), list(c)
        return self.h(a + c) + self.h(b + c) - self.h(a + b + c) - self.h(c)

    def term(self, decoders, T, S):
        rest = [t for t in T if t not in S]
        X = lambda s: [("X", m) for m in s]
        Yh = lambda s: [("Yh", m) for m in s]
        Y = lambda s: [("Y", m) for m in s]
        first = self.mi(["Xs"] + X(decoders) + X(S), Yh(rest) + ["Yd"], X(rest))
        if not S:
            return first
        cond = ["Xs"] + X(decoders) + X(T) + Yh(rest) + ["Yd"]
        return first - self.mi(Yh(S), Y(S), cond)

    def maxmin(self, decoders):
        return max(
            min(self.term(decoders, T, S) for S in powerset(T)) for T in powerset(self.compressing)
        )


def decoding_set(real, R, P_s, P_r, active):
    """Relays of ``active`` whose SINR supports ``R``, all interferer relays on."""
    out = []
    for i in active:
        interference = sum(p * abs(g[i]) ** 2 for p, g in interferers(real, P_s, P_r))
        own = sum(P_r * abs(real.relay_relay[m, i]) ** 2 for m in active if m != i)
        sinr = abs(real.source_relay[i]) ** 2 * P_s / (interference + own)
        if R < np.log2(1 + sinr):
            out.append(i)
    return out


def protocol_outage(real, protocol, R, P_s, P_r, n_c, dt_relays=False):
    """Outage flag of one protocol with every relay active."""
    if real.n_interferers == 0:
        return False
    active = list(range(real.n_r))
    if protocol == "DT":
        model = SignalModel(real, [], [], n_c, P_s, P_r, relays_on=dt_relays)
        return not R < model.mi(["Xs"], ["Yd"])
    D = decoding_set(real, R, P_s, P_r, active)
    if protocol == "ODF":
        model = SignalModel(real, D, [], n_c, P_s, P_r)
        return not R < model.mi(["Xs"] + [("X", m) for m in D], ["Yd"])
    if protocol == "NNC":
        model = SignalModel(real, active, active, n_c, P_s, P_r)
        return not R < model.maxmin([])
    comp = [m for m in active if m not in D]
    model = SignalModel(real, active, comp, n_c, P_s, P_r)
    return not R < model.maxmin(D)


def random_psd(rng, n, rank=None, complex_=True):
    rank = n if rank is None else rank
    a = rng.standard_normal((n, rank))
    if complex_:
        a = a + 1j * rng.standard_normal((n, rank))
    return a @ a.conj().T
