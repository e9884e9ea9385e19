import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracle import decoding_set as oracle_decoding_set, protocol_outage, random_psd
from relaynet.channel import realize_channel_batch
from relaynet.config import SimulationConfig
from relaynet.engine import sample_batch
from relaynet.gaussian_info import build_bundle
from relaynet.geometry import sample_network_batch
from relaynet.interference import interference_matrix
from relaynet.protocols import (
    ProtocolConfig,
    ThresholdConfig,
    activation_set,
    decoding_set,
    dt_outage,
    evaluate_batch,
    evaluate_trial,
    maxmin_outage,
    maxmin_rate,
    odf_outage,
    subsets,
)

seeds = st.integers(0, 2**32 - 1)


def realizations(n, n_r=2, seed=0, **kw):
    """Dense small networks so that outages are common, internal links included."""
    args = dict(lambda_s=1e-3, window_radius=100.0, lambda_ratio=50.0, n_r=n_r, threshold_mode="source_relay")
    args.update(kw)
    return sample_batch(SimulationConfig(**args), range(seed, seed + n))


def random_bundle(rng, n_a, compressing, n_c):
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    rg = c(n_a, n_a + 1) * 0.7
    for i in range(n_a):
        rg[i, i + 1] = 0
    q_z = random_psd(rng, n_a + 1) * rng.uniform(0.05, 1.0)
    return build_bundle(1.0, rng.uniform(0.05, 1.0), q_z, rg, c(n_a + 1), range(n_a), compressing, n_c)


def test_subsets_order():
    assert list(subsets((1, 2))) == [(), (1,), (2,), (1, 2)]


class TestActivation:
    def test_zero_threshold_all_active(self):
        g = np.array([0.1 + 0.1j, 1e-9])
        assert activation_set(g, g, ThresholdConfig("source_relay", 0.0)).all()

    def test_infinite_threshold_none_active(self):
        g = np.array([5.0, 7.0j])
        assert not activation_set(g, g, ThresholdConfig("relay_destination", np.inf)).any()

    def test_example(self):
        sr = np.array([0.5, 0.1])
        rd = np.array([0.0, 9.0])
        np.testing.assert_array_equal(activation_set(sr, rd, ThresholdConfig("source_relay", 0.3)), [True, False])
        np.testing.assert_array_equal(activation_set(sr, rd, ThresholdConfig("relay_destination", 0.3)), [False, True])

    def test_mode_none(self):
        assert activation_set(np.zeros(3), np.zeros(3), ThresholdConfig()).all()

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            ThresholdConfig("everything", 1.0)


class TestDecodingSet:
    def test_boundary_excluded(self):
        # SINR exactly 1 and R = 1: log2(2) == 1 is not strictly above R
        d = decoding_set(1.0, np.array([1.0]), np.zeros((1, 1)), np.array([1.0]), np.array([True]), 1.0, 0.1)
        assert not d.any()

    def test_empty_active(self):
        d = decoding_set(1.0, np.ones(2), np.ones((2, 2)), np.ones(2), np.zeros(2, bool), 1.0, 0.1)
        assert not d.any()

    def test_brute_force(self):
        batch = realizations(30, n_r=2)
        for k in range(batch.size):
            r = batch[k]
            q = interference_matrix(r, np.ones((r.n_interferers, 2), bool), 1.0, 0.1)
            got = decoding_set(1.0, r.source_relay, r.relay_relay, np.real(np.diag(q))[:2], np.ones(2, bool), 1.0, 0.1)
            assert list(np.flatnonzero(got)) == oracle_decoding_set(r, 1.0, 1.0, 0.1, [0, 1])


class TestSingleProtocols:
    def test_dt_boundary_is_outage(self):
        b = build_bundle(1.0, 0.1, [[1.0]], np.zeros((0, 1)), [1.0], (), (), 1.0)
        out, deg = dt_outage(1.0, b)
        assert out and not deg

    def test_dt_matches_formula(self, rng):
        g, i_d = 0.4 + 0.2j, 0.03
        b = build_bundle(1.0, 0.1, [[i_d]], np.zeros((0, 1)), [g], (), (), 1.0)
        rate = np.log2(1 + abs(g) ** 2 / i_d)
        assert bool(dt_outage(rate + 1e-9, b)[0])
        assert not bool(dt_outage(rate - 1e-9, b)[0])

    def test_odf_single_relay_hand_covariance(self):
        # v = (X_s, X_r, Y_d); I(X_s, X_r; Y_d) = log2(1 + (|g_sd|^2 P_s + |g_rd|^2 P_r) / I_d)
        g_sr, g_sd, g_rd, P_s, P_r, i_d = 0.3j, 0.2, 0.5 - 0.5j, 1.0, 0.2, 0.04
        q_z = np.array([[0.1, 0.01], [0.01, i_d]])
        b = build_bundle(P_s, P_r, q_z, [[g_sr, 0]], [g_sd, g_rd], (0,), (), 1.0)
        rate = np.log2(1 + (abs(g_sd) ** 2 * P_s + abs(g_rd) ** 2 * P_r) / i_d)
        assert bool(odf_outage(rate + 1e-9, b)[0])
        assert not bool(odf_outage(rate - 1e-9, b)[0])

    @given(seeds, st.integers(1, 3), st.floats(0.1, 4.0), st.sampled_from([1e-4, 1e-2, 1.0]))
    def test_early_exit_matches_exhaustive(self, seed, n_a, R, n_c):
        rng = np.random.default_rng(seed)
        n_dec = int(rng.integers(0, n_a + 1))
        decoders = tuple(range(n_dec))
        b = random_bundle(rng, n_a, tuple(range(n_dec, n_a)), n_c)
        out, deg = maxmin_outage(R, b, decoders)
        assert not deg.any()
        assert bool(out) == bool(not R < maxmin_rate(b, decoders))


class TestEvaluate:
    config = ProtocolConfig(nc_grid=(1e-4, 1e-2, 1.0))

    def test_matches_oracle(self):
        batch = realizations(24, n_r=2, seed=100)
        flags = evaluate_batch(self.config, batch)
        for k in range(batch.size):
            for p in ("DT", "ODF", "NNC", "MNNC"):
                for j, n_c in enumerate(self.config.nc_grid[: self.config.width(p)]):
                    expected = protocol_outage(batch[k], p, 1.0, 1.0, 0.1, n_c)
                    assert flags.outage[p][k, j] == expected, (k, p, n_c)

    def test_no_relays_all_equal_dt(self):
        flags = evaluate_batch(self.config, realizations(50, n_r=0))
        for p in ("ODF", "NNC", "MNNC"):
            for j in range(self.config.width(p)):
                np.testing.assert_array_equal(flags.outage[p][:, j], flags.outage["DT"][:, 0])

    def test_empty_window_no_outage(self):
        batch = realizations(5, window_radius=0.0)
        flags = evaluate_batch(self.config, batch)
        for p in flags.outage:
            assert not flags.outage[p].any() and not flags.degenerate[p].any()

    def test_odf_without_decoders_is_dt_with_relays_on(self):
        cfg = ProtocolConfig(protocols=("DT", "ODF"), R=3.0, dt_relays=True)
        batch = realizations(60, n_r=2, seed=7)
        flags = evaluate_batch(cfg, batch)
        # R = 3 is out of reach for most relays, so D is usually empty
        nobody = np.array([not oracle_decoding_set(batch[k], 3.0, 1.0, 0.1, [0, 1]) for k in range(batch.size)])
        assert nobody.sum() > 10
        np.testing.assert_array_equal(flags.outage["ODF"][nobody], flags.outage["DT"][nobody])

    def test_inactive_relays_reduce_to_dt(self):
        # nothing passes an infinite threshold, in any cluster
        cfg = ProtocolConfig(threshold=ThresholdConfig("source_relay", np.inf), nc_grid=(1e-3,))
        flags = evaluate_batch(cfg, realizations(60, n_r=2, seed=3))
        for p in ("ODF", "NNC", "MNNC"):
            np.testing.assert_array_equal(flags.outage[p], flags.outage["DT"])

    def test_zero_threshold_equals_no_threshold(self):
        batch = realizations(40, n_r=2, seed=11)
        a = evaluate_batch(self.config, batch)
        b = evaluate_batch(ProtocolConfig(nc_grid=self.config.nc_grid, threshold=ThresholdConfig("source_relay", 0.0)), batch)
        for p in a.outage:
            np.testing.assert_array_equal(a.outage[p], b.outage[p])

    def test_threshold_needs_internal_links(self):
        batch = sample_batch(SimulationConfig(threshold_mode="none"), range(2))
        with pytest.raises(ValueError):
            evaluate_batch(ProtocolConfig(threshold=ThresholdConfig("source_relay", 0.1)), batch)

    def test_mnnc_never_worse_than_odf_on_each_trial_when_all_decode(self):
        # with every relay decoding MNNC reduces to ODF with all relays
        cfg = ProtocolConfig(protocols=("ODF", "MNNC"), R=0.05, P_r=0.1)
        batch = realizations(40, n_r=2, seed=21)
        flags = evaluate_batch(cfg, batch)
        everyone = np.array([len(oracle_decoding_set(batch[k], 0.05, 1.0, 0.1, [0, 1])) == 2 for k in range(batch.size)])
        assert everyone.any()
        np.testing.assert_array_equal(flags.outage["MNNC"][everyone], flags.outage["ODF"][everyone])

    def test_evaluate_trial_deterministic(self):
        r = realizations(1, n_r=2, seed=5)[0]
        a = evaluate_trial(self.config, r)
        b = evaluate_trial(self.config, r)
        for p in a.outage:
            np.testing.assert_array_equal(a.outage[p], b.outage[p])
            assert a.outage[p].shape == (self.config.width(p),)

    def test_batch_equals_single_trials(self):
        batch = realizations(10, n_r=3, seed=40)
        flags = evaluate_batch(self.config, batch)
        for k in range(batch.size):
            single = evaluate_trial(self.config, batch[k])
            for p in flags.outage:
                np.testing.assert_array_equal(single.outage[p], flags.outage[p][k])

    def test_relay_limit(self):
        rngs = [np.random.default_rng(0)]
        geometry = sample_network_batch(1e-3, 10.0, 1.0, 13, 0.05, 10.0, rngs)
        batch = realize_channel_batch(geometry, 4.0, rngs)
        with pytest.raises(ValueError):
            evaluate_batch(self.config, batch)

    def test_unknown_protocol(self):
        with pytest.raises(ValueError):
            ProtocolConfig(protocols=("AF",))


@given(seeds)
def test_odf_monotone_in_decoders(seed):
    # a superset of decoders never creates an outage
    rng = np.random.default_rng(seed)
    b_all = random_bundle(rng, 2, (), 1.0)
    R = rng.uniform(0.1, 3.0)
    full = odf_outage(R, b_all)[0]
    for keep in ((), (0,), (1,)):
        # relays outside the decoding set stay silent
        q_z = b_all.q_u[3:6, 3:6][np.ix_(list(keep) + [2], list(keep) + [2])]
        rg = b_all.h_tilde[3:5][np.ix_(list(keep), [0] + [1 + k for k in keep])]
        dg = b_all.h_tilde[5][[0] + [1 + k for k in keep]]
        sub = build_bundle(1.0, b_all.q_u[1, 1].real, q_z, rg, dg, keep, (), 1.0)
        if not odf_outage(R, sub)[0]:
            assert not full


def test_mnnc_with_no_decoders_equals_nnc():
    cfg = ProtocolConfig(protocols=("NNC", "MNNC"), R=8.0, nc_grid=(1e-3, 1e-1))
    # R = 8 is beyond every relay, so D is empty everywhere
    flags = evaluate_batch(cfg, realizations(40, n_r=2, seed=9))
    np.testing.assert_array_equal(flags.outage["NNC"], flags.outage["MNNC"])
