import numpy as np
import pytest
from scipy import stats

from reswd import (
    Reservoir,
    ReservoirEntry,
    RngState,
    decay,
    ess_check,
    load_snapshot,
    make_key,
    save_snapshot,
    select,
)
from reswd.reservoir import _key_from_latent


def entry(direction, weight, key=0.5, latent=0.5, inserted_at=0):
    return ReservoirEntry(np.asarray(direction, dtype=float), weight, key, latent, inserted_at)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestDecay:
    def test_zero_age_no_change(self):
        r = Reservoir(2, (entry([1.0, 0.0], 1.0, key=0.5, inserted_at=5),), 5)
        out = decay(r, 5, 10.0)
        assert out.entries[0].weight == 1.0
        assert out.entries[0].key == 0.5

    def test_one_time_constant(self):
        r = Reservoir(2, (entry([1.0, 0.0], 1.0, key=0.5, inserted_at=0),), 0)
        out = decay(r, 10, 10.0)
        assert out.entries[0].weight == pytest.approx(np.exp(-1.0))
        assert out.entries[0].key == pytest.approx(0.5 * np.exp(-1.0))

    def test_tau_zero_disables(self):
        r = Reservoir(2, (entry([1.0, 0.0], 3.0, key=0.25, inserted_at=0),), 0)
        out = decay(r, 100, 0.0)
        assert out.entries[0].weight == 3.0
        assert out.entries[0].key == 0.25

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            decay(Reservoir(1), 0, -1.0)


class TestMakeKey:
    def test_weight_one_returns_uniform(self):
        rng = RngState(3)
        expected = RngState(3).uniform()
        assert make_key(1.0, rng) == pytest.approx(float(expected))

    def test_monotone_in_weight_for_fixed_latent(self):
        u = 0.5
        keys = [_key_from_latent(u, w) for w in (0.1, 1.0, 10.0, 1000.0)]
        assert np.all(np.diff(keys) > 0)
        assert keys[-1] > 0.999  # key -> 1 as weight grows

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError):
            make_key(0.0, RngState(0))

    def test_key_law_kolmogorov_smirnov(self):
        # for weight w, P(key <= k) = k^w; check w=2 against its analytic CDF
        rng = RngState(17)
        keys = np.array([make_key(2.0, rng) for _ in range(100_000)])
        stat = stats.kstest(keys, lambda k: np.clip(k, 0, 1) ** 2).statistic
        assert stat < 0.01


class TestSelect:
    def test_single_slot_survival_frequencies(self):
        # exact single-draw law: P(i survives) = cost_i / sum(costs)
        costs = np.array([1.0, 2.0, 3.0, 4.0])
        dirs = np.eye(4)[:, :3]
        rng = RngState(99)
        counts = np.zeros(4)
        reservoir = Reservoir(1)
        for _ in range(100_000):
            res = select(reservoir, dirs, costs, rng, t=1)
            counts[res.pool_indices[0]] += 1
        freq = counts / counts.sum()
        assert np.all(np.abs(freq - np.array([0.1, 0.2, 0.3, 0.4])) < 0.01)

    def test_pool_of_exactly_capacity_all_survive(self):
        dirs = np.array([unit([1.0, 0.0]), unit([0.0, 1.0]), unit([1.0, 1.0])])
        costs = np.array([1.0, 2.0, 5.0])
        res = select(Reservoir(3), dirs, costs, RngState(0), t=1)
        assert len(res.survivors) == 3
        inv_q = 1.0 / (costs / costs.sum())
        want = inv_q / inv_q.sum()
        assert res.norm_weights == pytest.approx(want[res.pool_indices])

    def test_inverse_share_normalization(self):
        # shares q = [0.2, 0.8] give weights [0.8, 0.2]
        dirs = np.array([unit([1.0, 0.0]), unit([0.0, 1.0])])
        res = select(Reservoir(2), dirs, np.array([1.0, 4.0]), RngState(1), t=1)
        order = np.argsort(res.pool_indices)
        assert res.probabilities[order] == pytest.approx([0.2, 0.8])
        assert res.norm_weights[order] == pytest.approx([0.8, 0.2])

    def test_monotone_selection_frequency(self):
        # raising one candidate's cost never lowers its survival frequency
        dirs = np.eye(3)
        rng1, rng2 = RngState(5), RngState(6)
        n = 50_000
        hits_low = sum(
            select(Reservoir(1), dirs, np.array([1.0, 2.0, 2.0]), rng1, t=1).pool_indices[0] == 0
            for _ in range(n)
        )
        hits_high = sum(
            select(Reservoir(1), dirs, np.array([3.0, 2.0, 2.0]), rng2, t=1).pool_indices[0] == 0
            for _ in range(n)
        )
        p_low, p_high = hits_low / n, hits_high / n
        # expected 1/5 -> 3/7; 3-sigma binomial margin is ~0.007
        margin = 3.0 * np.sqrt(0.25 / n) * 2
        assert p_high - p_low > (3.0 / 7.0 - 1.0 / 5.0) - margin

    def test_weights_sum_to_one(self):
        rng = RngState(2)
        dirs = np.array([unit(v) for v in np.random.default_rng(0).normal(size=(10, 3))])
        costs = np.abs(np.random.default_rng(1).normal(size=10)) + 0.1
        res = select(Reservoir(4), dirs, costs, rng, t=3)
        assert res.norm_weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(res.norm_weights >= 0)
        assert len(res.survivors) == 4

    def test_capacity_never_exceeded(self):
        rng = RngState(7)
        reservoir = Reservoir(3)
        for t in range(1, 10):
            dirs = np.array([unit(v) for v in np.random.default_rng(t).normal(size=(5, 2))])
            costs = np.abs(np.random.default_rng(100 + t).normal(size=5)) + 0.05
            stored = np.array([e.weight for e in reservoir.entries])
            res = select(reservoir, dirs, costs, rng, t=t, stored_costs=stored)
            assert len(res.survivors) <= 3
            reservoir = Reservoir(3, res.survivors, t)

    def test_zero_cost_candidates_ineligible(self):
        dirs = np.eye(3)
        res = select(Reservoir(2), dirs, np.array([0.0, 1.0, 2.0]), RngState(0), t=1)
        assert 0 not in res.pool_indices
        assert not res.degenerate

    def test_all_zero_costs_degenerate(self):
        dirs = np.eye(3)
        res = select(Reservoir(2), dirs, np.zeros(3), RngState(0), t=1)
        assert res.degenerate
        assert res.norm_weights == pytest.approx([0.5, 0.5])
        assert res.ess == pytest.approx(2.0)

    def test_deterministic(self):
        dirs = np.array([unit(v) for v in np.random.default_rng(4).normal(size=(6, 3))])
        costs = np.abs(np.random.default_rng(5).normal(size=6)) + 0.2
        r1 = select(Reservoir(3), dirs, costs, RngState(21), t=1)
        r2 = select(Reservoir(3), dirs, costs, RngState(21), t=1)
        assert np.array_equal(r1.pool_indices, r2.pool_indices)
        assert np.array_equal(r1.norm_weights, r2.norm_weights)

    def test_fresh_survivors_stamped_with_step(self):
        dirs = np.eye(2)
        res = select(Reservoir(2), dirs, np.array([1.0, 1.0]), RngState(0), t=7)
        assert all(e.inserted_at == 7 for e in res.survivors)

    def test_stored_survivors_keep_insertion_step(self):
        stored = entry(unit([1.0, 0.0]), 5.0, latent=0.99, inserted_at=2)
        reservoir = Reservoir(2, (stored,), 2)
        res = select(
            reservoir,
            np.array([unit([0.0, 1.0])]),
            np.array([0.001]),
            RngState(0),
            t=9,
            stored_costs=np.array([5.0]),
        )
        kept = [e for e in res.survivors if e.inserted_at == 2]
        assert len(kept) == 1


class TestEssCheck:
    def test_uniform_weights_max_ess(self):
        dirs = np.eye(4)[:, :3]
        res = select(Reservoir(4), dirs, np.ones(4), RngState(0), t=1)
        assert res.ess == pytest.approx(4.0)
        assert not ess_check(res, 0.5, 4)

    def test_single_atom_flushes(self):
        # one surviving direction holds all the cost mass
        dirs = np.eye(4)[:, :3]
        res = select(Reservoir(4), dirs, np.array([1.0, 0.0, 0.0, 0.0]), RngState(0), t=1)
        assert res.ess == pytest.approx(1.0)
        assert ess_check(res, 0.5, 4)

    def test_two_to_one_ratio(self):
        dirs = np.eye(2)
        res = select(Reservoir(2), dirs, np.array([2.0, 1.0]), RngState(0), t=1)
        assert res.ess == pytest.approx(9.0 / 5.0)
        assert not ess_check(res, 0.5, 2)

    def test_alpha_validation(self):
        dirs = np.eye(2)
        res = select(Reservoir(2), dirs, np.ones(2), RngState(0), t=1)
        with pytest.raises(ValueError):
            ess_check(res, 0.0, 2)


class TestSnapshot:
    def test_round_trip(self, tmp_path):
        entries = (
            entry(unit([1.0, 2.0, -0.5]), 1.25, key=0.75, latent=0.9, inserted_at=3),
            entry(unit([0.0, 1.0, 0.0]), 0.5, key=0.33, latent=0.4, inserted_at=8),
        )
        r = Reservoir(4, entries, 9)
        path = str(tmp_path / "reservoir.json")
        save_snapshot(r, path)
        back = load_snapshot(path)
        assert back.capacity == 4
        assert back.current_step == 9
        assert len(back.entries) == 2
        for e0, e1 in zip(r.entries, back.entries):
            assert np.array_equal(e0.direction, e1.direction)
            assert e0.weight == e1.weight
            assert e0.key == e1.key
            assert e0.latent == e1.latent
            assert e0.inserted_at == e1.inserted_at

    def test_version_check(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"version": 99, "capacity": 1, "current_step": 0, "entries": []}')
        with pytest.raises(ValueError):
            load_snapshot(str(path))
