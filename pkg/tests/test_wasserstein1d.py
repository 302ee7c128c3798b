import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reswd import RngState, equalize_lengths, exact_w1_1d, marginal_w1, w1d_cost, w_p_distance


def brute_force_assignment_cost(a, b, p):
    """Minimum mean |a_i - b_sigma(i)|^p over all pairings; exponential oracle."""
    n = len(a)
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(abs(a[i] - b[perm[i]]) ** p for i in range(n)) / n
        best = min(best, cost)
    return best


class TestEqualize:
    def test_equal_lengths_unchanged(self):
        a, b = equalize_lengths([1.0, 2.0], [3.0, 4.0], RngState(0))
        assert np.array_equal(a, [1.0, 2.0]) and np.array_equal(b, [3.0, 4.0])

    def test_single_element_repetition(self):
        a, b = equalize_lengths([0.0, 1.0], [0.5], RngState(0))
        assert np.array_equal(a, [0.0, 1.0])
        assert np.array_equal(b, [0.5, 0.5])

    def test_added_elements_are_members(self):
        src = [1.0, 2.0, 3.0, 4.0, 5.0]
        a, b = equalize_lengths(list(range(1, 9)), src, RngState(3))
        assert len(b) == 8
        assert all(x in src for x in b)
        assert np.array_equal(b[:5], src)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            equalize_lengths([], [1.0], RngState(0))


class TestW1dCost:
    def test_identical_multisets(self):
        c = w1d_cost([3.0, 1.0, 2.0], [1.0, 2.0, 3.0], 1.0, RngState(0))
        assert c.value == 0.0
        assert np.array_equal(c.grad, [0.0, 0.0, 0.0])

    def test_single_pair_quadratic(self):
        c = w1d_cost([0.0], [2.0], 2.0, RngState(0))
        assert c.value == pytest.approx(4.0)
        assert c.grad == pytest.approx([-4.0])

    def test_sorted_pairing_is_minimal(self):
        a, b = [1.0, 3.0, 2.0], [0.0, 0.0, 0.0]
        c = w1d_cost(a, b, 1.0, RngState(0))
        assert c.value == pytest.approx(2.0)
        assert c.value == pytest.approx(brute_force_assignment_cost(a, b, 1.0))

    def test_p_below_one_rejected(self):
        with pytest.raises(ValueError):
            w1d_cost([1.0], [2.0], 0.5, RngState(0))

    def test_gradient_scatters_to_original_order(self):
        a = [5.0, 1.0, 3.0]
        b = [0.0, 0.0, 0.0]
        c = w1d_cost(a, b, 2.0, RngState(0))
        # sorted a pairs with sorted b elementwise; grad_j = (2/3)(a_j - 0)
        assert c.grad == pytest.approx([10.0 / 3.0, 2.0 / 3.0, 2.0])

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=12),
        st.lists(st.floats(-50, 50), min_size=1, max_size=12),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariance(self, a, b, pyrand):
        value = w1d_cost(a, b, 2.0, RngState(9)).value
        a2 = list(a)
        pyrand.shuffle(a2)
        # use equal-length inputs so no equalization randomness is involved
        if len(a) == len(b):
            assert w1d_cost(a2, b, 2.0, RngState(9)).value == pytest.approx(value, abs=1e-9)

    def test_grad_permutes_with_input(self):
        a = [4.0, -1.0, 2.5, 0.0]
        b = [1.0, 0.5, -2.0, 3.0]
        base = w1d_cost(a, b, 2.0, RngState(0))
        perm = [2, 0, 3, 1]
        shuffled = w1d_cost([a[i] for i in perm], b, 2.0, RngState(0))
        assert shuffled.value == pytest.approx(base.value)
        assert shuffled.grad == pytest.approx([base.grad[i] for i in perm])

    def test_translation_identity_p2(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=9)
        b = rng.normal(size=9)
        c = 0.7
        v0 = w1d_cost(a, b, 2.0, RngState(0)).value
        v1 = w1d_cost(a + c, b, 2.0, RngState(0)).value
        delta = np.mean(np.sort(a) - np.sort(b))
        assert v1 - v0 == pytest.approx(c * c + 2.0 * c * delta, abs=1e-10)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.permutation(rng.normal(size=8) * 3.0)
            b = rng.normal(size=8) * 2.0 + 0.5
            for p in (1.0, 2.0, 3.0):
                grad = w1d_cost(a, b, p, RngState(0)).grad
                h = 1e-5
                for j in range(len(a)):
                    ap = a.copy()
                    am = a.copy()
                    ap[j] += h
                    am[j] -= h
                    fd = (
                        w1d_cost(ap, b, p, RngState(0)).value
                        - w1d_cost(am, b, p, RngState(0)).value
                    ) / (2 * h)
                    assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_zero_iff_equalized_sorted_lists_equal(self):
        assert w1d_cost([1.0, 2.0], [2.0, 1.0], 2.0, RngState(0)).value == 0.0
        assert w1d_cost([1.0, 2.0], [2.0, 1.0 + 1e-12], 2.0, RngState(0)).value > 0.0


class TestWpDistance:
    def test_root_of_cost(self):
        assert w_p_distance([0.0], [2.0], 2.0, RngState(0)) == pytest.approx(2.0)

    def test_identical_lists(self):
        a = [0.3, -1.2, 4.0]
        for p in (1.0, 2.0, 3.5):
            assert w_p_distance(a, a, p, RngState(0)) == 0.0

    def test_matches_brute_force_assignment(self):
        rng = np.random.default_rng(21)
        a = rng.normal(size=6)
        b = rng.normal(size=6)
        got = w_p_distance(a, b, 1.0, RngState(0))
        assert got == pytest.approx(brute_force_assignment_cost(a, b, 1.0))


class TestExactW1:
    def test_equal_sizes(self):
        a = [3.0, 1.0, 2.0]
        b = [0.0, 1.0, 5.0]
        want = np.mean(np.abs(np.sort(a) - np.sort(b)))
        assert exact_w1_1d(a, b) == pytest.approx(want)

    def test_unequal_sizes_against_cdf_distance(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=7)
        b = rng.normal(size=13) + 0.5
        # independent exact oracle: W1 = integral over x of |F_a(x) - F_b(x)|,
        # piecewise constant between the merged sample values
        xs = np.sort(np.concatenate([a, b]))
        want = 0.0
        for lo, hi in zip(xs[:-1], xs[1:]):
            mid = 0.5 * (lo + hi)
            fa = np.mean(a <= mid)
            fb = np.mean(b <= mid)
            want += abs(fa - fb) * (hi - lo)
        assert exact_w1_1d(a, b) == pytest.approx(want, abs=1e-12)

    def test_marginal_w1_axis_shift(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(50, 3))
        Y = X + np.array([0.8, 0.0, 0.0])
        assert marginal_w1(X, Y) == pytest.approx(0.8 / 3.0)
