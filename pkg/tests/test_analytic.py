import itertools
import math

import pytest
from hypothesis import given, strategies as st

from nmaloha import analytic as an
from nmaloha.sic import exact_eta_oracle


def brute_eta_ma(M, B):
    """Average count of users alone on their subchannel over all B**M choices."""
    total = 0
    for choice in itertools.product(range(B), repeat=M):
        total += sum(1 for c in choice if choice.count(c) == 1)
    return total / B**M


class TestEtaMA:
    def test_single_user(self):
        assert an.eta_ma(1, 5) == 1.0

    def test_two_users_two_channels(self):
        assert an.eta_ma(2, 2) == 1.0

    def test_enumeration(self):
        assert brute_eta_ma(3, 3) == pytest.approx(4 / 3, abs=1e-15)
        assert an.eta_ma(3, 3) == pytest.approx(4 / 3, rel=1e-14)

    @pytest.mark.parametrize("M,B", [(0, 3), (2, 4), (4, 3), (5, 2), (3, 1)])
    def test_matches_enumeration(self, M, B):
        assert an.eta_ma(M, B) == pytest.approx(brute_eta_ma(M, B), abs=1e-12)

    def test_zero_users(self):
        assert an.eta_ma(0, 4) == 0.0

    def test_rejects_no_subchannels(self):
        with pytest.raises(ValueError):
            an.eta_ma(3, 0)


class TestPMFs:
    def test_poisson_values(self):
        assert an.poisson_pmf(1.0, 0) == pytest.approx(math.exp(-1))
        assert an.poisson_pmf(1.0, 1) == pytest.approx(math.exp(-1))
        assert an.poisson_pmf(2.5, 2) == pytest.approx(math.exp(-2.5) * 3.125, rel=1e-13)
        assert an.poisson_pmf(2.5, 2) == pytest.approx(0.2565, abs=5e-5)

    @pytest.mark.parametrize("lam", [0.1, 1.0, 2.5, 10.0, 60.0])
    def test_poisson_normalises(self, lam):
        assert an.poisson_expectation(lambda n: 1.0, lam) == pytest.approx(1.0, abs=1e-12)
        assert an.poisson_expectation(lambda n: n, lam) == pytest.approx(lam, rel=1e-12)

    def test_binomial_values(self):
        assert an.binomial_pmf(2, 0.5, 1) == 0.5
        assert an.binomial_pmf(4, 0.25, 0) == pytest.approx(0.75**4)
        assert an.binomial_pmf(10, 1 / 6, 2) == pytest.approx(45 / 36 * (5 / 6) ** 8, rel=1e-13)
        assert an.binomial_pmf(10, 1 / 6, 2) == pytest.approx(0.2907, abs=5e-5)

    @pytest.mark.parametrize("M,p", [(1, 0.3), (10, 1 / 6), (20, 0.5), (21, 0.5), (200, 0.0125)])
    def test_binomial_normalises(self, M, p):
        assert math.fsum(an.binomial_pmf(M, p, n) for n in range(M + 1)) == pytest.approx(1.0, abs=1e-12)

    def test_binomial_log_space_matches_exact(self):
        # first value past the exact-integer cutoff
        exact = math.comb(30, 7) * 0.2**7 * 0.8**23
        assert an.binomial_pmf(30, 0.2, 7) == pytest.approx(exact, rel=1e-12)

    def test_binomial_rejects_n_above_M(self):
        with pytest.raises(ValueError):
            an.binomial_pmf(3, 0.5, 4)

    def test_binomial_edge_probabilities(self):
        assert an.binomial_pmf(5, 0.0, 0) == 1.0
        assert an.binomial_pmf(5, 1.0, 5) == 1.0
        assert an.binomial_pmf(5, 1.0, 4) == 0.0


class TestAlohaAverage:
    def test_values(self):
        assert an.t_ma_avg(1.0, 10) == pytest.approx(10 / math.e)
        assert an.t_ma_avg(1.0, 1) == pytest.approx(1 / math.e)
        assert an.t_ma_avg(2.5, 4) == pytest.approx(10 * math.exp(-2.5))
        assert an.t_ma_avg(2.5, 4) == pytest.approx(0.8208, abs=5e-5)

    @pytest.mark.parametrize("B", [1, 4, 10])
    def test_peak_at_unit_intensity(self, B):
        peak = an.t_ma_avg(1.0, B)
        for i in range(1, 31):
            assert an.t_ma_avg(0.1 * i, B) <= peak + 1e-15


class TestPowerLevels:
    def test_small_ladder(self):
        assert an.power_levels(1.0, 3).levels == (4.0, 2.0, 1.0)

    def test_single_level(self):
        assert an.power_levels(2.0, 1).levels == (2.0,)

    def test_six_db(self):
        g = 10**0.6
        got = an.power_levels(g, 4).levels
        want = [g * (g + 1) ** 3, g * (g + 1) ** 2, g * (g + 1), g]
        assert got == pytest.approx(want, rel=1e-13)

    @pytest.mark.parametrize("gamma", [0.1, 1.0, 3.9811, 10.0])
    @pytest.mark.parametrize("L", range(1, 9))
    def test_recursion_closed_form_and_sinr(self, gamma, L):
        ps = an.power_levels(gamma, L)
        closed = an.power_levels_closed_form(gamma, L)
        for i in range(L):
            assert abs(ps.levels[i] - closed[i]) / closed[i] < 1e-12
            assert abs(ps.sinr(i) - gamma) / gamma < 1e-12
            assert ps.levels[i] == pytest.approx(gamma * (ps.interference_below(i) + 1), rel=1e-12)
        assert all(a > b > 0 for a, b in zip(ps.levels, ps.levels[1:]))
        assert ps.levels[-1] == gamma

    @pytest.mark.parametrize("gamma,L", [(0.0, 2), (-1.0, 2), (1.0, 0)])
    def test_rejects_bad_inputs(self, gamma, L):
        with pytest.raises(ValueError):
            an.power_levels(gamma, L)


def test_rate_from_sinr():
    assert an.rate_from_sinr(1.0) == 1.0
    assert an.rate_from_sinr(3.0) == 2.0
    assert an.rate_from_sinr(3.9811) == pytest.approx(2.3165, abs=5e-5)


class TestEtaLowerBound:
    def test_values(self):
        assert an.eta_lower_bound(2, 2) == 1.0
        assert an.eta_lower_bound(3, 2) == 0.0
        assert an.eta_lower_bound(4, 4) == pytest.approx(0.375)

    def test_zero_above_L(self):
        assert an.eta_lower_bound(7, 6) == 0.0

    @pytest.mark.parametrize("M", range(7))
    @pytest.mark.parametrize("L", range(1, 7))
    def test_below_exact_oracle(self, M, L):
        bound, exact = an.eta_lower_bound(M, L), exact_eta_oracle(M, L)
        assert bound <= exact + 1e-12
        if M <= 2:
            assert abs(bound - exact) < 1e-12

    def test_best_M(self):
        assert an.max_eta_lower_bound(1) == (1, 1.0)
        assert an.max_eta_lower_bound(4) == (2, 1.5)
        prev = 0.0
        for L in range(1, 12):
            _, v = an.max_eta_lower_bound(L)
            assert v >= prev
            prev = v


class TestNMAThroughput:
    def test_no_users(self):
        assert an.t_nma_conditional(0, 3, 4, exact_eta_oracle) == 0.0

    def test_two_users_by_enumeration(self):
        # 4 (subchannel, level) cells; only a shared cell loses both users
        slots = list(itertools.product(range(2), range(2)))
        total = sum(0 if a == b else 2 for a in slots for b in slots) / len(slots) ** 2
        assert total == 1.5
        assert an.t_nma_conditional(2, 2, 2, exact_eta_oracle) == pytest.approx(1.5, abs=1e-14)

    def test_single_level_is_plain_aloha(self):
        assert an.t_nma_conditional(3, 1, 3, exact_eta_oracle) == pytest.approx(4 / 3, abs=1e-14)

    @pytest.mark.parametrize("M,B", [(4, 2), (5, 3), (1, 7)])
    def test_single_level_matches_eta_ma(self, M, B):
        assert an.t_nma_conditional(M, 1, B, exact_eta_oracle) == pytest.approx(an.eta_ma(M, B), abs=1e-12)

    def test_lower_bound_values(self):
        assert an.t_nma_lower_bound(1.0, 1, 6) == pytest.approx(6 / math.e)
        assert an.t_nma_lower_bound(1.0, 2, 4) == pytest.approx(6 / math.e, rel=1e-14)
        assert an.t_nma_lower_bound(1.0, 2, 4) == pytest.approx(1.5 * an.t_ma_avg(1.0, 4))

    def test_lower_bound_direct_sum(self):
        lam = 2.5
        # n * P(all n distinct among 4 levels) for n = 1..4
        terms = [1 * lam, 1.5 * lam**2 / 2, 1.125 * lam**3 / 6, 0.375 * lam**4 / 24]
        assert an.t_nma_lower_bound(lam, 4, 4) == pytest.approx(4 * math.exp(-lam) * sum(terms), rel=1e-13)

    def test_two_level_closed_form_only_at_unit_intensity(self):
        # the 3/2 * B lam e^-lam shortcut agrees with the sum only at lam = 1
        for lam in (0.5, 2.0):
            assert an.t_nma_lower_bound(lam, 2, 3) != pytest.approx(1.5 * an.t_ma_avg(lam, 3))
            assert an.t_nma_lower_bound(lam, 2, 3) == pytest.approx(3 * math.exp(-lam) * (lam + lam**2 / 2))

    @given(st.floats(0.05, 8.0), st.integers(1, 12))
    def test_single_level_reduces_to_aloha(self, lam, B):
        assert an.t_nma_lower_bound(lam, 1, B) == pytest.approx(an.t_ma_avg(lam, B), rel=1e-12)

    @given(st.floats(0.05, 8.0), st.integers(1, 12), st.integers(1, 11))
    def test_lower_bound_nondecreasing_in_L(self, lam, B, L):
        assert an.t_nma_lower_bound(lam, L + 1, B) >= an.t_nma_lower_bound(lam, L, B) - 1e-12

    def test_binomial_traffic_close_to_poisson(self):
        exact = an.t_nma_binomial(200, 0.05, 1, 10, exact_eta_oracle)
        assert exact == pytest.approx(10 * 0.995**199, rel=1e-12)
        assert an.t_nma_poisson(1.0, 1, 10, exact_eta_oracle) == pytest.approx(an.t_ma_avg(1.0, 10), rel=1e-12)


class TestGroupsAndPower:
    def test_thresholds(self):
        assert an.group_thresholds(1.0, 2) == pytest.approx([0, 1 / math.sqrt(2), 1])
        assert an.group_thresholds(1.0, 1) == [0.0, 1.0]
        assert an.group_thresholds(1.0, 4) == pytest.approx([0, 0.5, 0.7071068, 0.8660254, 1], abs=1e-7)

    def test_rings_have_equal_area(self):
        tau = an.group_thresholds(2.0, 5)
        areas = [tau[i + 1] ** 2 - tau[i] ** 2 for i in range(5)]
        assert areas == pytest.approx([4 / 5] * 5)

    def test_order_stat_factor(self):
        assert an.order_stat_factor(2) == pytest.approx(2 * math.log(2))
        assert an.order_stat_factor(6) == pytest.approx(1.2)
        with pytest.raises(ValueError):
            an.order_stat_factor(1)

    def test_group_bound(self):
        assert an.power_bound_per_group(1, 1.0, 1, 2, 1.0, 1.0, 2.0) == pytest.approx(2 * math.log(2))
        with pytest.raises(ValueError):
            an.power_bound_per_group(1, 1.0, 1, 1)

    def test_average_bound(self):
        assert an.avg_power_upper_bound(1.0, 2, 2, 1.0, 1.0, 2.0) == pytest.approx(2 * math.log(2))
        assert an.avg_power_upper_bound(1.0, 1, 2, 1.0, 1.0, 0.0) == pytest.approx(2 * math.log(2))
        with pytest.raises(ValueError):
            an.avg_power_upper_bound(1.0, 2, 1)

    @pytest.mark.parametrize("B", [2, 4, 6])
    def test_average_is_mean_of_group_bounds(self, B):
        g = 10**0.6
        groups = [an.power_bound_per_group(l, g, 4, B) for l in range(1, 5)]
        assert an.avg_power_upper_bound(g, 4, B) == pytest.approx(sum(groups) / 4, rel=1e-13)


@given(st.floats(-40, 40))
def test_db_round_trip(x_db):
    x = an.db_to_linear(x_db)
    assert an.db_to_linear(an.linear_to_db(x)) == pytest.approx(x, rel=1e-12)
