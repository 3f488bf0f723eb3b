import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regmarket import egt
from regmarket.model import (
    CompanyStrategy,
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    RegulatorStrategy,
    firm_population_payoffs,
)

HQ, LQ = RegulatorStrategy.HQ, RegulatorStrategy.LQ
AS, AU, VS = CompanyStrategy.AS, CompanyStrategy.AU, CompanyStrategy.VS
V0 = ModelVariant()


def random_chain(rng, n=6):
    P = rng.random((n, n)) + 1e-3
    np.fill_diagonal(P, 0.0)
    P /= P.sum(axis=1, keepdims=True) * rng.uniform(1.0, 3.0, size=(n, 1))
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return P


class TestStates:
    def test_order(self):
        assert [str(s) for s in egt.STATES] == ["HQ-AS", "HQ-AU", "HQ-VS", "LQ-AS", "LQ-AU", "LQ-VS"]

    def test_round_trip(self):
        for i, s in enumerate(egt.STATES):
            assert s.index == i
            assert egt.MarketState.from_index(i) == s
            assert egt.MarketState.from_label(s.label) == s

    def test_bad_label(self):
        with pytest.raises(ValueError):
            egt.MarketState.from_label("MQ-AS")


class TestFixation:
    def test_neutral(self):
        assert egt.fixation_probability(np.zeros(49), 50, 0.3) == pytest.approx(1 / 50, abs=1e-15)
        assert egt.fixation_probability(np.full(9, 3.0), 10, 0.0) == 0.1

    @pytest.mark.parametrize("z", [2, 5, 50])
    @pytest.mark.parametrize("beta", [0.01, 0.5, 2.0])
    def test_matches_birth_death_chain(self, z, beta):
        f = np.random.default_rng(z).normal(0.0, 1.0, z - 1)
        assert egt.fixation_probability(f, z, beta) == pytest.approx(
            egt.birth_death_fixation(f, z, beta), rel=1e-9
        )

    def test_callable_input(self):
        f = lambda k: 0.1 * k - 2.0
        arr = 0.1 * np.arange(1, 20) - 2.0
        assert egt.fixation_probability(f, 20, 0.5) == egt.fixation_probability(arr, 20, 0.5)

    def test_scalar_callable(self):
        assert egt.fixation_probability(lambda k: 1.0, 10, 0.2) == pytest.approx(
            egt.constant_fixation(1.0, 10, 0.2), rel=1e-12
        )

    def test_advantage_beats_neutral(self):
        assert egt.fixation_probability(np.full(49, 0.5), 50, 0.1) > 1 / 50
        assert egt.fixation_probability(np.full(49, -0.5), 50, 0.1) < 1 / 50

    def test_extreme_selection_no_overflow(self):
        strong = egt.fixation_probability(np.full(49, 1e4), 50, 10.0)
        weak = egt.fixation_probability(np.full(49, -1e4), 50, 10.0)
        assert strong == pytest.approx(1.0)
        assert weak == 0.0 or 0.0 < weak < 1e-300
        assert np.isfinite(strong) and np.isfinite(weak)

    def test_two_player_population(self):
        # z = 2: one imitation event, adopted with the Fermi probability
        f = np.array([0.7])
        assert egt.fixation_probability(f, 2, 1.3) == pytest.approx(1 / (1 + np.exp(-1.3 * 0.7)))

    @pytest.mark.parametrize("delta", [-3.0, -0.1, 1e-9, 0.2, 5.0])
    @pytest.mark.parametrize("z", [2, 10, 100])
    def test_closed_form(self, delta, z):
        assert egt.fixation_probability(np.full(z - 1, delta), z, 0.7) == pytest.approx(
            egt.constant_fixation(delta, z, 0.7), rel=1e-12
        )

    def test_closed_form_limit(self):
        assert egt.constant_fixation(0.0, 25, 1.0) == 1 / 25
        assert egt.constant_fixation(1e-14, 25, 1.0) == pytest.approx(1 / 25, rel=1e-10)

    @pytest.mark.parametrize(
        "args", [(np.zeros(3), 1, 0.1), (np.zeros(3), 4, -1.0), (np.zeros(5), 4, 0.1)]
    )
    def test_errors(self, args):
        with pytest.raises(ValueError):
            egt.fixation_probability(*args)

    def test_regulator_sign(self):
        p = ModelParams(g=1.2)
        up = egt.regulator_fixation(p, "Vigilant", VS, HQ, LQ)
        down = egt.regulator_fixation(p, "Vigilant", VS, LQ, HQ)
        assert up > 1 / p.z_reg > down
        assert up == pytest.approx(egt.constant_fixation(0.2, p.z_reg, p.beta), rel=1e-12)

    def test_regulator_same_strategy(self):
        with pytest.raises(ValueError):
            egt.regulator_fixation(ModelParams(), "Vigilant", VS, HQ, HQ)

    def test_vs_to_as_neutral_under_hq(self):
        p = ModelParams()
        assert egt.firm_fixation(p, V0, HQ, VS, AS) == pytest.approx(1 / p.z_ai, abs=1e-15)
        assert egt.firm_fixation(p, V0, LQ, VS, AU) == pytest.approx(1 / p.z_ai, abs=1e-15)


class TestTransitionMatrix:
    @pytest.fixture
    def P(self):
        return egt.build_transition_matrix(ModelParams(), V0, IncentiveScheme.VIGILANT)

    def test_shape_and_rows(self, P):
        assert P.matrix.shape == (6, 6)
        np.testing.assert_allclose(P.matrix.sum(axis=1), 1.0, atol=1e-15)
        assert (P.matrix >= 0).all()

    def test_structure(self, P):
        for i, a in enumerate(egt.STATES):
            for j, b in enumerate(egt.STATES):
                adjacent = (a.reg is b.reg) != (a.firm is b.firm)
                if i != j and not adjacent:
                    assert P.matrix[i, j] == 0.0
                if i != j and adjacent:
                    assert P.matrix[i, j] > 0.0
        # each state has 2 firm moves and 1 regulator move: 18 directed edges
        off = P.matrix - np.diag(np.diag(P.matrix))
        assert np.count_nonzero(off) == 18

    def test_normalised_by_state_count(self, P):
        p = ModelParams()
        rho = egt.firm_fixation(p, V0, LQ, AU, AS)
        assert P.entry("LQ-AS", "LQ-AU") == pytest.approx(rho / 5, rel=1e-15)

    def test_entry_access(self, P):
        a, b = egt.STATES[0], egt.STATES[3]
        assert P.entry(a, b) == P.entry(str(a), str(b)) == P.matrix[0, 3]

    def test_subset_chain(self):
        P = egt.build_transition_matrix(ModelParams(), V0, "Vigilant", states=egt.STATES[:3])
        assert P.matrix.shape == (3, 3)
        rho = egt.firm_fixation(ModelParams(), V0, HQ, AU, AS)
        assert P.entry("HQ-AS", "HQ-AU") == pytest.approx(rho / 2)


class TestStationary:
    def test_two_state(self):
        P = np.array([[0.5, 0.5], [1.0, 0.0]])
        np.testing.assert_allclose(egt.gth_stationary(P).vector, [2 / 3, 1 / 3], atol=1e-15)

    def test_symmetric_uniform(self):
        P = np.full((4, 4), 0.25)
        np.testing.assert_allclose(egt.gth_stationary(P).vector, 0.25, atol=1e-15)

    def test_doubly_stochastic(self):
        rng = np.random.default_rng(3)
        perms = [np.eye(5)[rng.permutation(5)] for _ in range(4)]
        P = 0.25 * sum(perms)
        P = 0.5 * (P + np.roll(np.eye(5), 1, axis=1))
        np.testing.assert_allclose(egt.gth_stationary(P).vector, 0.2, atol=1e-14)

    def test_matches_power_iteration(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            P = random_chain(rng)
            np.testing.assert_allclose(
                egt.gth_stationary(P).vector, egt.power_iteration_stationary(P), atol=1e-10
            )

    def test_balance_equations(self):
        P = egt.build_transition_matrix(ModelParams(), V0, "Bounty")
        v = egt.gth_stationary(P).vector
        np.testing.assert_allclose(v @ P.matrix, v, atol=1e-15)
        assert v.sum() == pytest.approx(1.0, abs=1e-15)

    def test_relabeling(self):
        rng = np.random.default_rng(11)
        P = random_chain(rng)
        perm = rng.permutation(6)
        v = egt.gth_stationary(P).vector
        w = egt.gth_stationary(P[np.ix_(perm, perm)]).vector
        np.testing.assert_allclose(w, v[perm], atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 1.0), st.integers(0, 2**31))
    def test_off_diagonal_scaling(self, lam, seed):
        # scaling every exit rate by lam leaves the stationary vector unchanged
        P = random_chain(np.random.default_rng(seed))
        Q = lam * (P - np.diag(np.diag(P)))
        np.fill_diagonal(Q, 1.0 - Q.sum(axis=1))
        np.testing.assert_allclose(egt.gth_stationary(Q).vector, egt.gth_stationary(P).vector, atol=1e-12)

    def test_labels_carried(self):
        v = egt.stationary_distribution(ModelParams(), V0, "Vigilant")
        assert v.labels == egt.STATES
        assert v["HQ-VS"] == v[egt.STATES[2]] == v.as_dict()["HQ-VS"]

    def test_not_stochastic(self):
        with pytest.raises(ValueError, match="rows"):
            egt.gth_stationary(np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_negative_entry(self):
        with pytest.raises(ValueError, match="negative"):
            egt.gth_stationary(np.array([[1.2, -0.2], [0.5, 0.5]]))

    def test_reducible(self):
        P = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]])
        with pytest.raises(egt.ReducibleChainError):
            egt.gth_stationary(P)
        assert issubclass(egt.ReducibleChainError, ArithmeticError)


@pytest.mark.parametrize("shift", [-50.0, 4.0, 1e3])
def test_uniform_payoff_shift(shift):
    p = ModelParams()
    k = np.arange(1, p.z_ai)
    pm, pr = firm_population_payoffs(p, V0, LQ, AU, AS, k)
    shifted = egt.fixation_probability((pm + shift) - (pr + shift), p.z_ai, p.beta)
    assert shifted == pytest.approx(egt.firm_fixation(p, V0, LQ, AU, AS), abs=1e-12)
    P0 = egt.build_transition_matrix(p.with_(b=0.0), V0, "Vigilant").matrix
    P1 = egt.build_transition_matrix(p.with_(b=40.0), V0, "Vigilant").matrix
    np.testing.assert_array_equal(P0, P1)
