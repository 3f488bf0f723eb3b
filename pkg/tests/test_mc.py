import numpy as np
import pytest

from regmarket import egt, mc
from regmarket.model import CompanyStrategy, ModelParams, ModelVariant, RegulatorStrategy

HQ, LQ = RegulatorStrategy.HQ, RegulatorStrategy.LQ
AS, AU, VS = CompanyStrategy.AS, CompanyStrategy.AU, CompanyStrategy.VS
V0 = ModelVariant()
SMALL = ModelParams(z_reg=20, z_ai=20)


def short(seed=1, steps=200_000, **kw):
    return mc.SimConfig(steps=steps, burn_in=10_000, seed=seed, **kw)


class TestSimConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(mutation_rate=0.0), dict(mutation_rate=1.0), dict(steps=0),
         dict(steps=10, burn_in=10), dict(seed=-1), dict(steps=1.5)],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            mc.SimConfig(**{"burn_in": 0, **kw})


class TestSimulate:
    def test_deterministic(self):
        a = mc.simulate(SMALL, V0, "Vigilant", short())
        b = mc.simulate(SMALL, V0, "Vigilant", short())
        assert a.counts == b.counts
        assert a.rng == mc.RNG_ALGORITHM

    def test_seed_matters(self):
        a = mc.simulate(SMALL, V0, "Vigilant", short(seed=1))
        b = mc.simulate(SMALL, V0, "Vigilant", short(seed=2))
        assert a.counts != b.counts

    def test_report_fields(self):
        r = mc.simulate(SMALL, V0, "Bounty", short())
        assert sum(r.occupancy.values()) == pytest.approx(1.0)
        assert set(r.occupancy) == set(egt.STATES)
        assert 0 <= r.unclassified_fraction <= r.non_monomorphic_fraction <= 1
        assert r.counts[3] == 200_000 - 10_000

    def test_trace(self):
        r = mc.simulate(SMALL, V0, "Bounty", short(report_every=50_000))
        assert len(r.trace) == 4

    def test_no_mutation_from_monomorphic_is_absorbing(self):
        # tiny mutation and few steps: the start state keeps nearly all mass
        r = mc.simulate(SMALL, V0, "Vigilant", mc.SimConfig(mutation_rate=1e-9, steps=10_000, burn_in=0))
        assert r.occupancy[egt.MarketState(LQ, AU)] == 1.0
        assert r.non_monomorphic_fraction == 0.0

    def test_initial_state(self):
        start = egt.MarketState(HQ, AS)
        r = mc.simulate(SMALL, V0, "Vigilant", mc.SimConfig(mutation_rate=1e-9, steps=1000, burn_in=0), initial=start)
        assert r.occupancy[start] == 1.0

    def test_neutral_occupancy(self):
        p = ModelParams(z_reg=10, z_ai=10, beta=0.0)
        cfg = mc.SimConfig(mutation_rate=1e-3, steps=2_000_000, burn_in=10_000, seed=5)
        r = mc.simulate_replicas(p, V0, "Vigilant", cfg, replicas=4)
        assert mc.total_variation(r.vector(), np.full(6, 1 / 6)) < 0.05

    def test_replicas_pool_counts(self):
        cfg = short(steps=50_000)
        pooled = mc.simulate_replicas(SMALL, V0, "Vigilant", cfg, replicas=3)
        singles = [
            mc.simulate(SMALL, V0, "Vigilant", mc.SimConfig(steps=50_000, burn_in=10_000, seed=s))
            for s in mc.replica_seeds(cfg.seed, 3)
        ]
        assert pooled.counts[0] == tuple(np.sum([s.counts[0] for s in singles], axis=0))
        assert pooled.replicas == 3 and pooled.steps == 150_000

    def test_replicas_parallel_identical(self):
        cfg = short(steps=50_000)
        a = mc.simulate_replicas(SMALL, V0, "Vigilant", cfg, replicas=2, n_jobs=1)
        b = mc.simulate_replicas(SMALL, V0, "Vigilant", cfg, replicas=2, n_jobs=2)
        assert a.counts == b.counts

    def test_beta_override(self):
        a = mc.simulate(SMALL, V0, "Vigilant", short(), beta=0.0)
        b = mc.simulate(SMALL.with_(beta=0.0), V0, "Vigilant", short())
        assert a.counts == b.counts


class TestFixation:
    def test_constant_delta_closed_form(self):
        # firms fixed at VS, Vigilant g=1.2: HQ beats LQ by a constant 0.2
        p = SMALL
        est, se = mc.estimate_fixation(p, V0, VS, HQ, LQ, trials=100_000, seed=3, scheme="Vigilant")
        exact = egt.constant_fixation(0.2, p.z_reg, p.beta)
        assert abs(est - exact) < 3 * se

    def test_firm_fixation_matches_egt(self):
        p = SMALL
        est, se = mc.estimate_fixation(p, V0, LQ, AU, AS, trials=20_000, seed=4)
        exact = egt.firm_fixation(p, V0, LQ, AU, AS)
        assert abs(est - exact) < 3 * se

    def test_sign_arbitration(self):
        # a constant positive edge must fix more often than neutral drift
        p = SMALL.with_(g=6.0)
        est, se = mc.estimate_fixation(p, V0, VS, HQ, LQ, trials=50_000, seed=9, scheme="Vigilant")
        assert est - 3 * se > 1 / p.z_reg

    def test_errors(self):
        with pytest.raises(ValueError):
            mc.estimate_fixation(SMALL, V0, LQ, AU, AU, trials=10, seed=0)
        with pytest.raises(ValueError):
            mc.estimate_fixation(SMALL, V0, LQ, AU, AS, trials=0, seed=0)


def test_total_variation():
    assert mc.total_variation([1, 0], [0, 1]) == 1.0
    assert mc.total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0


@pytest.mark.slow
def test_bounty_majority_low_quality():
    p = ModelParams(z_reg=20, z_ai=20)
    cfg = mc.SimConfig(mutation_rate=1e-3, steps=5_000_000, burn_in=50_000, seed=17)
    r = mc.simulate_replicas(p, V0, "Bounty", cfg, replicas=8)
    lq = sum(v for st, v in r.occupancy.items() if st.reg is LQ)
    assert lq > 0.5


@pytest.mark.slow
def test_smaller_mutation_closer_to_rare_limit():
    # step budgets scale with 1/mu so each run sees a similar number of mutations
    p = ModelParams(z_reg=10, z_ai=10, beta=0.1)
    analytic = egt.stationary_distribution(p, V0, "Vigilant").vector
    stats = []
    for mu in (1e-2, 1e-3, 1e-4):
        tvs = []
        for seed in range(5):
            cfg = mc.SimConfig(mutation_rate=mu, steps=int(2000 / mu), burn_in=int(20 / mu), seed=seed)
            tvs.append(mc.total_variation(analytic, mc.simulate(p, V0, "Vigilant", cfg).vector()))
        stats.append((np.mean(tvs), np.std(tvs, ddof=1) / np.sqrt(len(tvs))))
    for (m0, se0), (m1, se1) in zip(stats, stats[1:]):
        assert m1 <= m0 + 2 * np.hypot(se0, se1)
