import io
import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from isonet import analytic as an
from isonet import model
from isonet import sim
from isonet import throughput as tp
from isonet.errors import DomainError, TailConditionError
from isonet.sim import SimConfig, SimEstimate

from conftest import scenario


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(trials=0, master_seed=1), dict(trials=1.5, master_seed=1),
                                        dict(trials=10, master_seed=-1),
                                        dict(trials=10, master_seed=1, r_max=0.0),
                                        dict(trials=10, master_seed=1, tail_tol=0.0)])
    def test_rejects(self, kwargs):
        with pytest.raises(DomainError):
            SimConfig(**kwargs)

    def test_interval(self):
        est = SimEstimate.from_mean(0.5, 0.01, 100, 3)
        assert est.ci95_low == pytest.approx(0.5 - 0.0195996398454, abs=1e-13)
        assert est.covers(0.51) and not est.covers(0.52)


class TestSamplePpp:
    def test_empty(self):
        assert sim.sample_ppp(model.homogeneous(), 0.0, 100.0, 1).shape == (0, 2)

    def test_mean_count(self):
        counts = [len(sim.sample_ppp(model.homogeneous(), 1e-3, 500.0, k)) for k in range(200)]
        # Poisson with mean 250 pi
        assert abs(np.mean(counts) - 785.398) < 4 * math.sqrt(785.398 / 200)

    def test_thinned_radii(self):
        shape = model.exp_power(100, 3)
        r = np.concatenate([np.hypot(*sim.sample_ppp(shape, 1e-2, 300.0, k).T) for k in range(20)])
        edges = np.linspace(0, 300, 16)
        # expected share per annulus from r F(r)
        expected = np.array([quad(lambda x: x * shape(x), a, b)[0] for a, b in zip(edges, edges[1:])])
        obs = np.histogram(r, edges)[0]
        mask = expected > 5 * expected.sum() / r.size
        expected = expected[mask] * obs[mask].sum() / expected[mask].sum()
        assert stats.chisquare(obs[mask], expected).pvalue > 1e-3

    def test_domain(self):
        with pytest.raises(DomainError):
            sim.sample_ppp(model.homogeneous(), 1e-3, 0.0, 1)
        with pytest.raises(DomainError):
            sim.sample_ppp(model.homogeneous(), -1.0, 1.0, 1)


class TestWindow:
    def test_homogeneous_bound_closed_form(self):
        s = scenario(model.homogeneous())
        R = 300.0
        exact = 1e-3 * math.pi * (math.pi / 2 - math.atan(R * R))
        assert sim.tail_bound(s, 0.0, R) == pytest.approx(exact, rel=1e-6)

    def test_truncation_radius_is_tight(self, cubic_scenario):
        R = sim.truncation_radius(cubic_scenario, 50.0, 1e-9)
        assert sim.tail_bound(cubic_scenario, 50.0, R) < 1e-9
        assert sim.tail_bound(cubic_scenario, 50.0, R * 0.99) >= 1e-9

    def test_sparse_tail_window_is_finite(self):
        s = scenario(model.power_law(1.5), alpha=4)
        R = sim.truncation_radius(s, 0.0, 1e-6)
        assert math.isfinite(R) and sim.tail_bound(s, 0.0, R) < 1e-6

    def test_alpha2_homogeneous_has_no_window(self):
        with pytest.raises(TailConditionError):
            sim.truncation_radius(scenario(model.homogeneous(), alpha=2), 0.0, 1e-6)

    def test_bound_needs_far_radius(self, cubic_scenario):
        with pytest.raises(DomainError):
            sim.tail_bound(cubic_scenario, 100.0, 50.0)

    def test_mass_radius(self):
        R = sim.mass_radius(model.exponential(250), 1e-6)
        # fraction of r e^{-r/a} beyond R is (1 + R/a) e^{-R/a}
        frac = (1 + R / 250) * math.exp(-R / 250)
        assert frac < 1e-6 and frac > 0.5e-6


class TestMeanInterference:
    def test_empty_is_zero(self):
        est = sim.estimate_mean_interference(scenario(lam=0.0), 10.0, SimConfig(500, 3))
        assert est.mean == 0.0 and est.std_error == 0.0

    def test_homogeneous_coverage_over_seeds(self, flat_alpha4):
        target = an.mean_interference(flat_alpha4, 0.0)
        hits = sum(sim.estimate_mean_interference(flat_alpha4, 0.0, SimConfig(2000, k, tail_tol=1e-5))
                   .covers(target) for k in range(20))
        assert hits >= 16

    def test_unit_gain_matches_mean(self, cubic_scenario):
        cfg = SimConfig(4000, 11, unit_gain=True)
        est = sim.estimate_mean_interference(cubic_scenario, 60.0, cfg)
        assert abs(est.mean - an.mean_interference(cubic_scenario, 60.0)) < 4 * est.std_error


class TestOutageAndLaplace:
    def test_noise_only(self):
        s = scenario(lam=0.0, eta=0.1, beta=0.5)
        est = sim.estimate_outage(s, 10.0, SimConfig(20000, 5))
        assert abs(est.mean - (1 - math.exp(-0.05))) < 4 * est.std_error

    def test_tiny_threshold_never_fails(self, cubic_scenario):
        s = cubic_scenario.replace(channel=cubic_scenario.channel.replace(beta=1e-12))
        assert sim.estimate_outage(s, 0.0, SimConfig(2000, 5)).mean == 0.0

    def test_laplace_at_zero(self, cubic_scenario):
        est = sim.estimate_laplace(cubic_scenario, 0.0, 0.0, SimConfig(10, 1))
        assert est.mean == 1.0 and est.std_error == 0.0

    def test_laplace_rejects_negative(self, cubic_scenario):
        with pytest.raises(DomainError):
            sim.estimate_laplace(cubic_scenario, 0.0, -1.0, SimConfig(10, 1))

    def test_outage_matches_analytic(self, cubic_scenario):
        est = sim.estimate_outage(cubic_scenario, 60.0, SimConfig(20000, 2))
        assert abs(est.mean - an.outage_probability(cubic_scenario, 60.0)) < 4 * est.std_error

    def test_isotropic_in_receiver_angle(self, cubic_scenario):
        cfg = SimConfig(4096, 9)
        fails = [sim.estimate_outage(cubic_scenario, 60.0, cfg, angle=a).mean * cfg.trials
                 for a in np.linspace(0, 2 * math.pi, 8, endpoint=False)]
        table = np.array([fails, [cfg.trials - f for f in fails]])
        assert stats.chi2_contingency(table)[1] > 1e-3


class TestReproducibility:
    def test_same_seed_same_draws(self, cubic_scenario):
        a = sim.simulate_link(cubic_scenario, 30.0, SimConfig(3000, 42))
        b = sim.simulate_link(cubic_scenario, 30.0, SimConfig(3000, 42))
        np.testing.assert_array_equal(a.interference, b.interference)

    def test_worker_count_irrelevant(self, cubic_scenario):
        a = sim.simulate_link(cubic_scenario, 30.0, SimConfig(3000, 42))
        b = sim.simulate_link(cubic_scenario, 30.0, SimConfig(3000, 42, workers=4))
        np.testing.assert_array_equal(a.sinr, b.sinr)

    def test_prefix_stable(self, cubic_scenario):
        a = sim.simulate_link(cubic_scenario, 30.0, SimConfig(1500, 42))
        b = sim.simulate_link(cubic_scenario, 30.0, SimConfig(2500, 42))
        np.testing.assert_array_equal(a.interference, b.interference[:1500])

    def test_different_seeds_differ(self, cubic_scenario):
        a = sim.simulate_link(cubic_scenario, 30.0, SimConfig(100, 1))
        b = sim.simulate_link(cubic_scenario, 30.0, SimConfig(100, 2))
        assert not np.array_equal(a.interference, b.interference)

    def test_ast_deterministic(self, exp_scenario):
        small = exp_scenario.replace(lam=1e-4)
        assert sim.estimate_ast(small, SimConfig(30, 4)) == sim.estimate_ast(small, SimConfig(30, 4, workers=2))

    def test_ast_trials_prefix_stable(self, exp_scenario):
        small = exp_scenario.replace(lam=1e-4)
        r_max = sim.mass_radius(small.shape)
        short = sim._ast_block(small, r_max, 4, 0, None, 10)
        full = sim._ast_block(small, r_max, 4, 0, None, 20)
        np.testing.assert_array_equal(short[0][:10], full[0][:10])
        np.testing.assert_array_equal(short[1], full[1])


class TestAst:
    def test_empty_network(self):
        est = sim.estimate_ast(scenario(model.exponential(250), lam=0.0), SimConfig(10, 1))
        assert math.isnan(est.mean)

    def test_agrees_with_analytic(self, exp_scenario):
        s = exp_scenario.replace(lam=2e-4)
        est = sim.estimate_ast(s, SimConfig(200, 8))
        target = tp.ast(tp.AstQuery(s))
        assert abs(est.mean - target) < 4 * est.std_error

    def test_connected_agrees_with_analytic(self):
        s = scenario(model.exponential(250), lam=2e-4, alpha=2, eta=10 ** -0.8, beta=1.0)
        est = sim.estimate_ast(s, SimConfig(200, 8), lambda_r=1e-2)
        assert abs(est.mean - tp.connected_success_ratio(s, 1e-2)) < 4 * est.std_error

    def test_rejects_bad_receiver_intensity(self, exp_scenario):
        with pytest.raises(DomainError):
            sim.estimate_ast(exp_scenario, SimConfig(10, 1), lambda_r=0.0)


class TestRawDump:
    def test_format(self):
        samples = sim.LinkSamples(np.array([0.5, 0.0]), np.array([0.2, math.inf]))
        buf = io.StringIO()
        sim.write_raw_samples(samples, 0.5, buf)
        assert buf.getvalue().splitlines() == [
            "trial_index,interference,sinr,outage_flag", "0,0.5,0.2,1", "1,0.0,inf,0"]


class TestWilson:
    def test_reference_interval(self):
        # 10 of 100: Wilson interval (0.0552, 0.1744)
        est = SimEstimate.from_count(10, 100, 0)
        assert est.mean == 0.1 and est.std_error == pytest.approx(0.03)
        assert (est.ci95_low, est.ci95_high) == pytest.approx((0.05523, 0.17437), abs=1e-5)

    def test_zero_count_has_width(self):
        est = SimEstimate.from_count(0, 1000, 0)
        assert est.ci95_low == pytest.approx(0.0, abs=1e-15)
        assert est.ci95_high == pytest.approx(0.00383, abs=1e-5)
