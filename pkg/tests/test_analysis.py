import math

import numpy as np
import pytest
import sympy as sp
from scipy.stats import binom

from noisymem.analysis import (ClusterStats, DeResult, PciTable, analytic_p1, binomial_halfwidth,
                               de_condition_holds, de_recursion_step, de_threshold, de_trajectory,
                               estimate_pci, noiseless_flip_probs, optimize_threshold_phi,
                               pi1_upper_bound, _q1_bar)
from noisymem.model import DegreeDistribution, NoiseSpec, Thresholds


class TestNoiselessFlips:
    def test_safe_constraint(self):
        assert noiseless_flip_probs(0.3, 0.4, 0.5, 0.5)[0] == 0.0

    def test_pi0_monte_carlo(self):
        v = np.random.default_rng(0).uniform(-0.5, 0.5, 1_000_000)
        assert abs(noiseless_flip_probs(0.1, 0.5, 0.5, 0.25)[0] - 0.5) < 1e-15
        assert abs(np.mean(np.abs(v) > 0.25) - 0.5) <= 0.002

    def test_p0_monte_carlo(self):
        u = np.random.default_rng(1).uniform(-0.8, 0.8, 1_000_000)
        p0 = noiseless_flip_probs(0.8, 0.1, 0.6, 0.5)[1]
        assert p0 == pytest.approx(0.25)
        assert abs(np.mean(np.abs(u) > 0.6) - p0) <= 0.002

    def test_zero_noise(self):
        assert noiseless_flip_probs(0.0, 0.0, 0.5, 0.5) == (0.0, 0.0)

    @pytest.mark.parametrize("args", [(1.0, 0.1, 0.5, 0.5), (0.1, -0.1, 0.5, 0.5), (0.1, 0.1, 0.0, 0.5)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            noiseless_flip_probs(*args)


class TestPi1Bound:
    def test_clamps(self):
        assert pi1_upper_bound(0.2, 0.3, 0.5) == 0.0
        assert pi1_upper_bound(0.0, 0.3, 0.5) == 0.0

    @pytest.mark.parametrize("eta, exact", [(0.4, 1 / 6), (0.2, 0.5)])
    def test_examples(self, eta, exact):
        assert pi1_upper_bound(0.3, 0.2, eta) == pytest.approx(exact, abs=1e-12)
        v = np.random.default_rng(2).uniform(-0.3, 0.3, 1_000_000)
        assert abs(np.mean(np.abs(eta + v) < 0.2) - exact) <= 0.002

    def test_invalid_regime(self):
        with pytest.raises(ValueError, match="regime"):
            pi1_upper_bound(0.3, 0.4, 0.2)

    def test_upper_bounds_random_configs(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            nu = rng.uniform(0.05, 0.9)
            psi = rng.uniform(0.05, 0.9)
            eta = psi + rng.uniform(0, 0.5)
            w = eta + rng.uniform(0, 0.5)
            v = rng.uniform(-nu, nu, 200_000)
            freq = np.mean(np.abs(w + v) < psi)
            sigma = math.sqrt(max(freq * (1 - freq), 1e-12) / v.size)
            assert freq <= pi1_upper_bound(nu, psi, eta) + 3 * sigma


def _mc_single_round(cluster, upsilon, phi, pi1, trials, rng):
    """One correction round after one +-1 error: every touched constraint reports sign(w)*s
    unless silenced with probability pi1; success means only the corrupted neuron moves, the right way."""
    S = np.sign(cluster.W)
    d = cluster.pattern_degrees
    n = cluster.size
    idx = rng.integers(n, size=trials)
    s = np.where(rng.random(trials) < 0.5, 1, -1)
    wins = 0
    for t in range(trials):
        y = S[:, idx[t]] * s[t] * (rng.random(S.shape[0]) >= pi1)
        g = (S.T @ y) / d + upsilon * (2 * rng.random(n) - 1)
        move = np.abs(g) >= phi
        wins += move[idx[t]] and np.sign(g[idx[t]]) == s[t] and move.sum() == 1
    return wins / trials


class TestAnalyticP1:
    def test_noiseless_error_free(self):
        st = ClusterStats(5, 3, (1, 2, 3, 1, 2))
        p1, pc1 = analytic_p1(st, 0.0, 0.9, 0.0)
        # q2 = 0; q1 is nonzero only when an uncorrupted node sees a full-strength message
        assert _q1_bar(2, 0.0, 0.0, 0.9, 0.0) == 0.0
        assert 0.0 <= p1 <= 1.0 and pc1 == pytest.approx((1 - p1) ** 5)

    def test_pc1_one_when_q1_vanishes(self):
        # one constraint per neuron shares nothing: share = 1/m, but phi above every partial message
        st = ClusterStats(3, 1, (1, 1, 1))
        assert analytic_p1(st, 0.0, 0.5, 0.0)[1] < 1.0  # a shared degree-1 check always misleads
        st = ClusterStats(4, 40, (1, 1, 1, 1))
        p1, _ = analytic_p1(st, 0.0, 0.5, 0.0)
        assert p1 == pytest.approx(3 / 4 * 1 / 40)

    @pytest.mark.parametrize("ups, phi", [(0.8, 0.6), (0.5, 0.2), (0.3, 0.6), (0.0, 0.5)])
    def test_reduces_to_p0(self, ups, phi):
        for d in (1, 3, 8):
            assert _q1_bar(d, 0.0, ups, phi, 0.0) == noiseless_flip_probs(ups, 0.1, phi, 0.5)[1]

    def test_upper_bounds_monte_carlo(self, default_net):
        model, _ = default_net
        rng = np.random.default_rng(4)
        c = model.clusters[0]
        trials = 100_000
        mc = _mc_single_round(c, 0.2, 0.9, 0.01, trials, rng)
        _, pc1 = analytic_p1(ClusterStats.from_cluster(c), 0.2, 0.9, 0.01)
        assert pc1 >= mc - 2 * math.sqrt(mc * (1 - mc) / trials)

    def test_rejects_bad_pi1(self):
        with pytest.raises(ValueError):
            analytic_p1(ClusterStats(2, 1, (1, 1)), 0.1, 0.5, 1.5)

    def test_stats_validated(self):
        with pytest.raises(ValueError):
            ClusterStats(2, 1, (1,))
        with pytest.raises(ValueError):
            ClusterStats(2, 1, (1, 2))

    def test_stats_from_cluster(self, default_net):
        model, _ = default_net
        st = ClusterStats.from_model(model)
        assert len(st) == model.L
        assert st[3].degrees == tuple(model.clusters[3].pattern_degrees)
        assert st[3].mean_degree == pytest.approx(np.mean(model.clusters[3].pattern_degrees))


def _pe1_oracle(stats, upsilon, pi1, phis):
    """P_e1 over a phi grid from the trinomial law of an uncorrupted neuron's message total."""
    n, m = stats.n, stats.m
    share = min(1.0, stats.mean_degree / m)
    degs, counts = np.unique(stats.degrees, return_counts=True)
    w = counts / counts.sum()

    def move_prob(g):  # Pr(|g + u| >= phi), rows: g values, cols: phi
        g = g[:, None]
        up = np.clip((upsilon - (phis - g)) / (2 * upsilon), 0, 1)
        dn = np.clip((upsilon - (phis + g)) / (2 * upsilon), 0, 1)
        return np.minimum(up + dn, 1)

    q1 = np.zeros_like(phis)
    q2 = np.zeros_like(phis)
    for d, wd in zip(degs, w):
        a = share * (1 - pi1) / 2  # each edge: +1 or -1 with prob a, else 0
        pmf = np.zeros(2 * d + 1)
        for plus in range(d + 1):
            for minus in range(d + 1 - plus):
                pmf[plus - minus + d] += (math.comb(d, plus) * math.comb(d - plus, minus)
                                          * a ** (plus + minus) * (1 - 2 * a) ** (d - plus - minus))
        o = np.arange(-d, d + 1)
        q1 += wd * pmf @ move_prob(o / d)
        j = np.arange(d + 1)
        g = ((d - j) / d)[:, None]
        stay = np.clip((upsilon + phis - g) / (2 * upsilon), 0, 1)
        q2 += wd * binom.pmf(j, d, pi1) @ stay
    p1 = np.clip(q2 / n + (n - 1) / n * q1, 0, 1)
    return 1 - (1 - p1) ** n


class TestPhiOptimizer:
    def test_upper_half(self, default_net):
        model, _ = default_net
        stats = ClusterStats.from_model(model)
        phi, curve = optimize_threshold_phi(0.1, 0.01, stats, np.linspace(0.05, 1.0, 20))
        assert phi > 0.5
        assert curve.shape == (20,)

    def test_large_pi1_never_error_free(self, default_net):
        model, _ = default_net
        st = ClusterStats.from_cluster(model.clusters[0])
        for ups in (0.0, 0.2, 0.5, 0.9):
            _, curve = optimize_threshold_phi(ups, 0.5, st, np.linspace(0.05, 1.0, 20))
            assert curve.min() > 0

    def test_matches_fine_grid_oracle(self, default_net):
        model, _ = default_net
        st = ClusterStats.from_cluster(model.clusters[0])
        grid = np.linspace(1e-4, 1.0, 10_000)
        phi, curve = optimize_threshold_phi(0.1, 0.01, st, grid)
        ref = _pe1_oracle(st, 0.1, 0.01, grid)
        np.testing.assert_allclose(curve, ref, atol=1e-12)
        best = np.flatnonzero(ref <= ref.min() + 1e-12)
        assert phi == grid[best.max()]

    def test_bad_grid(self):
        st = ClusterStats(2, 1, (1, 1))
        for grid in ([], [0.0, 0.5], [0.5, 1.2]):
            with pytest.raises(ValueError):
                optimize_threshold_phi(0.1, 0.01, st, grid)


class TestPci:
    def test_table(self):
        t = PciTable()
        t.add(0.1, 0.0, 2, 100, 0.3)
        t.add(0.1, 0.0, 1, 100, 0.9)
        assert t.lookup(0.1, 0.0, 2) == (0.3, binomial_halfwidth(0.3, 100))
        assert t.pc_list(0.1, 0.0) == [0.9, 0.3]
        assert binomial_halfwidth(0.3, 100) == pytest.approx(1.959964 * math.sqrt(0.21 / 100), rel=1e-6)
        assert t.to_csv().splitlines()[0] == "upsilon,nu,i,trials,p_ci,ci_halfwidth"
        assert t.sorted().rows[0][2] == 1
        with pytest.raises(KeyError):
            t.lookup(0.2, 0.0, 1)
        with pytest.raises(ValueError):
            t.add(0.1, 0.0, 3, 10, 1.5)
        t.add(0.1, 0.0, 4, 10, 0.0)
        with pytest.raises(ValueError):
            t.pc_list(0.1, 0.0)

    def test_single_error(self, default_net, rng, thresholds):
        model, basis = default_net
        pats = np.stack([basis.sample(rng) for _ in range(20)])
        p, total = estimate_pci(model, 1, NoiseSpec(), thresholds, 200, rng, patterns=pats)
        assert total == 200 * model.L
        assert p >= 0.99

    def test_two_errors(self, default_net, rng, thresholds):
        model, basis = default_net
        pats = np.stack([basis.sample(rng) for _ in range(20)])
        p, _ = estimate_pci(model, 2, NoiseSpec(), thresholds, 100, rng, patterns=pats)
        assert p <= 0.05

    def test_deterministic(self, small_net, thresholds):
        model, basis = small_net
        pats = np.stack([basis.sample(np.random.default_rng(k)) for k in range(5)])
        a = estimate_pci(model, 2, NoiseSpec(upsilon=0.5), thresholds, 50, np.random.default_rng(9), patterns=pats)
        b = estimate_pci(model, 2, NoiseSpec(upsilon=0.5), thresholds, 50, np.random.default_rng(9), patterns=pats)
        assert a == b

    def test_validation(self, small_net, rng, thresholds):
        model, basis = small_net
        pats = basis.sample(rng)[None, :]
        with pytest.raises(ValueError):
            estimate_pci(model, 0, NoiseSpec(), thresholds, 10, rng, patterns=pats)
        with pytest.raises(ValueError):
            estimate_pci(model, 1, NoiseSpec(), thresholds, 0, rng, patterns=pats)
        with pytest.raises(ValueError):
            estimate_pci(model, 1, NoiseSpec(), thresholds, 10, rng, patterns=pats[:, :5])


LAM2 = DegreeDistribution({3: 1.0})  # lambda(z) = z^2
RHO5 = DegreeDistribution({6: 1.0})  # rho(z) = z^5


class TestDensityEvolution:
    def test_endpoint(self):
        lam = DegreeDistribution({2: 0.5, 3: 0.5})
        assert de_recursion_step(0.0, 0.3, lam, RHO5, [1.0, 0.2]) == pytest.approx(0.3 * lam(0.0))

    def test_symbolic_example(self):
        z = sp.Rational(1, 5)
        eps = sp.Rational(2, 5)
        expected = eps * (1 - (1 - z) ** 5) ** 2
        got = de_recursion_step(0.2, 0.4, LAM2, RHO5, [1.0, 0.0, 0.0])
        assert abs(got - float(expected)) <= 1e-15

    def test_higher_terms_symbolic(self):
        zs = sp.symbols("z")
        rho = zs ** 5
        pc = [sp.Rational(9, 10), sp.Rational(1, 2), sp.Rational(1, 5)]
        z0 = sp.Rational(3, 10)
        Pi = 1 - sum(p * zs ** i / sp.factorial(i) * sp.diff(rho, zs, i).subs(zs, 1 - zs)
                     for i, p in enumerate(pc))
        expected = sp.Rational(1, 2) * Pi.subs(zs, z0) ** 2
        got = de_recursion_step(0.3, 0.5, LAM2, RHO5, [0.9, 0.5, 0.2])
        assert abs(got - float(expected)) <= 1e-14

    def test_threshold_scan_oracle(self):
        eps_star = de_threshold(LAM2, RHO5, [1.0])
        grid = np.arange(0.0005, 1.0, 0.0005)
        ok = []
        for e in grid:
            z = e
            for _ in range(20000):
                z = e * (1 - (1 - z) ** 5) ** 2
                if z < 1e-6:
                    break
            ok.append(z < 1e-6)
        ok = np.array(ok)
        boundary = grid[np.argmin(ok)] - 0.0005  # last converging point before the first failure
        assert abs(eps_star - boundary) <= 1e-3
        assert ok[: np.argmin(ok)].all()

    def test_no_correction(self):
        assert de_threshold(LAM2, RHO5, [0.0, 0.0]) == 0.0

    def test_monotone_in_pc(self):
        rng = np.random.default_rng(5)
        lam = DegreeDistribution({2: 0.4, 3: 0.6})
        rho = DegreeDistribution({5: 0.5, 8: 0.5})
        for _ in range(5):
            pc = rng.uniform(0, 1, 3)
            bump = np.minimum(1, pc + rng.uniform(0, 0.3, 3))
            assert de_threshold(lam, rho, bump, grid_size=2000) >= de_threshold(lam, rho, pc, grid_size=2000) - 1e-6

    def test_trajectory(self):
        res = de_trajectory(0.1, LAM2, RHO5, [1.0])
        assert isinstance(res, DeResult)
        assert res.trajectory[0] == 0.1 and res.success and res.final < 1e-6
        assert np.all(np.diff(res.trajectory) <= 0)
        bad = de_trajectory(0.9, LAM2, RHO5, [1.0])
        assert not bad.success
        assert bad.to_csv().splitlines()[0] == "epsilon,t,z_t"
        assert len(bad.rows()) == bad.trajectory.size

    def test_condition_small_eps(self):
        assert de_condition_holds(1e-7, LAM2, RHO5, [0.0])

    def test_rejects(self):
        with pytest.raises(ValueError):
            de_recursion_step(0.1, 0.1, LAM2, RHO5, [1.2])
        with pytest.raises(ValueError):
            de_trajectory(1.5, LAM2, RHO5, [1.0])
