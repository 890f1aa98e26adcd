import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagneed.cutoffs import frame_alt, frame_default, make_dual_pair
from lagneed.needlets import CoeffFn, NeedletCoeffs, analyze, build_system
from lagneed.quadrature import weight_W
from lagneed.spaces import (
    B_norm_cont,
    F_norm_cont,
    NormParams,
    PiecewiseCellFn,
    b_norm_seq,
    equivalence_report,
    f_norm_seq,
    make_test_corpus,
    maximal_fn,
    multiplier_apply,
    nikolskii_report,
    seminorm_P_star,
)

DUAL = make_dual_pair(frame_default())
TIGHT = make_dual_pair(frame_default(), tight=True)


@pytest.fixture(scope="module")
def system():
    return build_system(3, 1, [0.5], DUAL)


@pytest.fixture(scope="module")
def tight_system():
    return build_system(3, 1, [0.5], TIGHT)


def single_spike(system, j, gamma):
    levels = [np.zeros((g.n_j,) * system.d, dtype=complex) for g in system.grids]
    levels[j][gamma] = 1.0
    return NeedletCoeffs(tuple(levels), system.hash)


class TestSequenceNorms:
    def test_zero_coefficients(self, system):
        z = analyze(system, CoeffFn([0.5], 0, np.zeros(1, dtype=complex) * 0))
        z = z.scale(0.0)
        params = NormParams(0.5, 0.5, 2.0, 2.0)
        assert f_norm_seq(z, params, system) == 0.0
        assert b_norm_seq(z, params, system) == 0.0

    @pytest.mark.parametrize("s,rho,p,q", [(0.7, 0.4, 1.5, 3.0), (0.0, 0.0, 2.0, 2.0),
                                           (1.0, -0.5, 2.5, 1.0)])
    def test_single_spike_closed_form(self, system, s, rho, p, q):
        j, gamma = 2, (11,)
        coeffs = single_spike(system, j, gamma)
        params = NormParams(s, rho, p, q)
        xi = system.node_point(j, gamma)
        mu = float(system.grids[j].axis_tile_measure[0][gamma[0]])
        closed = (2.0 ** (s * j) * weight_W(4.0 ** j, [0.5], xi) ** (-rho)
                  * mu ** (1.0 / p - 0.5))
        assert f_norm_seq(coeffs, params, system) == pytest.approx(closed, rel=1e-12)
        assert b_norm_seq(coeffs, params, system) == pytest.approx(closed, rel=1e-12)

    def test_degenerate_parameters_agree(self, system):
        rng = np.random.default_rng(0)
        for trial in range(10):
            f = CoeffFn.random([0.5], 16, seed=trial)
            coeffs = analyze(system, f)
            p = float(rng.uniform(0.7, 4.0))
            params = NormParams(rng.uniform(-1, 1), rng.uniform(-1, 1), p, p)
            a = f_norm_seq(coeffs, params, system)
            b = b_norm_seq(coeffs, params, system)
            assert abs(a - b) / b < 1e-12

    def test_tight_parseval_anchor(self, tight_system):
        params = NormParams(0.0, 0.0, 2.0, 2.0)
        for seed in range(5):
            f = CoeffFn.random([0.5], 16, seed=seed)
            val = f_norm_seq(analyze(tight_system, f), params, tight_system)
            assert val == pytest.approx(f.norm2(), rel=1e-10)

    def test_homogeneity(self, system):
        f = CoeffFn.random([0.5], 16, seed=3)
        coeffs = analyze(system, f)
        params = NormParams(0.5, 0.25, 1.5, 3.0)
        base_f = f_norm_seq(coeffs, params, system)
        base_b = b_norm_seq(coeffs, params, system)
        lam = 3.7
        assert f_norm_seq(coeffs.scale(lam), params, system) == pytest.approx(
            lam * base_f, rel=1e-12)
        assert b_norm_seq(coeffs.scale(lam), params, system) == pytest.approx(
            lam * base_b, rel=1e-12)

    def test_triangle_inequality_when_banach(self, system):
        params = NormParams(0.3, 0.2, 2.0, 1.5)
        rng = np.random.default_rng(4)
        for _ in range(5):
            f = CoeffFn.random([0.5], 16, seed=int(rng.integers(1 << 30)))
            g = CoeffFn.random([0.5], 16, seed=int(rng.integers(1 << 30)))
            cf, cg = analyze(system, f), analyze(system, g)
            csum = cf.add(cg)
            for norm in (f_norm_seq, b_norm_seq):
                lhs = norm(csum, params, system)
                rhs = norm(cf, params, system) + norm(cg, params, system)
                assert lhs <= rhs * (1.0 + 1e-10)

    def test_sup_modifications(self, system):
        f = CoeffFn.random([0.5], 16, seed=6)
        coeffs = analyze(system, f)
        # q = inf: outer sup over levels for the b-norm
        params = NormParams(0.4, 0.0, 2.0, math.inf)
        per_level = []
        for j in range(system.J + 1):
            only = NeedletCoeffs(
                tuple(lv if k == j else np.zeros_like(lv)
                      for k, lv in enumerate(coeffs.levels)), system.hash)
            per_level.append(b_norm_seq(only, NormParams(0.4, 0.0, 2.0, 1.0),
                                        system))
        assert b_norm_seq(coeffs, params, system) == pytest.approx(
            max(per_level), rel=1e-12)
        # p = inf b-norm runs the sup amplitude path
        pinf = NormParams(0.0, 0.0, math.inf, 2.0)
        assert b_norm_seq(coeffs, pinf, system) > 0.0
        # F-norms require finite p
        with pytest.raises(ValueError):
            f_norm_seq(coeffs, pinf, system)

    def test_two_dimensional_spike_closed_form(self):
        sys2 = build_system(1, 2, [0.0, 1.0], DUAL)
        j, gamma = 1, (3, 7)
        levels = [np.zeros((g.n_j,) * 2, dtype=complex) for g in sys2.grids]
        levels[j][gamma] = 1.0
        coeffs = NeedletCoeffs(tuple(levels), sys2.hash)
        params = NormParams(0.5, 0.3, 1.5, 2.5)
        xi = sys2.node_point(j, gamma)
        mu = float(np.prod([sys2.grids[j].axis_tile_measure[ax][g]
                            for ax, g in enumerate(gamma)]))
        closed = (2.0 ** (params.s * j)
                  * weight_W(4.0 ** j, [0.0, 1.0], xi) ** (-params.rho / 2.0)
                  * mu ** (1.0 / params.p - 0.5))
        assert f_norm_seq(coeffs, params, sys2) == pytest.approx(closed, rel=1e-12)
        assert b_norm_seq(coeffs, params, sys2) == pytest.approx(closed, rel=1e-12)

    def test_two_dimensional_degeneracy(self):
        sys2 = build_system(1, 2, [0.0, 0.5], DUAL)
        for trial in range(4):
            f = CoeffFn.random([0.0, 0.5], 4, seed=trial)
            coeffs = analyze(sys2, f)
            params = NormParams(0.4, 0.6, 1.8, 1.8)
            a = f_norm_seq(coeffs, params, sys2)
            b = b_norm_seq(coeffs, params, sys2)
            assert abs(a - b) / b < 1e-12

    def test_cell_integration_against_monte_carlo(self, system):
        # weighted Monte-Carlo integration of the exact cell integrand
        rng = np.random.default_rng(11)
        params = NormParams(0.5, 0.3, 2.0, 3.0)
        for trial in range(5):
            f = CoeffFn.random([0.5], 16, seed=100 + trial)
            coeffs = analyze(system, f)
            exact = f_norm_seq(coeffs, params, system)

            top = max(g.axis_breaks[0][-1] for g in system.grids)
            n_mc = 200_000
            xs = rng.uniform(0.0, top, size=n_mc)
            vals = np.zeros(n_mc)
            for j in range(system.J + 1):
                g = system.grids[j]
                idx = np.searchsorted(g.axis_breaks[0], xs) - 1
                ok = (idx >= 0) & (idx < g.n_j)
                amp = np.abs(coeffs.levels[j]) \
                    * (g.axis_xi[0] + 2.0 ** (-j)) ** (-params.rho * 2.0) \
                    * g.axis_tile_measure[0] ** -0.5
                term = np.where(ok, amp[np.clip(idx, 0, g.n_j - 1)], 0.0)
                vals += (2.0 ** (params.s * j) * term) ** params.q
            integrand = vals ** (params.p / params.q) * xs ** 2  # w_alpha = x^2
            est = np.mean(integrand) * top
            sem = np.std(integrand) * top / math.sqrt(n_mc)
            assert abs(est - exact ** params.p) < 3.0 * sem


class TestContinuousNorms:
    def test_zero_function(self, system):
        z = CoeffFn([0.5], 2, np.zeros(3, dtype=complex))
        params = NormParams(0.0, 0.0, 2.0, 2.0)
        assert F_norm_cont(z, params, system, 4) == 0.0
        assert B_norm_cont(z, params, system, 4) == 0.0

    def test_tight_level_zero_function_parseval(self, tight_system):
        # degree-0 content: only level 0 contributes for the tight filter,
        # and the L2-case norm reduces to the coefficient value
        arr = np.zeros(1, dtype=complex)
        arr[0] = 2.5
        f = CoeffFn([0.5], 0, arr)
        params = NormParams(0.0, 0.0, 2.0, 2.0)
        got = F_norm_cont(f, params, tight_system, 4)
        assert got == pytest.approx(2.5, rel=1e-6)

    @pytest.mark.parametrize("s", [0.0, 0.7])
    @pytest.mark.parametrize("kind", ["tight", "dual"])
    def test_parseval_per_band_oracle(self, system, tight_system, s, kind):
        # q = p = 2, rho = 0: the squared norm is the filtered energy
        # sum_j 4^(sj) sum_nu a(|nu|/4^(j-1))^2 |f_nu|^2, computable exactly
        sys_ = tight_system if kind == "tight" else system
        f = CoeffFn.random([0.5], 16, seed=21)
        params = NormParams(s, 0.0, 2.0, 2.0)
        got = F_norm_cont(f, params, sys_, 4)
        acc = 0.0
        for j in range(0, 8):
            w = sys_.filter_weights(j, "phi", 16)
            acc += 4.0 ** (s * j) * float(np.sum((w * np.abs(f.coeffs)) ** 2))
        assert got == pytest.approx(math.sqrt(acc), rel=1e-6)

    def test_single_band_B_equals_F(self, system):
        # one active level and p = q makes the two continuous norms equal
        arr = np.zeros(17, dtype=complex)
        arr[16] = 1.0
        f = CoeffFn([0.5], 16, arr)
        params = NormParams(0.5, 0.5, 2.0, 2.0)
        a = F_norm_cont(f, params, system, 4)
        b = B_norm_cont(f, params, system, 4)
        assert a == pytest.approx(b, rel=1e-8)

    def test_requires_finer_integration_level(self, system):
        f = CoeffFn.random([0.5], 4, seed=0)
        with pytest.raises(ValueError):
            F_norm_cont(f, NormParams(0, 0, 2, 2), system, system.J)

    def test_cutoff_independence_bracket(self):
        # two admissible cut-offs give norms with a uniformly bounded ratio
        sys_a = build_system(2, 1, [0.5], make_dual_pair(frame_default()))
        sys_b = build_system(2, 1, [0.5], make_dual_pair(frame_alt()))
        params = NormParams(0.5, 0.5, 2.0, 2.0)
        ratios = []
        for seed in range(8):
            f = CoeffFn.random([0.5], 4, seed=seed)
            na = F_norm_cont(f, params, sys_a, 3)
            nb = F_norm_cont(f, params, sys_b, 3)
            ratios.append(na / nb)
        assert max(ratios) / min(ratios) < 4.0

    def test_besov_embedding_direction_measured(self, system):
        # along s/d - 1/p = s1/d - 1/p1 the finer space controls the coarser;
        # record the empirical constant and require it bounded
        s, p = 1.0, 1.5
        s1 = 0.5
        p1 = 1.0 / (1.0 / p - (s - s1))  # d = 1
        consts = []
        for seed in range(6):
            f = CoeffFn.random([0.5], 16, seed=40 + seed)
            lhs = B_norm_cont(f, NormParams(s1, s1, p1, 2.0), system, 4)
            rhs = B_norm_cont(f, NormParams(s, s, p, 2.0), system, 4)
            consts.append(lhs / rhs)
        assert max(consts) < 50.0


class TestSeminormAndMultiplier:
    def test_unit_lowest_mode(self):
        arr = np.zeros(1, dtype=complex)
        arr[0] = 1.0
        f = CoeffFn([0.5], 0, arr)
        for r in (0, 1, 5):
            assert seminorm_P_star(f, r) == pytest.approx(1.0)

    def test_single_mode_power(self):
        arr = np.zeros(8, dtype=complex)
        arr[7] = 1.0
        f = CoeffFn([0.0], 7, arr)
        for r in (0, 2, 3):
            assert seminorm_P_star(f, r) == pytest.approx(8.0 ** r)

    def test_monotone_in_order(self):
        f = CoeffFn.random([0.0], 12, seed=2)
        vals = [seminorm_P_star(f, r) for r in range(4)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_rejects_negative_order(self):
        f = CoeffFn.random([0.0], 3, seed=0)
        with pytest.raises(ValueError):
            seminorm_P_star(f, -1)

    def test_identity_multiplier(self):
        f = CoeffFn.random([0.0, 0.5], 5, seed=3)
        g = multiplier_apply(lambda k: 1.0, f)
        assert np.allclose(g.coeffs, f.coeffs)

    def test_band_projection_multiplier(self):
        f = CoeffFn.random([0.0], 6, seed=4)
        g = multiplier_apply(lambda k: 1.0 if k == 3 else 0.0, f)
        want = np.zeros_like(f.coeffs)
        want[3] = f.coeffs[3]
        assert np.allclose(g.coeffs, want)

    @given(st.integers(0, 1 << 30))
    @settings(max_examples=20, deadline=None)
    def test_l2_contraction_bound(self, seed):
        f = CoeffFn.random([0.5], 8, seed=seed)
        m = lambda k: 1.0 / (1.0 + k)
        g = multiplier_apply(m, f)
        assert g.norm2() <= 1.0 * f.norm2() + 1e-12


class TestMaximal:
    def make_cells(self, values, alpha=(0.0,)):
        breaks = (np.linspace(0.0, 4.0, len(values) + 1),)
        return PiecewiseCellFn(breaks, np.asarray(values, dtype=float), list(alpha))

    def test_constant_function_fixed_point(self):
        f = self.make_cells(np.ones(8))
        out = maximal_fn(f, 1.0)
        assert np.allclose(out.values, 1.0, atol=1e-12)

    def test_indicator_value_on_its_support(self):
        vals = np.zeros(8)
        vals[3] = 1.0
        out = maximal_fn(self.make_cells(vals), 1.0)
        assert out.values[3] == pytest.approx(1.0)
        assert np.all(out.values[:3] < 1.0 + 1e-12)
        assert np.all(out.values > 0.0)

    def test_monotone(self):
        rng = np.random.default_rng(5)
        f_vals = rng.uniform(0.0, 1.0, size=10)
        g_vals = f_vals + rng.uniform(0.0, 1.0, size=10)
        mf = maximal_fn(self.make_cells(f_vals), 1.5)
        mg = maximal_fn(self.make_cells(g_vals), 1.5)
        assert np.all(mf.values <= mg.values + 1e-12)

    def test_2d_constant(self):
        breaks = (np.linspace(0.0, 2.0, 5), np.linspace(0.0, 3.0, 4))
        f = PiecewiseCellFn(breaks, np.ones((4, 3)), [0.5, 1.0])
        out = maximal_fn(f, 2.0)
        assert np.allclose(out.values, 1.0, atol=1e-12)

    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(ValueError):
            maximal_fn(self.make_cells(np.ones(4)), 0.0)

    def test_fefferman_stein_sanity(self):
        # vector-valued maximal inequality measured on random families
        rng = np.random.default_rng(9)
        breaks = (np.linspace(0.0, 4.0, 13),)
        alpha = [0.5]
        p, q, t = 2.0, 2.0, 1.0
        ratios = []
        for _ in range(5):
            fams = [PiecewiseCellFn(breaks, rng.uniform(0, 1, 12), alpha)
                    for _ in range(4)]
            m_side = sum(maximal_fn(f, t).values ** q for f in fams) ** (1 / q)
            f_side = sum(np.abs(f.values) ** q for f in fams) ** (1 / q)
            mu = fams[0].cell_measures()
            lhs = float(np.sum(m_side ** p * mu)) ** (1 / p)
            rhs = float(np.sum(f_side ** p * mu)) ** (1 / p)
            ratios.append(lhs / rhs)
        assert max(ratios) < 10.0  # measured constant, must stay bounded

    def test_cell_validation(self):
        with pytest.raises(ValueError):
            PiecewiseCellFn((np.array([1.0, 0.5]),), np.array([1.0]), [0.0])
        with pytest.raises(ValueError):
            PiecewiseCellFn((np.array([0.0, 1.0]),), np.ones(3), [0.0])


class TestReports:
    def test_nikolskii_equal_parameters_trivial(self):
        rep = nikolskii_report(16, [0.0], p=2.0, q=2.0, trials=4, seed=0,
                               n_set=(16, 64))
        assert rep["exponent_plain"] == pytest.approx(0.0, abs=1e-12)
        assert rep["exponent_weighted"] == pytest.approx(0.0, abs=1e-12)

    def test_nikolskii_exponents_within_margin(self):
        rep = nikolskii_report(16, [0.0], p=math.inf, q=2.0, trials=10, seed=0,
                               n_set=(16, 64, 256))
        assert rep["exponent_plain"] <= rep["theory_exponent_plain"] + 0.1
        assert rep["exponent_weighted"] <= rep["theory_exponent_weighted"] + 0.1

    def test_nikolskii_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            nikolskii_report(16, [0.0], p=1.0, q=2.0)

    def test_equivalence_skips_zero_functions(self, system):
        z = CoeffFn([0.5], 2, np.zeros(3, dtype=complex))
        rep = equivalence_report(system, NormParams(0, 0, 2, 2), [z])
        assert rep["skipped"] == [0] and rep["rows"] == []

    def test_equivalence_single_band_ratios_finite(self, system):
        arrs = []
        for m in (1, 4, 16):
            arr = np.zeros(17, dtype=complex)
            arr[m] = 1.0
            arrs.append(CoeffFn([0.5], 16, arr))
        rep = equivalence_report(system, NormParams(0.5, 0.5, 2.0, 2.0), arrs)
        assert all(0.0 < r["ratio"] < math.inf for r in rep["rows"])

    def test_equivalence_tight_l2_anchored(self, tight_system):
        corpus = make_test_corpus(tight_system, count=10, seed=0)
        rep = equivalence_report(tight_system, NormParams(0, 0, 2, 2), corpus)
        lo, hi = rep["bracket"]
        assert 0.25 < lo <= hi < 4.0

    def test_corpus_struct(self, system):
        corpus = make_test_corpus(system, count=20, seed=0)
        assert len(corpus) == 20
        assert all(f.max_degree == 16 for f in corpus)
        # deterministic across calls
        again = make_test_corpus(system, count=20, seed=0)
        assert all(np.allclose(a.coeffs, b.coeffs) for a, b in zip(corpus, again))
