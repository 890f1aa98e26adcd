"""Weighted sequence and continuous norms on needlet coefficients, the
cube-averaged maximal operator, Laguerre multipliers, and the measurement
reports backing the norm-equivalence and Nikolskii-type diagnostics.

The sequence F-norm is integrated exactly: tiles are tensor products of
per-axis intervals, so the union of all level breakpoints induces a cell
arrangement on which every level contribution is constant, and the cell
measures have closed forms.  The continuous norms are controlled
approximations: band parts of the function are evaluated on a finer
cubature grid and the outer integral uses that grid's coefficients (the
absolute value breaks polynomial exactness, which is documented behavior).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import as_alpha
from .quadrature import cubature_grid, weight_W
from .needlets import CoeffFn, NeedletCoeffs, NeedletSystem, analyze, total_degree_grid

__all__ = [
    "NormParams",
    "PiecewiseCellFn",
    "f_norm_seq",
    "b_norm_seq",
    "F_norm_cont",
    "B_norm_cont",
    "seminorm_P_star",
    "multiplier_apply",
    "maximal_fn",
    "nikolskii_report",
    "equivalence_report",
    "make_test_corpus",
]


@dataclass(frozen=True)
class NormParams:
    """Smoothness s, weight exponent rho, integrability p, summability q."""

    s: float
    rho: float
    p: float
    q: float

    def __post_init__(self):
        if self.p <= 0.0 or self.q <= 0.0:
            raise ValueError("p and q must be positive")

    def require_F(self):
        if math.isinf(self.p):
            raise ValueError("F-norms require p < infinity")

    @property
    def p_inf(self) -> bool:
        return math.isinf(self.p)

    @property
    def q_inf(self) -> bool:
        return math.isinf(self.q)


def _fsum(arr) -> float:
    return math.fsum(np.asarray(arr, dtype=float).ravel().tolist())


def _axis_weight_factors(system: NeedletSystem, j: int):
    """Per-axis factors of W(4^j; xi) over the level-j node grid."""
    g = system.grids[j]
    shift = 2.0 ** (-j)
    return [(g.axis_xi[ax] + shift) ** (2.0 * a + 1.0)
            for ax, a in enumerate(system.alpha)]


def _outer(vecs):
    acc = vecs[0]
    for v in vecs[1:]:
        acc = np.multiply.outer(acc, v)
    return acc


def _level_amplitudes(system: NeedletSystem, j: int, h: np.ndarray,
                      rho: float, mu_power: float) -> np.ndarray:
    """|h| * W(4^j; xi)^(-rho/d) * mu(R_xi)^mu_power on the level grid."""
    d = system.d
    w_axes = _axis_weight_factors(system, j)
    mu_axes = system.grids[j].axis_tile_measure
    scale = _outer([w ** (-rho / d) for w in w_axes])
    if mu_power != 0.0:
        scale = scale * _outer([m ** mu_power for m in mu_axes])
    return np.abs(h) * scale


def _arrangement(system: NeedletSystem):
    """Per-axis refined breakpoints, cell measures, and per-level cell->tile maps."""
    d = system.d
    breaks, cell_meas, level_maps = [], [], []
    for ax in range(d):
        b = np.unique(np.concatenate([g.axis_breaks[ax] for g in system.grids]))
        breaks.append(b)
        a = system.alpha[ax]
        p = 2.0 * a + 2.0
        cell_meas.append(np.diff(b ** p) / p)
    for j, g in enumerate(system.grids):
        maps = []
        for ax in range(d):
            mid = 0.5 * (breaks[ax][:-1] + breaks[ax][1:])
            idx = np.searchsorted(g.axis_breaks[ax], mid) - 1
            valid = (idx >= 0) & (idx < g.n_j)
            maps.append((np.clip(idx, 0, g.n_j - 1), valid))
        level_maps.append(maps)
    return breaks, cell_meas, level_maps


def _coeffs_levels(coeffs: NeedletCoeffs, system: NeedletSystem):
    if coeffs.system_hash != system.hash:
        raise ValueError("coefficients come from a different system")
    if coeffs.level_count != system.J + 1:
        raise ValueError("level count does not match the system")
    return coeffs.levels


def f_norm_seq(coeffs: NeedletCoeffs, params: NormParams, system: NeedletSystem) -> float:
    """Sequence Triebel-Lizorkin norm, integrated exactly over the cell arrangement."""
    params.require_F()
    levels = _coeffs_levels(coeffs, system)
    _, cell_meas, level_maps = _arrangement(system)
    cells_shape = tuple(len(m) for m in cell_meas)
    acc = np.zeros(cells_shape)
    use_sup = params.q_inf
    for j in range(system.J + 1):
        amp = _level_amplitudes(system, j, levels[j], params.rho, -0.5)
        idxs = [m[0] for m in level_maps[j]]
        valids = [m[1] for m in level_maps[j]]
        vals = amp[np.ix_(*idxs)] * _outer([v.astype(float) for v in valids])
        term = (2.0 ** (params.s * j)) * vals
        if use_sup:
            acc = np.maximum(acc, term)
        else:
            acc += term ** params.q
    integrand = acc ** params.p if use_sup else acc ** (params.p / params.q)
    total = _fsum(integrand * _outer(cell_meas))
    return total ** (1.0 / params.p)


def b_norm_seq(coeffs: NeedletCoeffs, params: NormParams, system: NeedletSystem) -> float:
    """Sequence Besov norm: inner l_p over nodes, outer l_q over levels."""
    levels = _coeffs_levels(coeffs, system)
    terms = []
    for j in range(system.J + 1):
        if params.p_inf:
            amp = _level_amplitudes(system, j, levels[j], params.rho, -0.5)
            inner = float(np.max(amp)) if amp.size else 0.0
        else:
            amp = _level_amplitudes(system, j, levels[j], params.rho,
                                    1.0 / params.p - 0.5)
            inner = _fsum(amp ** params.p) ** (1.0 / params.p)
        terms.append(2.0 ** (params.s * j) * inner)
    if params.q_inf:
        return max(terms) if terms else 0.0
    return _fsum([t ** params.q for t in terms]) ** (1.0 / params.q)


def _band_projection(f: CoeffFn, system: NeedletSystem, j: int) -> CoeffFn | None:
    """Coefficient function of the level-j band part of f (None if empty)."""
    cap = min(system.band_degree(j), f.max_degree)
    w = system.filter_weights(j, "phi", system.d * cap)
    sl = (slice(0, cap + 1),) * f.d
    block = f.coeffs[sl] * w[total_degree_grid((cap + 1,) * f.d)]
    if not np.any(block):
        return None
    arr = np.zeros_like(f.coeffs)
    arr[sl] = block
    return CoeffFn(f.alpha, f.max_degree, arr)


def _cont_levels(f: CoeffFn, system: NeedletSystem):
    """Levels whose filter band can touch the spectrum of f."""
    lo = system.pair.a_hat.support[0]
    top, j = 0, 1
    while lo * 4.0 ** (j - 1) <= f.max_degree and j <= system.J + 8:
        top = j
        j += 1
    return range(0, top + 1)


def F_norm_cont(f: CoeffFn, params: NormParams, system: NeedletSystem,
                integration_level: int) -> float:
    """Continuous Triebel-Lizorkin norm on a finer cubature grid.

    Band parts are formed exactly in coefficient space; the pointwise
    l_q-combination and the outer L^p integral use the level
    ``integration_level`` cubature, which must exceed the system level J.
    """
    params.require_F()
    if integration_level <= system.J:
        raise ValueError("integration level must exceed the system level J")
    grid = cubature_grid(integration_level, system.d, system.alpha,
                         system.delta, system.c_star)
    pts = grid.points()
    c = grid.coeffs()
    acc = np.zeros(len(pts))
    for j in _cont_levels(f, system):
        part = _band_projection(f, system, j)
        if part is None:
            continue
        vals = np.abs(part.evaluate(pts))
        wj = weight_W(4.0 ** j, system.alpha, pts) ** (-params.rho / system.d)
        term = (2.0 ** (params.s * j)) * wj * vals
        if params.q_inf:
            acc = np.maximum(acc, term)
        else:
            acc += term ** params.q
    integrand = acc ** params.p if params.q_inf else acc ** (params.p / params.q)
    return _fsum(c * integrand) ** (1.0 / params.p)


def B_norm_cont(f: CoeffFn, params: NormParams, system: NeedletSystem,
                integration_level: int) -> float:
    """Continuous Besov norm; as F_norm_cont with the l_q outside the L^p."""
    if integration_level <= system.J:
        raise ValueError("integration level must exceed the system level J")
    grid = cubature_grid(integration_level, system.d, system.alpha,
                         system.delta, system.c_star)
    pts = grid.points()
    c = grid.coeffs()
    terms = []
    for j in _cont_levels(f, system):
        part = _band_projection(f, system, j)
        if part is None:
            terms.append(0.0)
            continue
        vals = np.abs(part.evaluate(pts))
        wj = weight_W(4.0 ** j, system.alpha, pts) ** (-params.rho / system.d)
        weighted = wj * vals
        if params.p_inf:
            lp = float(np.max(weighted))
        else:
            lp = _fsum(c * weighted ** params.p) ** (1.0 / params.p)
        terms.append(2.0 ** (params.s * j) * lp)
    if params.q_inf:
        return max(terms) if terms else 0.0
    return _fsum([t ** params.q for t in terms]) ** (1.0 / params.q)


def seminorm_P_star(f: CoeffFn, r: int) -> float:
    """sum_n (n+1)^r (sum_{|nu|=n} |f_nu|^2)^(1/2) over the finite degrees."""
    if r < 0:
        raise ValueError("order must be nonnegative")
    deg = total_degree_grid(f.coeffs.shape)
    sq = np.abs(f.coeffs) ** 2
    terms = []
    for n in range(f.max_degree + 1):
        e = _fsum(sq[deg == n])
        if e > 0.0:
            terms.append((n + 1.0) ** r * math.sqrt(e))
    return _fsum(terms)


def multiplier_apply(m, f: CoeffFn) -> CoeffFn:
    """Diagonal multiplier: coefficient at nu scaled by m(|nu|)."""
    vals = np.asarray([m(k) for k in range(f.d * f.max_degree + 1)])
    deg = total_degree_grid(f.coeffs.shape)
    return CoeffFn(f.alpha, f.max_degree, f.coeffs * vals[deg])


class PiecewiseCellFn:
    """Piecewise-constant function on a tensor grid of cells in R_+^d."""

    def __init__(self, breaks, values, alpha):
        self.alpha = as_alpha(alpha)
        self.breaks = tuple(np.asarray(b, dtype=float) for b in breaks)
        if len(self.breaks) != self.alpha.d:
            raise ValueError("one breakpoint list per axis is required")
        for b in self.breaks:
            if b[0] < 0.0 or np.any(np.diff(b) <= 0.0):
                raise ValueError("breakpoints must be nonnegative and increasing")
        want = tuple(len(b) - 1 for b in self.breaks)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != want:
            raise ValueError(f"cell values must have shape {want}")

    @property
    def d(self) -> int:
        return self.alpha.d

    def cell_measures(self) -> np.ndarray:
        per_axis = []
        for b, a in zip(self.breaks, self.alpha):
            p = 2.0 * a + 2.0
            per_axis.append(np.diff(b ** p) / p)
        return _outer(per_axis)

    def total_measure(self) -> float:
        return _fsum(self.cell_measures())

    def integral(self) -> float:
        return _fsum(self.values * self.cell_measures())

    def with_values(self, values) -> "PiecewiseCellFn":
        return PiecewiseCellFn(self.breaks, values, self.alpha)


def maximal_fn(samples: PiecewiseCellFn, t: float) -> PiecewiseCellFn:
    """Cube-averaged maximal function restricted to lattice-aligned boxes.

    For each cell the supremum runs over all boxes whose corners lie on the
    breakpoint lattice and which contain the cell; by the doubling property
    of the weighted measure this differs from the full supremum by at most
    a fixed constant factor.  Implemented for d <= 2.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    mu = samples.cell_measures()
    num = np.abs(samples.values) ** t * mu

    def padded_prefix(a):
        p = a
        for ax in range(a.ndim):
            p = np.cumsum(p, axis=ax)
        return np.pad(p, [(1, 0)] * a.ndim)

    P_num, P_mu = padded_prefix(num), padded_prefix(mu)
    out = np.zeros_like(samples.values)

    if samples.d == 1:
        m = len(samples.values)
        for a in range(m):
            for b in range(a + 1, m + 1):
                ratio = ((P_num[b] - P_num[a]) / (P_mu[b] - P_mu[a])) ** (1.0 / t)
                np.maximum(out[a:b], ratio, out=out[a:b])
        return samples.with_values(out)

    if samples.d == 2:
        m1, m2 = samples.values.shape
        for a1 in range(m1):
            for b1 in range(a1 + 1, m1 + 1):
                n_strip = P_num[b1] - P_num[a1]
                m_strip = P_mu[b1] - P_mu[a1]
                for a2 in range(m2):
                    for b2 in range(a2 + 1, m2 + 1):
                        nn = n_strip[b2] - n_strip[a2]
                        mm = m_strip[b2] - m_strip[a2]
                        ratio = (nn / mm) ** (1.0 / t)
                        region = out[a1:b1, a2:b2]
                        np.maximum(region, ratio, out=region)
        return samples.with_values(out)

    raise NotImplementedError("maximal operator implemented for d <= 2")


def _lp_grid_norm(vals: np.ndarray, c: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(vals)))
    return _fsum(c * np.abs(vals) ** p) ** (1.0 / p)


def nikolskii_report(n: int, alpha, p: float, q: float, s: float = 0.0,
                     trials: int = 20, seed: int = 0,
                     n_set=(16, 64, 256)) -> dict:
    """Measured growth exponents for the two norm inequalities on V_n.

    Over random g in V_n the report records max ||g||_p / ||g||_q and the
    weighted variant with W-powers, then fits the growth exponent across
    the n-set.  Only finiteness and stability are asserted by callers; the
    inequality constants themselves are not effective.
    """
    if not (0.0 < q <= p):
        raise ValueError("requires 0 < q <= p")
    av = as_alpha(alpha)
    if av.d != 1:
        raise NotImplementedError("report implemented for d = 1")
    from .quadrature import gauss_laguerre

    def norms_for(nn: int):
        rule = gauss_laguerre(max(8 * nn, 64), av[0])
        pts = rule.sqrt_nodes.reshape(-1, 1)
        c = rule.cub_coeffs
        r1_max, r2_max = 0.0, 0.0
        for tr in range(trials):
            g = CoeffFn.random(av, nn, seed=seed + tr)
            vals = g.evaluate(pts)
            ww = weight_W(nn, av, pts)
            lhs1 = _lp_grid_norm(vals, c, p)
            rhs1 = _lp_grid_norm(vals, c, q)
            r1_max = max(r1_max, lhs1 / rhs1)
            lhs2 = _lp_grid_norm(ww ** s * vals, c, p)
            rhs2 = _lp_grid_norm(ww ** (s + 1.0 / p - 1.0 / q) * vals, c, q)
            r2_max = max(r2_max, lhs2 / rhs2)
        return r1_max, r2_max

    rows = {int(nn): norms_for(int(nn)) for nn in n_set}
    ns = sorted(rows)
    inv_gap = 1.0 / q - 1.0 / p

    def fit(idx):
        lo, hi = ns[0], ns[-1]
        return math.log(rows[hi][idx] / rows[lo][idx]) / math.log(hi / lo)

    return {
        "p": p, "q": q, "s": s, "trials": trials, "n_set": ns,
        "max_ratio_plain": {nn: rows[nn][0] for nn in ns},
        "max_ratio_weighted": {nn: rows[nn][1] for nn in ns},
        "exponent_plain": fit(0),
        "exponent_weighted": fit(1),
        "theory_exponent_plain": (av.d + av.total) * inv_gap,
        "theory_exponent_weighted": (av.d / 2.0) * inv_gap,
    }


def equivalence_report(system: NeedletSystem, params: NormParams, test_set,
                       space: str = "F", integration_level: int | None = None) -> dict:
    """Continuous-vs-sequence norm ratios over a set of coefficient functions."""
    if space not in ("F", "B"):
        raise ValueError("space must be 'F' or 'B'")
    j_int = system.J + 1 if integration_level is None else int(integration_level)
    rows, skipped = [], []
    for k, f in enumerate(test_set):
        coeffs = analyze(system, f)
        if space == "F":
            cont = F_norm_cont(f, params, system, j_int)
            seq = f_norm_seq(coeffs, params, system)
        else:
            cont = B_norm_cont(f, params, system, j_int)
            seq = b_norm_seq(coeffs, params, system)
        if cont == 0.0 or seq == 0.0:
            skipped.append(k)
            continue
        rows.append({"function_id": k, "cont_norm": cont, "seq_norm": seq,
                     "ratio": cont / seq})
    ratios = [r["ratio"] for r in rows]
    bracket = (min(ratios), max(ratios)) if ratios else (math.nan, math.nan)
    return {
        "space": space,
        "params": {"s": params.s, "rho": params.rho, "p": params.p, "q": params.q},
        "rows": rows,
        "skipped": skipped,
        "bracket": bracket,
        "width": (bracket[1] / bracket[0]) if ratios else math.nan,
    }


def make_test_corpus(system: NeedletSystem, count: int = 20, seed: int = 0) -> list[CoeffFn]:
    """Fixed corpus: band-limited units, random mixtures, decaying spectra."""
    deg = 4 ** (system.J - 1) if system.J >= 1 else 0
    av = system.alpha
    rng = np.random.default_rng(seed)
    corpus: list[CoeffFn] = []
    shape = (deg + 1,) * av.d
    degrees = total_degree_grid(shape)
    # single-band spikes across the degree range
    for m in np.unique(np.linspace(0, deg, min(count // 3 + 1, deg + 1), dtype=int)):
        arr = np.zeros(shape, dtype=complex)
        mask = degrees == m
        arr[mask] = 1.0 / math.sqrt(int(np.count_nonzero(mask)))
        corpus.append(CoeffFn(av, deg, arr))
    # smooth decaying spectra
    while len(corpus) < 2 * count // 3:
        arr = rng.standard_normal(shape) * (1.0 + degrees) ** -1.5
        arr = arr.astype(complex)
        arr[degrees > deg] = 0.0
        corpus.append(CoeffFn(av, deg, arr / np.linalg.norm(arr.ravel())))
    # rough random content
    while len(corpus) < count:
        corpus.append(CoeffFn.random(av, deg, seed=int(rng.integers(1 << 31))))
    return corpus[:count]
