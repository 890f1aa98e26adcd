"""Needlet systems: multilevel grids, frame elements, and the analysis and
synthesis operators acting on coefficient-represented functions.

Functions live as finite Laguerre coefficient tensors (``CoeffFn``), so all
inner products against frame elements are computed exactly in coefficient
space; numerical integration enters only through the optional sampling
helper.  Reconstruction is exact (up to rounding) on functions of total
degree at most 4^(J-1): above that the dilated partition of unity is not
yet complete at the top level.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .cutoffs import CutoffPair
from .special import AlphaVector, as_alpha, laguerre_fn_batch
from .quadrature import CubatureGrid, cubature_grid
from .kernels import band_kernels

__all__ = [
    "CoeffFn",
    "NeedletCoeffs",
    "NeedletSystem",
    "build_system",
    "evaluate_needlet",
    "analyze",
    "synthesize",
    "frame_bounds",
    "coeffs_from_samples",
]

TABLE_BYTES_CAP = 2 << 30


def total_degree_grid(shape) -> np.ndarray:
    """Tensor of total degrees |nu| over a coefficient array shape."""
    return sum(np.indices(shape, dtype=np.int64))


@dataclass
class CoeffFn:
    """A function in V_N as its Fourier-Laguerre coefficient tensor.

    coeffs has shape (N+1,)^d; entries with total degree above N must be
    zero, which makes the l2 norm of the tensor the exact L2 norm of the
    function.
    """

    alpha: AlphaVector
    max_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.alpha = as_alpha(self.alpha)
        self.max_degree = int(self.max_degree)
        want = (self.max_degree + 1,) * self.alpha.d
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.shape != want:
            raise ValueError(f"coefficient tensor must have shape {want}, got {arr.shape}")
        over = total_degree_grid(want) > self.max_degree
        if np.any(arr[over] != 0):
            raise ValueError("nonzero coefficients above the stated max degree")
        self.coeffs = arr

    @property
    def d(self) -> int:
        return self.alpha.d

    def norm2(self) -> float:
        return float(np.linalg.norm(self.coeffs.ravel()))

    def inner(self, other: "CoeffFn") -> complex:
        n = min(self.max_degree, other.max_degree) + 1
        sl = (slice(0, n),) * self.d
        return complex(np.vdot(other.coeffs[sl], self.coeffs[sl]))

    def __add__(self, other: "CoeffFn") -> "CoeffFn":
        if other.max_degree != self.max_degree or other.alpha.alpha != self.alpha.alpha:
            raise ValueError("operands must share alpha and degree")
        return CoeffFn(self.alpha, self.max_degree, self.coeffs + other.coeffs)

    def __mul__(self, scalar) -> "CoeffFn":
        return CoeffFn(self.alpha, self.max_degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def evaluate(self, points) -> np.ndarray:
        """Pointwise values at an array of points with shape (..., d)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.d:
            raise ValueError("point dimension mismatch")
        flat = pts.reshape(-1, self.d)
        tables = [laguerre_fn_batch(self.max_degree, a, flat[:, ax], "F")
                  for ax, a in enumerate(self.alpha)]
        vals = np.tensordot(tables[0], self.coeffs, axes=(0, 0))  # (P, rest...)
        for ax in range(1, self.d):
            vals = np.einsum("np,pn...->p...", tables[ax], vals)
        if single:
            return complex(vals[0]) if np.iscomplexobj(vals) else float(vals[0])
        return vals.reshape(pts.shape[:-1])

    @classmethod
    def random(cls, alpha, max_degree: int, seed=0, complex_valued: bool = False,
               normalized: bool = True) -> "CoeffFn":
        av = as_alpha(alpha)
        rng = np.random.default_rng(seed)
        shape = (max_degree + 1,) * av.d
        arr = rng.standard_normal(shape).astype(complex)
        if complex_valued:
            arr = arr + 1j * rng.standard_normal(shape)
        arr[total_degree_grid(shape) > max_degree] = 0.0
        if normalized:
            nrm = np.linalg.norm(arr.ravel())
            if nrm > 0:
                arr = arr / nrm
        return cls(av, max_degree, arr)

    def to_json_dict(self) -> dict:
        idx = np.argwhere(self.coeffs != 0)
        return {
            "alpha": list(self.alpha.alpha),
            "N": self.max_degree,
            "coeffs": [
                {"nu": [int(k) for k in nu],
                 "re": float(self.coeffs[tuple(nu)].real),
                 "im": float(self.coeffs[tuple(nu)].imag)}
                for nu in idx
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CoeffFn":
        av = as_alpha(data["alpha"])
        n = int(data["N"])
        arr = np.zeros((n + 1,) * av.d, dtype=complex)
        for item in data["coeffs"]:
            nu = tuple(int(k) for k in item["nu"])
            if len(nu) != av.d:
                raise ValueError(f"multi-index {nu} has wrong dimension")
            if sum(nu) > n:
                raise ValueError(f"multi-index {nu} exceeds stated degree {n}")
            arr[nu] = float(item["re"]) + 1j * float(item.get("im", 0.0))
        return cls(av, n, arr)


@dataclass
class NeedletCoeffs:
    """Per-level needlet coefficient tensors, tagged with the system hash."""

    levels: tuple[np.ndarray, ...]
    system_hash: str

    @property
    def level_count(self) -> int:
        return len(self.levels)

    def total_energy(self) -> float:
        return float(sum(np.sum(np.abs(lv) ** 2) for lv in self.levels))

    def scale(self, factor) -> "NeedletCoeffs":
        return NeedletCoeffs(tuple(lv * factor for lv in self.levels), self.system_hash)

    def add(self, other: "NeedletCoeffs") -> "NeedletCoeffs":
        if other.system_hash != self.system_hash or other.level_count != self.level_count:
            raise ValueError("coefficient sets belong to different systems")
        return NeedletCoeffs(tuple(a + b for a, b in zip(self.levels, other.levels)),
                             self.system_hash)


class NeedletSystem:
    """All levels 0..J of grids, node tables, and filter weights."""

    def __init__(self, J: int, d: int, alpha: AlphaVector, pair: CutoffPair,
                 delta: float, c_star: float, grids: list[CubatureGrid],
                 table_bytes_cap: int = TABLE_BYTES_CAP):
        self.J = int(J)
        self.d = int(d)
        self.alpha = alpha
        self.pair = pair
        self.delta = float(delta)
        self.c_star = float(c_star)
        self.grids = list(grids)
        self.hash = self._compute_hash()

        need = sum(d * g.n_j * (self.band_degree(j) + 1) * 8
                   for j, g in enumerate(self.grids))
        if need > table_bytes_cap:
            raise ResourceWarning(f"node tables would need {need} bytes, above the cap")
        # per level, per axis: values of the weighted family at the grid nodes
        self.tables: list[tuple[np.ndarray, ...]] = []
        for j, g in enumerate(self.grids):
            deg = self.band_degree(j)
            self.tables.append(tuple(
                laguerre_fn_batch(deg, a, g.axis_xi[ax], "F")
                for ax, a in enumerate(self.alpha)))
        self._sqrt_c = [self._outer([np.sqrt(c) for c in g.axis_c]) for g in self.grids]

    @staticmethod
    def _outer(vecs):
        acc = vecs[0]
        for v in vecs[1:]:
            acc = np.multiply.outer(acc, v)
        return acc

    def band_degree(self, j: int) -> int:
        """Largest total degree the level-j filters can touch."""
        if j == 0:
            return 0
        return int(math.floor(self.pair.a_hat.support[1] * 4 ** (j - 1)))

    def filter_weights(self, j: int, which: str, max_total: int) -> np.ndarray:
        """Filter values on total degrees 0..max_total for one level."""
        w = np.zeros(max_total + 1)
        if j == 0:
            w[0] = 1.0
            return w
        spec = self.pair.a_hat if which == "phi" else self.pair.b_hat
        scale = 4.0 ** (j - 1)
        return np.asarray(spec(np.arange(max_total + 1) / scale), dtype=float)

    def max_degree(self) -> int:
        return 4 ** self.J

    def _compute_hash(self) -> str:
        ext = [f"{g.right_extension:.17g}" for g in self.grids]
        desc = "|".join([
            f"J={self.J}", f"d={self.d}",
            "alpha=" + ",".join(f"{a:.17g}" for a in self.alpha),
            f"delta={self.delta:.17g}", f"cstar={self.c_star:.17g}",
            "pair=" + self.pair.describe(), "ext=" + ";".join(ext),
        ])
        return hashlib.sha256(desc.encode()).hexdigest()

    def node_point(self, j: int, gamma) -> np.ndarray:
        g = self.grids[j]
        gamma = tuple(int(v) for v in gamma)
        if len(gamma) != self.d or any(not 0 <= v < g.n_j for v in gamma):
            raise IndexError(f"node index {gamma} out of range at level {j}")
        return np.array([g.axis_xi[ax][v] for ax, v in enumerate(gamma)])

    def node_coeff(self, j: int, gamma) -> float:
        g = self.grids[j]
        return float(np.prod([g.axis_c[ax][v] for ax, v in enumerate(gamma)]))


def build_system(J: int, d: int, alpha, pair: CutoffPair, delta: float = 0.03,
                 c_star: float = 1.0, point_cap: int = 10_000_000,
                 table_bytes_cap: int = TABLE_BYTES_CAP,
                 validate: bool = True) -> NeedletSystem:
    """Construct a needlet system with grids for levels 0..J."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    av = as_alpha(alpha)
    if av.d != d:
        raise ValueError(f"alpha dimension {av.d} does not match d={d}")
    grids = [cubature_grid(j, d, av, delta, c_star, point_cap=point_cap)
             for j in range(J + 1)]
    system = NeedletSystem(J, d, av, pair, delta, c_star, grids, table_bytes_cap)
    if validate:
        _spot_check_exactness(system)
    return system


def _spot_check_exactness(system: NeedletSystem, tol: float = 1e-8):
    """Cheap per-level check that the cubature reproduces orthonormality."""
    for j, g in enumerate(system.grids):
        for ax in range(system.d):
            t = system.tables[j][ax][: min(3, system.band_degree(j) + 1)]
            gram = (t * g.axis_c[ax]) @ t.T
            err = float(np.max(np.abs(gram - np.eye(len(t)))))
            if err > tol:
                raise ArithmeticError(
                    f"cubature exactness violated at level {j}, axis {ax}: {err:.3e}")


def evaluate_needlet(system: NeedletSystem, j: int, gamma, x,
                     which: str = "phi") -> float:
    """Pointwise value of one frame element: c_xi^(1/2) * (level kernel)(x, xi)."""
    if which not in ("phi", "psi"):
        raise ValueError("which must be 'phi' or 'psi'")
    xi = system.node_point(j, gamma)
    c = system.node_coeff(j, gamma)
    phi, psi = band_kernels(j, system.alpha, system.pair, x, xi)
    return math.sqrt(c) * (phi if which == "phi" else psi)


def _contract_to_nodes(coeff_slice: np.ndarray, tables, cap: int) -> np.ndarray:
    """Fold a coefficient tensor against per-axis node tables."""
    vals = coeff_slice
    for tab in tables:
        vals = np.tensordot(vals, tab[: cap + 1], axes=([0], [0]))
    return vals


def _contract_to_degrees(node_tensor: np.ndarray, tables, cap: int) -> np.ndarray:
    vals = node_tensor
    for tab in tables:
        vals = np.tensordot(vals, tab[: cap + 1], axes=([0], [1]))
    return vals


def analyze(system: NeedletSystem, f: CoeffFn) -> NeedletCoeffs:
    """Needlet coefficients <f, phi_xi> for every level and node.

    Exact in coefficient space: the level-j coefficient at node xi is
    c_xi^(1/2) sum_nu conj(a(|nu|/4^(j-1))) f_nu F_nu(xi).
    """
    if f.alpha.alpha != system.alpha.alpha:
        raise ValueError("function and system have different alpha")
    if f.max_degree > system.max_degree():
        raise ValueError(
            f"degree {f.max_degree} exceeds the system band 4^J = {system.max_degree()}")
    levels = []
    for j in range(system.J + 1):
        cap = min(system.band_degree(j), f.max_degree)
        sl = (slice(0, cap + 1),) * system.d
        w = system.filter_weights(j, "phi", system.d * cap)
        weighted = f.coeffs[sl] * np.conj(w)[total_degree_grid((cap + 1,) * system.d)]
        nodes = _contract_to_nodes(weighted, system.tables[j], cap)
        levels.append(system._sqrt_c[j] * nodes)
    return NeedletCoeffs(tuple(levels), system.hash)


def synthesize(system: NeedletSystem, coeffs: NeedletCoeffs) -> CoeffFn:
    """Sum of h_xi psi_xi as a coefficient function of degree at most 4^J."""
    if coeffs.system_hash != system.hash:
        raise ValueError("coefficients come from a different system")
    if coeffs.level_count != system.J + 1:
        raise ValueError("level count does not match the system")
    n_out = system.max_degree()
    out = np.zeros((n_out + 1,) * system.d, dtype=complex)
    for j in range(system.J + 1):
        cap = min(system.band_degree(j), n_out)
        weighted_nodes = system._sqrt_c[j] * coeffs.levels[j]
        block = _contract_to_degrees(weighted_nodes, system.tables[j], cap)
        w = system.filter_weights(j, "psi", system.d * cap)
        block = block * w[total_degree_grid(block.shape)]
        out[(slice(0, cap + 1),) * system.d] += block
    out[total_degree_grid(out.shape) > n_out] = 0.0
    return CoeffFn(system.alpha, n_out, out)


def frame_bounds(system: NeedletSystem, trials: int = 20, seed: int = 0,
                 complex_valued: bool = False) -> tuple[float, float]:
    """Empirical frame bounds of the analysis family on V_(4^(J-1)).

    Over random unit-norm functions, returns the min and max of the total
    coefficient energy sum |<f, phi_xi>|^2.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    deg = 4 ** (system.J - 1) if system.J >= 1 else 0
    lo, hi = math.inf, -math.inf
    for t in range(trials):
        f = CoeffFn.random(system.alpha, deg, seed=seed + t,
                           complex_valued=complex_valued)
        e = analyze(system, f).total_energy()
        lo, hi = min(lo, e), max(hi, e)
    return lo, hi


def coeffs_from_samples(fn, alpha, max_degree: int, grid: CubatureGrid) -> CoeffFn:
    """Project a sampled function onto V_N by cubature.

    Exact when fn lies in V_m with m + max_degree <= 2 n_j - 1; otherwise
    the result is the cubature approximation of the orthogonal projection.
    """
    av = as_alpha(alpha)
    if av.d != grid.d:
        raise ValueError("alpha and grid dimensions differ")
    vals = np.asarray([fn(p) for p in grid.points()], dtype=complex)
    vals = vals.reshape((grid.n_j,) * grid.d) * grid.coeffs().reshape((grid.n_j,) * grid.d)
    tables = [laguerre_fn_batch(max_degree, a, grid.axis_xi[ax], "F")
              for ax, a in enumerate(av)]
    block = vals
    for tab in tables:
        block = np.tensordot(block, tab, axes=([0], [1]))
    block[total_degree_grid(block.shape) > max_degree] = 0.0
    return CoeffFn(av, max_degree, block)
