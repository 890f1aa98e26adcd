"""Truncated Taylor-series (jet) arithmetic for smooth cut-off derivatives.

A jet is a 1-D float array ``c`` with ``c[i] = f^{(i)}(t0) / i!``.  All
operations truncate at the common length, which is exact for the bump
constructions used here (products, quotients, square roots and affine
argument rescalings of the mollifier ``exp(-1/t)``).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "mollifier_jet",
    "smoothstep_jet",
    "jet_mul",
    "jet_div",
    "jet_sqrt",
    "jet_rescale_arg",
]


def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product truncated to the shorter operand."""
    k = min(len(a), len(b))
    out = np.zeros(k)
    for i in range(k):
        out[i] = np.dot(a[: i + 1], b[i::-1][: i + 1])
    return out


def jet_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Jet of a/b; b[0] must be nonzero."""
    k = min(len(a), len(b))
    if b[0] == 0.0:
        raise ZeroDivisionError("jet division by a series with zero constant term")
    out = np.zeros(k)
    for i in range(k):
        out[i] = (a[i] - np.dot(out[:i], b[i:0:-1][:i])) / b[0]
    return out


def jet_sqrt(a: np.ndarray) -> np.ndarray:
    """Jet of sqrt(a); a[0] must be positive."""
    if a[0] <= 0.0:
        raise ValueError("jet sqrt requires a positive constant term")
    k = len(a)
    out = np.zeros(k)
    out[0] = math.sqrt(a[0])
    for i in range(1, k):
        out[i] = (a[i] - np.dot(out[1:i], out[i - 1 : 0 : -1][: i - 1])) / (2.0 * out[0])
    return out


def jet_rescale_arg(a: np.ndarray, scale: float) -> np.ndarray:
    """Jet of t -> f(scale * t + const) given the jet of f at the mapped point."""
    return a * np.power(scale, np.arange(len(a)))


# Polynomials P_k with  d^k/dt^k exp(-1/t) = exp(-1/t) * P_k(1/t),
# P_0 = 1,  P_{k+1}(w) = w^2 (P_k(w) - P_k'(w)).  Coefficients grow but stay
# exact in float64 for k <= 16, which covers the default order 12.
_MOLL_POLY_CACHE: list[np.ndarray] = [np.array([1.0])]


def _moll_poly(k: int) -> np.ndarray:
    while len(_MOLL_POLY_CACHE) <= k:
        p = _MOLL_POLY_CACHE[-1]
        dp = np.polynomial.polynomial.polyder(p) if len(p) > 1 else np.array([0.0])
        dp = np.pad(dp, (0, len(p) - len(dp)))
        q = np.pad(p - dp, (2, 0))  # multiply by w^2
        _MOLL_POLY_CACHE.append(q)
    return _MOLL_POLY_CACHE[k]


def mollifier_jet(t: float, order: int) -> np.ndarray:
    """Jet of m(t) = exp(-1/t) (t > 0), extended by zero for t <= 0."""
    out = np.zeros(order + 1)
    if t <= 0.0:
        return out
    w = 1.0 / t
    base = math.exp(-w)
    if base == 0.0:
        return out
    fact = 1.0
    for k in range(order + 1):
        if k > 0:
            fact *= k
        out[k] = base * np.polynomial.polynomial.polyval(w, _moll_poly(k)) / fact
    return out


def smoothstep_jet(u: float, order: int) -> np.ndarray:
    """Jet of s(u) = m(u) / (m(u) + m(1-u)): 0 for u<=0, 1 for u>=1, C-infinity."""
    if u <= 0.0:
        return np.zeros(order + 1)
    if u >= 1.0:
        out = np.zeros(order + 1)
        out[0] = 1.0
        return out
    num = mollifier_jet(u, order)
    # jet of m(1-u): signs alternate under u -> 1-u
    rev = mollifier_jet(1.0 - u, order) * np.power(-1.0, np.arange(order + 1))
    return jet_div(num, num + rev)
