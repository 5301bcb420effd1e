"""Smooth target functions with derivative oracles, Taylor tables, and built-in examples."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class HolderTarget:
    """A target function with value and partial-derivative oracles.

    ``value_oracle`` maps an (n, dim) array to n values; ``deriv_oracle``
    takes a multi-index (tuple of dim nonnegative ints) and an (n, dim) array
    and returns the corresponding partial derivative at each point. ``bound``
    is a radius dominating |d^a f| for all |a| <= floor(beta) (spot-checkable,
    not proven).
    """

    dim: int
    beta: float
    bound: float
    value_oracle: Callable[[np.ndarray], np.ndarray]
    deriv_oracle: Callable[[tuple, np.ndarray], np.ndarray]
    name: str = "target"

    def value(self, X) -> np.ndarray:
        return np.asarray(self.value_oracle(_rows(X, self.dim)), dtype=np.float64)

    def deriv(self, alpha, X) -> np.ndarray:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 for a in alpha):
            raise ValueError(f"bad multi-index {alpha} for dim {self.dim}")
        return np.asarray(self.deriv_oracle(alpha, _rows(X, self.dim)), dtype=np.float64)

    @property
    def taylor_degree(self) -> int:
        return int(math.floor(self.beta))

    def max_abs_derivative(self, points, max_order: int | None = None) -> float:
        """Largest sampled |d^a f| over all orders up to floor(beta); invariant spot-check."""
        order = self.taylor_degree if max_order is None else max_order
        worst = 0.0
        for alpha in multi_indices(self.dim, order):
            worst = max(worst, float(np.max(np.abs(self.deriv(alpha, points)))))
        return worst


def _rows(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError(f"points must be (n, {dim}), got {X.shape}")
    return X


def multi_indices(dim: int, max_degree: int) -> list[tuple[int, ...]]:
    """All multi-indices with |alpha| <= max_degree, ordered by degree then lexicographically."""

    def compositions(total, slots):
        if slots == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, slots - 1):
                yield (head,) + tail

    result = []
    for degree in range(max_degree + 1):
        result.extend(sorted(compositions(degree, dim)))
    return result


def factorial_multi(alpha) -> float:
    return float(math.prod(math.factorial(a) for a in alpha))


def taylor_expand(target: HolderTarget, center) -> dict[tuple[int, ...], float]:
    """Taylor coefficient table {alpha: d^a f(center) / a!} up to degree floor(beta)."""
    center = np.asarray(center, dtype=np.float64)
    if center.ndim != 1 or center.shape[0] != target.dim:
        raise ValueError(f"center must be a vector of length {target.dim}")
    coeffs = {}
    point = center[None, :]
    for alpha in multi_indices(target.dim, target.taylor_degree):
        coeffs[alpha] = float(target.deriv(alpha, point)[0]) / factorial_multi(alpha)
    return coeffs


def poly_eval(coeffs: dict, center, X) -> np.ndarray:
    """Evaluate sum_a c_a * (x - center)^a at each row of X."""
    center = np.asarray(center, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    shifted = X - center
    out = np.zeros(X.shape[0])
    for alpha, c in coeffs.items():
        if c == 0.0:
            continue
        term = np.full(X.shape[0], c)
        for axis, power in enumerate(alpha):
            if power:
                term = term * shifted[:, axis] ** power
        out += term
    return out


def rebase_to_monomials(coeffs: dict, center) -> dict[tuple[int, ...], float]:
    """Rewrite sum_a c_a (x - center)^a as sum_g ct_g x^g via the binomial theorem."""
    center = np.asarray(center, dtype=np.float64)
    out: dict[tuple[int, ...], float] = {}
    for alpha, c in coeffs.items():
        if c == 0.0:
            continue
        ranges = [range(a + 1) for a in alpha]
        for gamma in _product(ranges):
            weight = c
            for ai, gi, ci in zip(alpha, gamma, center):
                weight *= math.comb(ai, gi) * (-ci) ** (ai - gi)
            if weight != 0.0:
                key = tuple(gamma)
                out[key] = out.get(key, 0.0) + weight
    return out


def _product(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# built-in targets


def constant_target(dim: int, value: float) -> HolderTarget:
    def val(X):
        return np.full(X.shape[0], float(value))

    def deriv(alpha, X):
        if sum(alpha) == 0:
            return val(X)
        return np.zeros(X.shape[0])

    return HolderTarget(
        dim=dim, beta=2.0, bound=max(abs(value), 1.0),
        value_oracle=val, deriv_oracle=deriv, name=f"const({value})",
    )


def sinusoid_target(
    dim: int,
    amplitude: float = 0.5,
    freqs=None,
    phase: float = 0.0,
    beta: float = 2.0,
) -> HolderTarget:
    """a * sin(w . x + phase); every partial derivative is available in closed form."""
    if freqs is None:
        freqs = tuple(2.0 / (1 + i) for i in range(dim))
    w = np.asarray(freqs, dtype=np.float64)
    if w.shape != (dim,):
        raise ValueError("freqs must have one entry per dimension")

    def val(X):
        return amplitude * np.sin(X @ w + phase)

    def deriv(alpha, X):
        order = sum(alpha)
        scale = amplitude * math.prod(float(w[i]) ** a for i, a in enumerate(alpha))
        return scale * np.sin(X @ w + phase + order * math.pi / 2.0)

    degree = int(math.floor(beta))
    bound = abs(amplitude) * max(
        math.prod(float(abs(w[i])) ** a for i, a in enumerate(alpha))
        for alpha in multi_indices(dim, degree)
    )
    return HolderTarget(
        dim=dim, beta=beta, bound=max(1.0, 1.5 * bound),
        value_oracle=val, deriv_oracle=deriv, name="sinusoid",
    )


_SQ2 = math.sqrt(2.0)


def _sim61_bump(z):
    lower = 2.0 * np.sin(2.0 * math.pi * z)
    upper = 4.0 * math.pi / (_SQ2 - 1.0) * (z - 1.0 / _SQ2) ** 2 - math.pi * (_SQ2 - 1.0)
    return np.where(z <= 0.5, lower, upper)


def _sim61_bump_d1(z):
    lower = 4.0 * math.pi * np.cos(2.0 * math.pi * z)
    upper = 8.0 * math.pi / (_SQ2 - 1.0) * (z - 1.0 / _SQ2)
    return np.where(z <= 0.5, lower, upper)


def _sim61_bump_d2(z):
    lower = -8.0 * math.pi**2 * np.sin(2.0 * math.pi * z)
    upper = np.full_like(z, 8.0 * math.pi / (_SQ2 - 1.0))
    return np.where(z <= 0.5, lower, upper)


def sim61_target(dim: int) -> HolderTarget:
    """Pairwise-product plus per-coordinate piecewise bump target (smoothness 2).

    The bump switches from a sine arc to a parabola at z = 0.5 with matching
    value and slope; second derivatives jump there, so order-2 queries at the
    junction are flagged with a warning and use the lower branch.
    """
    if dim < 2:
        raise ValueError("this target needs dim >= 2")

    def val(X):
        cross = np.sum(X[:, :-1] * X[:, 1:], axis=1) / (dim - 1)
        return cross + _sim61_bump(X).sum(axis=1) / dim

    def deriv(alpha, X):
        order = sum(alpha)
        if order == 0:
            return val(X)
        if order == 1:
            i = alpha.index(1)
            out = np.zeros(X.shape[0])
            if i > 0:
                out += X[:, i - 1]
            if i < dim - 1:
                out += X[:, i + 1]
            return out / (dim - 1) + _sim61_bump_d1(X[:, i]) / dim
        if order == 2:
            nz = [i for i, a in enumerate(alpha) if a]
            if len(nz) == 2 and abs(nz[0] - nz[1]) == 1:
                return np.full(X.shape[0], 1.0 / (dim - 1))
            if len(nz) == 2:
                return np.zeros(X.shape[0])
            i = nz[0]
            if np.any(X[:, i] == 0.5):
                warnings.warn(
                    "second derivative queried at the z = 0.5 junction; using lower branch"
                )
            return _sim61_bump_d2(X[:, i]) / dim
        raise ValueError(f"derivative order {order} not available for this target")

    return HolderTarget(
        dim=dim, beta=2.0, bound=1.0 + 8.0 * math.pi**2,
        value_oracle=val, deriv_oracle=deriv, name="sim61",
    )


def sim62_target(dim: int) -> HolderTarget:
    """Coordinate-averaged kinked target (smoothness 1): z^2 below 0.5, 3/4 - z above."""

    def val(X):
        per = np.where(X <= 0.5, X**2, 0.75 - X)
        return per.sum(axis=1) / dim

    def deriv(alpha, X):
        order = sum(alpha)
        if order == 0:
            return val(X)
        if order == 1:
            i = alpha.index(1)
            if np.any(X[:, i] == 0.5):
                warnings.warn(
                    "first derivative queried at the z = 0.5 kink; using lower branch"
                )
            return np.where(X[:, i] <= 0.5, 2.0 * X[:, i], -1.0) / dim
        raise ValueError(f"derivative order {order} not available for this target")

    return HolderTarget(
        dim=dim, beta=1.0, bound=1.0,
        value_oracle=val, deriv_oracle=deriv, name="sim62",
    )


def builtin_target(tag: str, dim: int) -> HolderTarget:
    """Look up a named target: sim61, sim62, sinusoid, or const0."""
    if tag == "sim61":
        return sim61_target(dim)
    if tag == "sim62":
        return sim62_target(dim)
    if tag == "sinusoid":
        return sinusoid_target(dim)
    if tag == "const0":
        return constant_target(dim, 0.0)
    raise ValueError(f"unknown target tag: {tag!r}")
