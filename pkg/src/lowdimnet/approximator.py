"""Constructive sup-norm approximators for smooth targets on covered supports.

The pipeline mirrors the constructive proof it implements: shift the target
positive, Taylor-expand it on every occupied cube of a gamma-grid cover,
realize all Taylor polynomials simultaneously (piecewise-linear squaring +
product trees), gate each polynomial by its cube's trapezoid indicator,
sum the gated values within gamma-separated cube groups, take the max over
groups, and clip back to the original range.

Accuracy of the squaring/product stages is verified on dense point sets and
refined on failure rather than derived from worst-case constants; refinement
only widens layers, so the assembled depth depends on (beta, D) alone and is
identical across target accuracies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus as nc
from .geometry import HypercubeCover, grid_cover, partition_cover
from .holder import (
    HolderTarget,
    multi_indices,
    poly_eval,
    rebase_to_monomials,
    taylor_expand,
)
from .network import ComplexityTriple, Layer, NetworkArchitecture, complexity, evaluate_batch


class ApproximationError(RuntimeError):
    """Raised when verified refinement cannot reach the requested accuracy."""


@dataclass(frozen=True)
class ApproximatorSpec:
    """Build record: accuracy target, cover scale, and realized complexity."""

    epsilon: float
    gamma: float
    intrinsic_dim_bound: float
    built_complexity: ComplexityTriple
    sup_error: float
    num_cubes: int


def sq_net(refine: int, dim: int = 1, axis: int = 0) -> NetworkArchitecture:
    """Piecewise-linear interpolant of z^2 on [0,1] with 2^refine + 1 knots.

    Reads coordinate ``axis`` of a ``dim``-dimensional input; exact at the
    knots, sup error h^2/8 with h = 2^-refine, depth 2 at any refinement.
    """
    if refine < 1:
        raise ValueError("refine must be >= 1")
    pieces = 2**refine
    h = 1.0 / pieces
    w1 = np.zeros((pieces, dim))
    w1[:, axis] = 1.0
    b1 = -h * np.arange(pieces)
    coeffs = np.full((1, pieces), 2.0 * h)
    coeffs[0, 0] = h
    return NetworkArchitecture(
        (Layer(w1, b1), Layer(coeffs, np.zeros(1)))
    )


def mult_pair_net(refine: int) -> NetworkArchitecture:
    """Approximate product (x, y) -> x*y on [0,1]^2 via 2ab = (a+b)^2/2 ... identity.

    Uses x*y = 2*s((x+y)/2) - s(x)/2 - s(y)/2 with s the squaring net; sup
    error is at most 3 * (squaring error). Depth 4 at any refinement.
    """
    pre = NetworkArchitecture(
        (Layer(np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]), np.zeros(3)),)
    )
    squares = nc.parallel_split_input([sq_net(refine)] * 3)
    combine = NetworkArchitecture(
        (Layer(np.array([[2.0, -0.5, -0.5]]), np.zeros(1)),)
    )
    return nc.chain(pre, squares, combine)


def _selector_net(dim: int, axis: int) -> NetworkArchitecture:
    w = np.zeros((1, dim))
    w[0, axis] = 1.0
    return NetworkArchitecture((Layer(w, np.zeros(1)),))


def _const_one_net(dim: int) -> NetworkArchitecture:
    return NetworkArchitecture((Layer(np.zeros((1, dim)), np.ones(1)),))


def monomial_net(alpha, dim: int, refine: int) -> NetworkArchitecture:
    """x -> x^alpha on [0,1]^dim via a balanced tree of pairwise products.

    Degree 0 and 1 are exact single layers; higher degrees pair factors with
    ``mult_pair_net``. Depth depends only on the degree of ``alpha``.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for dim {dim}")
    degree = sum(alpha)
    if degree == 0:
        return _const_one_net(dim)
    factors = [axis for axis, a in enumerate(alpha) for _ in range(a)]

    def tree(items):
        if len(items) == 1:
            return _selector_net(dim, items[0]) if isinstance(items[0], int) else items[0]
        left = tree(items[: len(items) // 2])
        right = tree(items[len(items) // 2 :])
        depth = max(left.depth, right.depth)
        pair = nc.parallel_shared_input(
            [nc.pad_depth(left, depth), nc.pad_depth(right, depth)]
        )
        return nc.concat(mult_pair_net(refine), pair)

    return tree(factors)


def _verification_points(dim: int, budget: int = 60_000) -> np.ndarray:
    """Deterministic point set in [0,1]^dim dense enough to audit sup errors."""
    per_axis = max(2, int(round(budget ** (1.0 / dim))))
    if per_axis**dim <= 2 * budget:
        axes = [np.linspace(0.0, 1.0, per_axis)] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(20240 + dim)
    return rng.random((budget, dim))


def _refine_for(delta: float, degree: int) -> int:
    """Interpolation level whose tree error estimate stays below delta."""
    if degree < 2:
        return 1
    per_node = delta / (3.0 * max(1, 2 * degree))
    return max(2, math.ceil(0.5 * math.log2(1.0 / (8.0 * per_node))))


def mul_net(
    alpha,
    epsilon: float,
    dim: int | None = None,
    refine: int | None = None,
    max_retries: int = 12,
) -> NetworkArchitecture:
    """Monomial approximator with grid-verified sup error at most ``epsilon``.

    The interpolation level starts from an error-budget estimate and is
    increased until a dense grid confirms the accuracy; refinement widens
    layers but never deepens the network.
    """
    alpha = tuple(int(a) for a in alpha)
    if dim is None:
        dim = len(alpha)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    degree = sum(alpha)
    level = refine if refine is not None else _refine_for(epsilon, degree)
    points = _verification_points(dim)
    truth = np.ones(points.shape[0])
    for axis, power in enumerate(alpha):
        if power:
            truth = truth * points[:, axis] ** power
    for _ in range(max_retries):
        net = monomial_net(alpha, dim, level)
        err = float(np.max(np.abs(evaluate_batch(net, points)[:, 0] - truth)))
        if err <= epsilon:
            return net
        level += 1
    raise ApproximationError(
        f"monomial {alpha}: sup error still above {epsilon} after {max_retries} refinements"
    )


def pol_net(
    centers,
    coeff_tables,
    epsilon: float,
    dim: int | None = None,
    refine: int | None = None,
    max_retries: int = 12,
    verification_points: np.ndarray | None = None,
) -> NetworkArchitecture:
    """Simultaneously realize one shifted polynomial per output channel.

    ``coeff_tables[i]`` maps multi-indices to coefficients of the polynomial
    sum_a c_a (x - centers[i])^a. Every polynomial is rebased to the monomial
    basis, the monomials are realized once and shared, and a final affine
    layer mixes them per channel. Verified sup error <= ``epsilon`` on a
    dense point set, retried at higher refinement on failure.
    """
    centers = [np.asarray(c, dtype=np.float64) for c in centers]
    if not centers:
        raise ValueError("need at least one center")
    if len(centers) != len(coeff_tables):
        raise ValueError("centers and coefficient tables must pair up")
    if dim is None:
        dim = centers[0].shape[0]
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")

    rebased = [rebase_to_monomials(tab, c) for tab, c in zip(coeff_tables, centers)]
    degree = max((sum(g) for table in rebased for g in table), default=0)
    basis = multi_indices(dim, degree)
    channel = {g: k for k, g in enumerate(basis)}

    mix = np.zeros((len(centers), len(basis)))
    for row, table in enumerate(rebased):
        for g, c in table.items():
            mix[row, channel[g]] = c
    mass = float(np.max(np.sum(np.abs(mix), axis=1))) or 1.0

    points = (
        verification_points
        if verification_points is not None
        else _verification_points(dim)
    )
    truth = np.stack(
        [poly_eval(tab, c, points) for tab, c in zip(coeff_tables, centers)], axis=1
    )

    level = refine if refine is not None else _refine_for(epsilon / mass, degree)
    for _ in range(max_retries):
        monos = [monomial_net(g, dim, level) for g in basis]
        depth = max(net.depth for net in monos)
        bank = nc.parallel_shared_input([nc.pad_depth(net, depth) for net in monos])
        mixer = NetworkArchitecture((Layer(mix, np.zeros(len(centers))),))
        net = nc.concat(mixer, bank)
        err = float(np.max(np.abs(evaluate_batch(net, points) - truth)))
        if err <= epsilon:
            return net
        level += 1
    raise ApproximationError(
        f"polynomial bank: sup error still above {epsilon} after {max_retries} refinements"
    )


def simul_net(
    cover: HypercubeCover,
    pol: NetworkArchitecture,
    gamma: float,
    bound: float,
) -> NetworkArchitecture:
    """Gate each polynomial channel by its own cube's trapezoid indicator.

    Output channel k equals the cut-gated value of polynomial k: it matches
    the polynomial inside cube k, vanishes outside the gamma/2 dilation, and
    stays in [0, 2*bound + 2] in between.
    """
    m = len(cover)
    if pol.output_dim != m:
        raise ValueError(
            f"polynomial bank has {pol.output_dim} outputs but cover has {m} cubes"
        )
    dim = cover.dim
    carry = nc.parallel_shared_input([nc.identity_net(dim, pol.depth), pol])
    centers = cover.centers()
    blocks = [
        nc.concat(nc.cut_net(centers[k], gamma, bound), nc.filter_net(dim, m, k))
        for k in range(m)
    ]
    return nc.concat(nc.parallel_shared_input(blocks), carry)


def verify_sup_error(net: NetworkArchitecture, target: HolderTarget, eval_points):
    """Max |net(x) - f(x)| over the points, plus the witnessing point."""
    pts = np.asarray(eval_points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("eval_points must be a nonempty (n, D) array")
    gap = np.abs(evaluate_batch(net, pts)[:, 0] - target.value(pts))
    worst = int(np.argmax(gap))
    return float(gap[worst]), pts[worst]


def derive_gamma(epsilon: float, beta: float, bound: float, dim: int) -> float:
    """Cover scale for a requested accuracy: gamma = (3M)^(-1/beta) eps^(1/beta) / D."""
    return (3.0 * bound) ** (-1.0 / beta) * epsilon ** (1.0 / beta) / dim


def build_approximator(
    target: HolderTarget,
    support_points,
    d_bound: float,
    epsilon: float,
    max_attempts: int = 12,
):
    """Assemble the full approximator and certify its sup error on the support.

    Returns ``(net, spec)`` where the spec records the cover scale, realized
    (W, L, B), and the measured sup error over ``support_points`` (asserted
    to be at most ``epsilon``). Retries tighten the polynomial budget, and
    every second failure also shrinks the cover scale; neither changes the
    network depth.
    """
    pts = np.asarray(support_points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("support_points must be a nonempty (n, D) array")
    if pts.shape[1] != target.dim:
        raise ValueError("support dimension does not match target dimension")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")

    bound = target.bound
    gamma = min(derive_gamma(epsilon, target.beta, bound, target.dim), 0.5)
    pol_eps = epsilon / 2.0
    shift = bound + 1.0

    last_err = math.inf
    for attempt in range(max_attempts):
        cover = grid_cover(pts, gamma)
        centers = cover.centers()
        tables = []
        for center in centers:
            coeffs = taylor_expand(target, center)
            zero = (0,) * target.dim
            coeffs[zero] = coeffs.get(zero, 0.0) + shift
            tables.append(coeffs)

        pol = pol_net(list(centers), tables, pol_eps, dim=target.dim)
        gated = simul_net(cover, pol, gamma, bound)

        groups = partition_cover(cover).groups
        assignment = {cid: g for g, members in enumerate(groups) for cid in members}
        summed = nc.group_sum_net(assignment, len(cover), num_groups=5**target.dim)

        net = nc.chain(gated, summed, nc.max_net(5**target.dim), nc.clip_net(bound))
        sup_err, _ = verify_sup_error(net, target, pts)
        if sup_err <= epsilon:
            spec = ApproximatorSpec(
                epsilon=epsilon,
                gamma=gamma,
                intrinsic_dim_bound=d_bound,
                built_complexity=complexity(net),
                sup_error=sup_err,
                num_cubes=len(cover),
            )
            return net, spec
        last_err = sup_err
        pol_eps *= 0.5
        if attempt % 2 == 1:
            gamma *= 0.75

    raise ApproximationError(
        f"sup error {last_err:.4g} still above {epsilon} after {max_attempts} attempts"
    )
