"""Network combinators with exact functional semantics and (W, L, B) bookkeeping.

The composition operators never change what a network computes: composition
uses the relu(x) - relu(-x) = x split to carry affine outputs across an
activation boundary, and parallelization stacks weights block-diagonally.
Parameter-count consequences (W at most doubles per composition boundary,
adds exactly under parallelization) follow from the constructions.
"""

from __future__ import annotations

import math

import numpy as np

from .network import DimensionMismatchError, Layer, NetworkArchitecture


class DepthMismatchError(ValueError):
    """Raised when parallel combinators receive nets of unequal depth."""


def concat(second: NetworkArchitecture, first: NetworkArchitecture) -> NetworkArchitecture:
    """Compose two networks so the result computes second(first(x)) exactly.

    The affine output of ``first`` crosses the activation boundary as the
    pair (relu(u), relu(-u)), which ``second``'s first layer recombines.
    """
    if first.output_dim != second.input_dim:
        raise DimensionMismatchError(
            f"cannot compose: first outputs {first.output_dim}, "
            f"second expects {second.input_dim}"
        )
    a1, b1 = first.layers[-1].weight, first.layers[-1].bias
    a2, b2 = second.layers[0].weight, second.layers[0].bias
    split = Layer(np.vstack([a1, -a1]), np.concatenate([b1, -b1]))
    merge = Layer(np.hstack([a2, -a2]), b2)
    layers = first.layers[:-1] + (split, merge) + second.layers[1:]
    return NetworkArchitecture(layers)


def chain(*nets: NetworkArchitecture) -> NetworkArchitecture:
    """Compose nets left-to-right in application order: chain(f, g, h) = h(g(f(x)))."""
    if not nets:
        raise ValueError("chain requires at least one network")
    result = nets[0]
    for net in nets[1:]:
        result = concat(net, result)
    return result


def _stack_biases(nets, layer_index):
    return np.concatenate([n.layers[layer_index].bias for n in nets])


def _block_diag(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def parallel_shared_input(nets) -> NetworkArchitecture:
    """Stack same-input nets so outputs are concatenated: x -> (f1(x), ..., fK(x))."""
    nets = list(nets)
    if not nets:
        raise ValueError("parallel_shared_input requires at least one network")
    depth = nets[0].depth
    if any(n.depth != depth for n in nets):
        raise DepthMismatchError(
            "parallel networks must share depth; pad shorter ones with identity_net via concat"
        )
    if any(n.input_dim != nets[0].input_dim for n in nets):
        raise DimensionMismatchError("parallel_shared_input requires a common input dimension")
    layers = [
        Layer(np.vstack([n.layers[0].weight for n in nets]), _stack_biases(nets, 0))
    ]
    for i in range(1, depth):
        layers.append(
            Layer(_block_diag([n.layers[i].weight for n in nets]), _stack_biases(nets, i))
        )
    return NetworkArchitecture(tuple(layers))


def parallel_split_input(nets) -> NetworkArchitecture:
    """Stack nets over disjoint input blocks: (x1, ..., xK) -> (f1(x1), ..., fK(xK))."""
    nets = list(nets)
    if not nets:
        raise ValueError("parallel_split_input requires at least one network")
    depth = nets[0].depth
    if any(n.depth != depth for n in nets):
        raise DepthMismatchError(
            "parallel networks must share depth; pad shorter ones with identity_net via concat"
        )
    layers = [
        Layer(_block_diag([n.layers[i].weight for n in nets]), _stack_biases(nets, i))
        for i in range(depth)
    ]
    return NetworkArchitecture(tuple(layers))


def identity_net(dim: int, depth: int) -> NetworkArchitecture:
    """Exact identity on R^dim with the requested depth.

    For depth >= 2 the input rides through activations as (relu(x), relu(-x));
    depth 1 is a single affine layer. Nonzero parameters: 2*dim*depth for
    depth >= 2, dim for depth 1; max |entry| is 1.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    eye = np.eye(dim)
    if depth == 1:
        return NetworkArchitecture((Layer(eye, np.zeros(dim)),))
    first = Layer(np.vstack([eye, -eye]), np.zeros(2 * dim))
    middle = Layer(np.eye(2 * dim), np.zeros(2 * dim))
    last = Layer(np.hstack([eye, -eye]), np.zeros(dim))
    return NetworkArchitecture((first,) + (middle,) * (depth - 2) + (last,))


def pad_depth(net: NetworkArchitecture, depth: int) -> NetworkArchitecture:
    """Extend a network to the given depth without changing its function."""
    if depth < net.depth:
        raise ValueError(f"cannot pad depth {net.depth} down to {depth}")
    if depth == net.depth:
        return net
    return concat(identity_net(net.output_dim, depth - net.depth), net)


def _max2_net() -> NetworkArchitecture:
    # max(x1, x2) = relu(x2 - x1) + relu(x1) for nonnegative inputs
    first = Layer(np.array([[1.0, 0.0], [-1.0, 1.0]]), np.zeros(2))
    second = Layer(np.array([[1.0, 1.0]]), np.zeros(1))
    return NetworkArchitecture((first, second))


def max_net(arity: int) -> NetworkArchitecture:
    """Coordinatewise maximum of ``arity`` nonnegative inputs, exactly.

    A balanced tree of two-input max units over 2^(t+1) padded slots,
    t = ceil(log2 arity). Depth is 2(t + 1) + 1 and the nonzero parameter
    count stays below 42*arity. Inputs must be nonnegative: the zero-padded
    slots and the pairwise identity max(a, b) = relu(b - a) + relu(a) are
    only valid on that domain.
    """
    if arity < 2:
        raise ValueError("arity must be >= 2")
    t = math.ceil(math.log2(arity))
    slots = 2 ** (t + 1)
    dummy_weight = np.vstack([np.eye(arity), np.zeros((slots - arity, arity))])
    net = NetworkArchitecture((Layer(dummy_weight, np.zeros(slots)),))
    width = slots
    while width > 1:
        level = parallel_split_input([_max2_net()] * (width // 2))
        net = concat(level, net)
        width //= 2
    return net


def cut_net(center, gamma: float, bound: float) -> NetworkArchitecture:
    """Gate a value by an approximate indicator of a hypercube.

    Input is (x, y) with x in R^D and y >= 0. Writing I for the cube of side
    ``gamma`` centered at ``center`` and m = ``bound``, the realized map is

        (x, y) -> (2m+2) * relu( sum_l tz_l(x_l) + y/(2m+2) - D )

    where tz_l is the unit trapezoid that is 1 on [c_l - gamma/2, c_l + gamma/2]
    and 0 outside [c_l - gamma, c_l + gamma]. For y in [0, 2m+2] the output
    equals y on I, is at most y on the gamma/2 dilation of I, and is 0 outside
    it. Each trapezoid channel carries a mirrored negated copy so the stored
    parameter count matches the calculus-level accounting: 24D + 6 nonzeros
    (for centers in general position) with depth 3.
    """
    center = np.asarray(center, dtype=np.float64)
    if center.ndim != 1:
        raise ValueError("center must be a vector")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    dim = center.shape[0]
    scale = 2.0 * bound + 2.0

    breakpoints = np.array([gamma, gamma / 2.0, -gamma / 2.0, -gamma])
    w1 = np.zeros((8 * dim + 2, dim + 1))
    b1 = np.zeros(8 * dim + 2)
    for axis in range(dim):
        rows = slice(4 * axis, 4 * axis + 4)
        w1[rows, axis] = 1.0
        b1[rows] = breakpoints - center[axis]
        mirror = slice(4 * dim + 1 + 4 * axis, 4 * dim + 1 + 4 * axis + 4)
        w1[mirror, axis] = -1.0
        b1[mirror] = center[axis] - breakpoints
    w1[4 * dim, dim] = 1.0
    w1[8 * dim + 1, dim] = -1.0

    ramp = np.array([2.0, -2.0, -2.0, 2.0]) / gamma
    w2 = np.zeros((2, 8 * dim + 2))
    for axis in range(dim):
        w2[0, 4 * axis : 4 * axis + 4] = ramp
        w2[1, 4 * dim + 1 + 4 * axis : 4 * dim + 1 + 4 * axis + 4] = ramp
    w2[0, 4 * dim] = 1.0 / scale
    b2 = np.array([-float(dim), -float(dim)])

    w3 = np.array([[scale, 0.0]])
    return NetworkArchitecture((Layer(w1, b1), Layer(w2, b2), Layer(w3, np.zeros(1))))


def clip_net(bound: float) -> NetworkArchitecture:
    """Scalar map x -> min(max(1, x), 2m+1) - (m+1) with m = ``bound``, exactly.

    Depth 3 with 12 nonzero parameters (mirror channels included, matching
    the calculus-level accounting); max |entry| is max(1, 2m).
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    m = float(bound)
    l1 = Layer(np.array([[1.0], [-1.0]]), np.array([-1.0, 1.0]))
    l2 = Layer(
        np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, -1.0]]),
        np.array([2.0 * m, -2.0 * m, 0.0]),
    )
    l3 = Layer(np.array([[-1.0, 0.0, 0.0]]), np.array([m]))
    return NetworkArchitecture((l1, l2, l3))


def filter_net(passthrough_dim: int, num_channels: int, channel_index: int) -> NetworkArchitecture:
    """Single affine layer keeping coordinates 0..D-1 and D + channel_index.

    Maps R^(D + m) -> R^(D + 1) where D = ``passthrough_dim`` and
    m = ``num_channels``; ``channel_index`` is 0-based.
    """
    if not 0 <= channel_index < num_channels:
        raise IndexError(
            f"channel_index {channel_index} out of range for {num_channels} channels"
        )
    d, m = passthrough_dim, num_channels
    w = np.zeros((d + 1, d + m))
    w[:d, :d] = np.eye(d)
    w[d, d + channel_index] = 1.0
    return NetworkArchitecture((Layer(w, np.zeros(d + 1)),))


def group_sum_net(group_assignment, num_indices: int, num_groups: int | None = None) -> NetworkArchitecture:
    """Single affine layer summing input coordinates within assigned groups.

    ``group_assignment`` maps each input index 0..m-1 to a group id; output
    coordinate g is the sum of the inputs assigned to group g. ``num_groups``
    may exceed the assigned ids to emit trailing all-zero rows.
    """
    groups = {}
    for index in range(num_indices):
        if index not in group_assignment:
            raise ValueError(f"input index {index} has no group assignment")
        groups[index] = int(group_assignment[index])
    k = max(groups.values()) + 1 if groups else 0
    if num_groups is None:
        num_groups = k
    elif num_groups < k:
        raise ValueError(f"num_groups {num_groups} < largest assigned group id {k - 1} + 1")
    w = np.zeros((num_groups, num_indices))
    for index, g in groups.items():
        w[g, index] = 1.0
    return NetworkArchitecture((Layer(w, np.zeros(num_groups)),))
