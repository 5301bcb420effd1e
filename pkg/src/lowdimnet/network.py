"""Exact representation, evaluation, and complexity accounting of ReLU feedforward nets.

A network is a plain list of affine layers ``(A, b)``. The realized function
applies ReLU after every layer except the last:

    f(x) = A_L relu( ... relu(A_2 relu(A_1 x + b_1) + b_2) ... ) + b_L

Networks are immutable after construction; evaluation is pure, so instances
are safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse


class DimensionMismatchError(ValueError):
    """Raised when layer shapes do not chain or an input has the wrong length."""


def _as_matrix(weight) -> np.ndarray:
    w = np.asarray(weight, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"layer weight must be 2-D, got shape {w.shape}")
    return w


def _as_vector(bias) -> np.ndarray:
    b = np.asarray(bias, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError(f"layer bias must be 1-D, got shape {b.shape}")
    return b


@dataclass(frozen=True)
class Layer:
    """One affine layer: ``weight`` (rows x cols) and ``bias`` (length rows)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = _as_matrix(self.weight)
        b = _as_vector(self.bias)
        if b.shape[0] != w.shape[0]:
            raise DimensionMismatchError(
                f"bias length {b.shape[0]} != weight rows {w.shape[0]}"
            )
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def rows(self) -> int:
        return self.weight.shape[0]

    @property
    def cols(self) -> int:
        return self.weight.shape[1]


# Dense-matmul cost grows with layer area; block-diagonal layers produced by
# the combinators are mostly zeros, so evaluation switches to CSR above this
# size when the layer is sparse enough. Both paths are deterministic.
_SPARSE_MIN_SIZE = 128 * 128
_SPARSE_MAX_DENSITY = 0.10


@dataclass(frozen=True)
class NetworkArchitecture:
    """An ordered stack of layers with consistent dimensions."""

    layers: tuple[Layer, ...]
    _op_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network must have at least one layer")
        for i in range(1, len(layers)):
            if layers[i].cols != layers[i - 1].rows:
                raise DimensionMismatchError(
                    f"layer {i + 1} expects {layers[i].cols} inputs but layer "
                    f"{i} outputs {layers[i - 1].rows}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].cols

    @property
    def output_dim(self) -> int:
        return self.layers[-1].rows

    @property
    def depth(self) -> int:
        return len(self.layers)

    def _operator(self, index: int):
        """Matmul operand for layer ``index``, CSR when large and sparse."""
        op = self._op_cache.get(index)
        if op is None:
            w = self.layers[index].weight
            if w.size >= _SPARSE_MIN_SIZE:
                density = np.count_nonzero(w) / w.size
                if density <= _SPARSE_MAX_DENSITY:
                    op = sparse.csr_matrix(w)
            if op is None:
                op = w
            self._op_cache[index] = op
        return op


@dataclass(frozen=True)
class ComplexityTriple:
    """(W, L, B): nonzero parameter count, layer count, max absolute entry."""

    param_count: int
    depth: int
    max_weight: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def network(layers) -> NetworkArchitecture:
    """Build a network from an iterable of (weight, bias) pairs or Layers."""
    built = []
    for item in layers:
        if isinstance(item, Layer):
            built.append(item)
        else:
            w, b = item
            built.append(Layer(w, b))
    return NetworkArchitecture(tuple(built))


def evaluate(net: NetworkArchitecture, x) -> np.ndarray:
    """Evaluate the network at a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise DimensionMismatchError(
            f"input has shape {x.shape}, expected ({net.input_dim},) at layer 1"
        )
    return evaluate_batch(net, x[None, :])[0]


def evaluate_batch(net: NetworkArchitecture, X) -> np.ndarray:
    """Evaluate the network at each row of an (n, input_dim) array."""
    Z = np.asarray(X, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != net.input_dim:
        raise DimensionMismatchError(
            f"input batch has shape {Z.shape}, expected (n, {net.input_dim}) at layer 1"
        )
    last = net.depth - 1
    for i, layer in enumerate(net.layers):
        op = net._operator(i)
        if sparse.issparse(op):
            Z = np.asarray((op @ Z.T).T)
        else:
            Z = Z @ op.T
        if i < last:
            Z = np.maximum(Z + layer.bias, 0.0)
        else:
            Z = Z + layer.bias
    return Z


def complexity(net: NetworkArchitecture) -> ComplexityTriple:
    """Count strictly nonzero parameters, layers, and the largest |entry|."""
    count = 0
    largest = 0.0
    for layer in net.layers:
        count += int(np.count_nonzero(layer.weight))
        count += int(np.count_nonzero(layer.bias))
        largest = max(
            largest,
            float(np.max(np.abs(layer.weight))),
            float(np.max(np.abs(layer.bias))) if layer.bias.size else 0.0,
        )
    return ComplexityTriple(param_count=count, depth=net.depth, max_weight=largest)


def validate(net: NetworkArchitecture) -> ValidationReport:
    """Report dimension-chain and non-finite violations (empty iff valid)."""
    problems = []
    for i, layer in enumerate(net.layers, start=1):
        if i > 1:
            prev = net.layers[i - 2]
            if layer.cols != prev.rows:
                problems.append(
                    f"layer {i}: expects {layer.cols} inputs, layer {i - 1} "
                    f"outputs {prev.rows}"
                )
        if not np.all(np.isfinite(layer.weight)):
            problems.append(f"layer {i}: non-finite weight entry")
        if not np.all(np.isfinite(layer.bias)):
            problems.append(f"layer {i}: non-finite bias entry")
    return ValidationReport(tuple(problems))


def to_json(net: NetworkArchitecture) -> str:
    """Serialize to the self-describing JSON format (row-major weights)."""
    payload = {
        "input_dim": net.input_dim,
        "layers": [
            {"weight": layer.weight.tolist(), "bias": layer.bias.tolist()}
            for layer in net.layers
        ],
    }
    return json.dumps(payload)


def from_json(text: str) -> NetworkArchitecture:
    """Parse a serialized network, rejecting ragged weight rows."""
    payload = json.loads(text)
    try:
        input_dim = int(payload["input_dim"])
        raw_layers = payload["layers"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed network JSON: missing field {exc}") from exc
    layers = []
    for i, entry in enumerate(raw_layers, start=1):
        rows = entry["weight"]
        if not rows or any(not isinstance(r, list) for r in rows):
            raise ValueError(f"layer {i}: weight must be a non-empty 2-D array")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError(f"layer {i}: ragged weight rows")
        layers.append(Layer(np.array(rows, dtype=np.float64), np.array(entry["bias"], dtype=np.float64)))
    net = NetworkArchitecture(tuple(layers))
    if net.input_dim != input_dim:
        raise ValueError(
            f"declared input_dim {input_dim} != layer-1 width {net.input_dim}"
        )
    return net


def save(net: NetworkArchitecture, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(net))


def load(path) -> NetworkArchitecture:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(fh.read())
