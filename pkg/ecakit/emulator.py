"""
Fully connected feed-forward emulator y_emu(x) and its input gradients.

Networks are exchanged as a plain JSON document listing every layer's weight
matrix (out x in, row-major), bias vector and activation name, so a network
trained elsewhere can be used by transcribing its matrices.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ecakit.errors import DimensionError, FormatError, NumericsError
from ecakit.linalg import Matrix, Vector, as_matrix, as_vector, matmul_rows
from ecakit.utils import read_file_content, write_file_content

logger = logging.getLogger(__name__)


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"
    LOGISTIC = "logistic"
    IDENTITY = "identity"

    def apply(self, z: Matrix) -> Matrix:
        if self is Activation.RELU:
            return np.maximum(z, 0.0)
        if self is Activation.TANH:
            return np.tanh(z)
        if self is Activation.LOGISTIC:
            return 0.5 * (1.0 + np.tanh(0.5 * z))
        return z

    def derivative(self, z: Matrix, a: Matrix) -> Matrix:
        """Derivative at pre-activation z, given a = apply(z). relu'(0) is 0."""
        if self is Activation.RELU:
            return (z > 0.0).astype(np.float64)
        if self is Activation.TANH:
            return 1.0 - a * a
        if self is Activation.LOGISTIC:
            return a * (1.0 - a)
        return np.ones_like(z)


@dataclass(frozen=True, eq=False)
class DenseLayer:
    weights: Matrix
    bias: Vector
    activation: Activation
    weights_t: Matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        weights = as_matrix(self.weights, "weights").copy()
        bias = as_vector(self.bias, "bias").copy()
        if bias.shape[0] != weights.shape[0]:
            raise DimensionError(f"bias has dim {bias.shape[0]} but weights have {weights.shape[0]} rows")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise FormatError("layer parameters must be finite")
        weights_t = np.ascontiguousarray(weights.T)
        for a in (weights, bias, weights_t):
            a.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "weights_t", weights_t)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


Pullback = Callable[[Matrix], Matrix]


class MlpEmulator:
    """An immutable chain of dense layers mapping input_dim -> output_dim."""

    def __init__(self, layers: Sequence[DenseLayer]):
        if len(layers) == 0:
            raise FormatError("an emulator needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise DimensionError(
                    f"layer {i} expects {layers[i].in_dim} inputs but layer {i - 1} produces {layers[i - 1].out_dim}"
                )
        self._layers = tuple(layers)

    @classmethod
    def from_arrays(cls, weights, biases, activations) -> "MlpEmulator":
        return cls([DenseLayer(w, b, Activation(a)) for w, b, a in zip(weights, biases, activations, strict=True)])

    @property
    def layers(self) -> Tuple[DenseLayer, ...]:
        return self._layers

    @property
    def input_dim(self) -> int:
        return self._layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self._layers[-1].out_dim

    def __repr__(self):
        sizes = [self.input_dim] + [layer.out_dim for layer in self._layers]
        acts = ",".join(layer.activation.value for layer in self._layers)
        return f"MlpEmulator({'-'.join(map(str, sizes))}, activations={acts})"

    def _check_input(self, x: Matrix) -> Matrix:
        x = as_matrix(x, "X")
        if x.shape[1] != self.input_dim:
            raise DimensionError(f"emulator expects {self.input_dim} input columns, got {x.shape[1]}")
        return x

    def forward(self, x: Matrix) -> Matrix:
        """Applies the network to every row of x."""
        a = self._check_input(x)
        for layer in self._layers:
            a = layer.activation.apply(matmul_rows(a, layer.weights) + layer.bias)
        if not np.all(np.isfinite(a)):
            raise NumericsError("emulator produced non-finite output")
        return a

    def forward_with_pullback(self, x: Matrix) -> Tuple[Matrix, Pullback]:
        """
        Evaluates the network and returns a function mapping an upstream
        gradient dL/dy (one row per input row) to dL/dx.
        """
        a = self._check_input(x)
        tape = []
        for layer in self._layers:
            z = matmul_rows(a, layer.weights) + layer.bias
            a = layer.activation.apply(z)
            tape.append((z, a))
        if not np.all(np.isfinite(a)):
            raise NumericsError("emulator produced non-finite output")
        n_rows = a.shape[0]

        def pullback(upstream: Matrix) -> Matrix:
            g = as_matrix(upstream, "upstream")
            if g.shape != (n_rows, self.output_dim):
                raise DimensionError(f"upstream gradient must have shape {(n_rows, self.output_dim)}, got {g.shape}")
            for layer, (z, act) in zip(reversed(self._layers), reversed(tape)):
                g = matmul_rows(g * layer.activation.derivative(z, act), layer.weights_t)
            return g

        return a, pullback

    def input_vjp(self, x: Vector, upstream: Vector) -> Vector:
        """Returns J(x)^T upstream for a single input point."""
        x = as_vector(x, "x")
        upstream = as_vector(upstream, "upstream")
        if upstream.shape[0] != self.output_dim:
            raise DimensionError(f"upstream has dim {upstream.shape[0]}, emulator output dim is {self.output_dim}")
        _, pullback = self.forward_with_pullback(x[None, :])
        return pullback(upstream[None, :])[0]


class LayerDocument(BaseModel):
    weights: List[List[float]] = Field(..., description="Weight matrix, out_dim rows of in_dim entries.")
    bias: List[float] = Field(..., description="Bias vector of length out_dim.")
    activation: Literal["relu", "tanh", "logistic", "identity"]


class EmulatorDocument(BaseModel):
    """The weight interchange document."""

    input_dim: int = Field(..., ge=1)
    output_dim: int = Field(..., ge=1)
    layers: List[LayerDocument] = Field(..., min_length=1)


EmulatorSource = Union[EmulatorDocument, dict, str]


def load_emulator(document: EmulatorSource) -> MlpEmulator:
    """Builds an emulator from a document, its dict form, or its JSON text."""
    try:
        if isinstance(document, str):
            document = EmulatorDocument.model_validate_json(document)
        elif not isinstance(document, EmulatorDocument):
            document = EmulatorDocument.model_validate(document)
    except ValidationError as e:
        raise FormatError(f"malformed emulator document: {e}") from e

    layers = []
    for i, layer_doc in enumerate(document.layers):
        rows = layer_doc.weights
        if len(rows) == 0 or len({len(r) for r in rows}) != 1 or len(rows[0]) == 0:
            raise FormatError(f"layer {i} weights are not a non-empty rectangular matrix")
        layers.append(DenseLayer(np.array(rows), np.array(layer_doc.bias), Activation(layer_doc.activation)))

    emulator = MlpEmulator(layers)
    if emulator.input_dim != document.input_dim:
        raise DimensionError(f"input_dim is {document.input_dim} but the first layer takes {emulator.input_dim}")
    if emulator.output_dim != document.output_dim:
        raise DimensionError(f"output_dim is {document.output_dim} but the last layer gives {emulator.output_dim}")
    logger.debug("Loaded %r", emulator)
    return emulator


def to_document(emulator: MlpEmulator) -> EmulatorDocument:
    return EmulatorDocument(
        input_dim=emulator.input_dim,
        output_dim=emulator.output_dim,
        layers=[
            LayerDocument(
                weights=layer.weights.tolist(),
                bias=layer.bias.tolist(),
                activation=layer.activation.value,
            )
            for layer in emulator.layers
        ],
    )


def read_emulator(path) -> MlpEmulator:
    return load_emulator(read_file_content(path))


def write_emulator(path, emulator: MlpEmulator):
    # json.dumps writes floats in shortest round-trip form
    write_file_content(path, json.dumps(to_document(emulator).model_dump(), indent=1))
