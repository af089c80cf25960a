import numpy as np
import pytest

from ecakit.eca import EcaModel, EcaModelDocument
from ecakit.emulator import MlpEmulator


def identity_emulator(d):
    return MlpEmulator.from_arrays([np.eye(d)], [np.zeros(d)], ["identity"])


def first_coordinate_emulator(d):
    """y = x_1: a linear chain whose only relevant direction is e_1."""
    w = np.zeros((1, d))
    w[0, 0] = 1.0
    return MlpEmulator.from_arrays([w], [np.zeros(1)], ["identity"])


def random_emulator(rng, sizes, activation="tanh", output_activation="identity"):
    weights, biases, activations = [], [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        weights.append(rng.normal(scale=1.0 / np.sqrt(fan_in), size=(fan_out, fan_in)))
        biases.append(rng.normal(scale=0.1, size=fan_out))
        activations.append(output_activation if i == len(sizes) - 2 else activation)
    return MlpEmulator.from_arrays(weights, biases, activations)


def model_with_basis(emulator, basis, seed=None):
    """An EcaModel whose components are the rows of `basis`."""
    basis = np.atleast_2d(np.asarray(basis, dtype=np.float64))
    document = EcaModelDocument(
        input_dim=emulator.input_dim,
        output_dim=emulator.output_dim,
        seed=seed,
        components=basis.tolist(),
    )
    return EcaModel.from_document(document, emulator)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
