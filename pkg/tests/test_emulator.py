import json

import numpy as np
import pytest
from conftest import identity_emulator, random_emulator

from ecakit.emulator import (
    MlpEmulator,
    load_emulator,
    read_emulator,
    to_document,
    write_emulator,
)
from ecakit.errors import DimensionError, FormatError


def _pre_activations(emulator, x):
    a, zs = x, []
    for layer in emulator.layers:
        z = a @ layer.weights.T + layer.bias
        zs.append(z)
        a = layer.activation.apply(z)
    return zs


def test_identity_forward():
    emulator = identity_emulator(2)
    assert emulator.forward(np.array([[2.0, 3.0]])).tolist() == [[2.0, 3.0]]


def test_single_activations():
    relu = MlpEmulator.from_arrays([[[1.0]]], [[0.0]], ["relu"])
    assert relu.forward([[-1.0]]).tolist() == [[0.0]]
    tanh = MlpEmulator.from_arrays([[[1.0]]], [[0.0]], ["tanh"])
    assert tanh.forward([[1.0]])[0, 0] == pytest.approx(0.7615941559557649, abs=1e-12)
    logistic = MlpEmulator.from_arrays([[[1.0]]], [[0.0]], ["logistic"])
    assert logistic.forward([[0.0]])[0, 0] == 0.5


def test_forward_rejects_wrong_width():
    with pytest.raises(DimensionError):
        identity_emulator(3).forward(np.ones((2, 2)))


def test_vjp_of_linear_maps():
    assert identity_emulator(2).input_vjp([5.0, -1.0], [1.0, 2.0]).tolist() == [1.0, 2.0]
    w = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0]])
    linear = MlpEmulator.from_arrays([w], [np.zeros(2)], ["identity"])
    u = np.array([0.5, 2.0])
    np.testing.assert_allclose(linear.input_vjp(np.ones(3), u), w.T @ u, atol=1e-15)


@pytest.mark.parametrize("activation", ["tanh", "logistic", "relu"])
def test_vjp_matches_finite_differences(rng, activation):
    emulator = random_emulator(rng, [5, 7, 6, 3], activation=activation)
    h = 1e-6
    checked = 0
    while checked < 100:
        x = rng.normal(size=5)
        if activation == "relu" and min(np.min(np.abs(z)) for z in _pre_activations(emulator, x[None])) < 1e-3:
            continue
        u = rng.normal(size=3)
        g = emulator.input_vjp(x, u)
        fd = np.empty(5)
        for i in range(5):
            e = np.zeros(5)
            e[i] = h
            fd[i] = (u @ emulator.forward((x + e)[None])[0] - u @ emulator.forward((x - e)[None])[0]) / (2 * h)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))
        checked += 1


def test_relu_derivative_at_zero_is_zero():
    relu = MlpEmulator.from_arrays([[[1.0]]], [[0.0]], ["relu"])
    assert relu.input_vjp([0.0], [1.0]).tolist() == [0.0]


def test_forward_is_batch_consistent(rng):
    emulator = random_emulator(rng, [8, 16, 16, 2], activation="relu")
    x = rng.normal(size=(50, 8))
    stacked = emulator.forward(x)
    single = np.vstack([emulator.forward(x[i : i + 1]) for i in range(50)])
    assert np.array_equal(stacked, single)


def test_pullback_is_batch_consistent(rng):
    emulator = random_emulator(rng, [4, 6, 2])
    x = rng.normal(size=(20, 4))
    u = rng.normal(size=(20, 2))
    _, pullback = emulator.forward_with_pullback(x)
    stacked = pullback(u)
    single = np.vstack([emulator.input_vjp(x[i], u[i]) for i in range(20)])
    assert np.array_equal(stacked, single)


def test_document_round_trip_is_exact(rng):
    emulator = random_emulator(rng, [3, 4, 2])
    document = to_document(emulator).model_dump()
    reloaded = load_emulator(json.dumps(document))
    assert to_document(reloaded).model_dump() == document
    x = rng.normal(size=(10, 3))
    assert np.array_equal(reloaded.forward(x), emulator.forward(x))


def test_file_round_trip(tmp_path, rng):
    emulator = random_emulator(rng, [2, 3, 1], activation="logistic", output_activation="tanh")
    path = tmp_path / "emulator.json"
    write_emulator(path, emulator)
    reloaded = read_emulator(path)
    x = rng.normal(size=(5, 2))
    assert np.array_equal(reloaded.forward(x), emulator.forward(x))


def _document(**overrides):
    document = {
        "input_dim": 2,
        "output_dim": 1,
        "layers": [{"weights": [[1.0, 2.0]], "bias": [0.0], "activation": "tanh"}],
    }
    document.update(overrides)
    return document


def test_load_rejects_dimension_mismatch():
    with pytest.raises(DimensionError):
        load_emulator(_document(input_dim=3))
    with pytest.raises(DimensionError):
        load_emulator(
            _document(
                layers=[
                    {"weights": [[1.0, 2.0]], "bias": [0.0], "activation": "tanh"},
                    {"weights": [[1.0, 2.0]], "bias": [0.0], "activation": "identity"},
                ]
            )
        )


@pytest.mark.parametrize(
    "document",
    [
        "{not json",
        _document(layers=[]),
        _document(layers=[{"weights": [[1.0, 2.0]], "bias": [0.0], "activation": "softplus"}]),
        _document(layers=[{"weights": [[1.0, 2.0], [1.0]], "bias": [0.0, 0.0], "activation": "tanh"}]),
        {"input_dim": 2},
    ],
)
def test_load_rejects_malformed_documents(document):
    with pytest.raises(FormatError):
        load_emulator(document)


def test_documented_example_ignores_third_input():
    from pathlib import Path

    emulator = read_emulator(Path(__file__).parents[1] / "docs" / "examples" / "linear-chain" / "emulator.json")
    x = np.array([[0.3, -0.2, 0.0], [0.3, -0.2, 5.0]])
    y = emulator.forward(x)
    assert y[0, 0] == y[1, 0]
    assert emulator.input_vjp(x[0], [1.0])[2] == 0.0
