import numpy as np
import pytest

from ecakit.dataset_io import gen_rudimentary, split
from ecakit.errors import ConfigError, DegenerateDataError, DimensionError, NumericsError
from ecakit.options import MlpArchitecture, TrainOptions
from ecakit.trainer import r2_score, train_mlp


def test_r2_score():
    y = np.array([[1.0], [2.0], [3.0]])
    assert r2_score(y, y) == 1.0
    assert r2_score(np.full((3, 1), 2.0), y) == pytest.approx(0.0)
    with pytest.raises(DegenerateDataError):
        r2_score(y, np.ones((3, 1)))
    with pytest.raises(DimensionError):
        r2_score(y, np.ones((3, 2)))


def test_learns_linear_map(rng):
    x = rng.standard_normal((600, 1))
    x_test = rng.standard_normal((200, 1))
    architecture = MlpArchitecture(hidden_layers=[4], activation="identity")
    options = TrainOptions(lr=0.01, max_epochs=300, patience=20, seed=0)
    emulator = train_mlp(x, 2.0 * x, architecture, options)
    assert (emulator.input_dim, emulator.output_dim) == (1, 1)
    assert r2_score(emulator.forward(x_test), 2.0 * x_test) >= 0.999


def test_training_is_deterministic_with_seed(rng):
    x = rng.standard_normal((100, 2))
    y = np.tanh(x[:, :1] - x[:, 1:])
    architecture = MlpArchitecture(hidden_layers=[5], activation="tanh")
    options = TrainOptions(max_epochs=5, seed=3)
    a = train_mlp(x, y, architecture, options)
    b = train_mlp(x, y, architecture, options)
    assert np.array_equal(a.forward(x), b.forward(x))


def test_rejects_bad_data():
    with pytest.raises(DimensionError):
        train_mlp(np.ones((4, 2)), np.ones((3, 1)))
    with pytest.raises(NumericsError):
        train_mlp(np.array([[1.0], [np.nan]]), np.ones((2, 1)))
    with pytest.raises(ConfigError):
        train_mlp(np.ones((1, 2)), np.ones((1, 1)))


def test_architecture_validation():
    with pytest.raises(ConfigError):
        MlpArchitecture.build(hidden_layers=[4, 0])
    with pytest.raises(ConfigError):
        MlpArchitecture.build(activation="softplus")


@pytest.mark.slow
@pytest.mark.parametrize("vector_valued, threshold", [(False, 0.94), (True, 0.98)])
def test_emulates_rudimentary_data(vector_valued, threshold):
    data = gen_rudimentary(2, 20000, seed=11, vector_valued=vector_valued)
    train, test = split(data, 0.8, seed=12)
    emulator = train_mlp(train.x, train.y, train_options=TrainOptions(seed=13))
    assert r2_score(emulator.forward(test.x), test.y) >= threshold
