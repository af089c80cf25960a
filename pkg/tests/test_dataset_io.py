import numpy as np
import pytest

from ecakit.dataset_io import (
    Standardizer,
    fit_standardizer,
    gen_rudimentary,
    inverse_standardize,
    load_dataset,
    load_matrix,
    rudimentary_response,
    save_dataset,
    save_matrix,
    split,
    standardize,
)
from ecakit.errors import ConfigError, DegenerateDataError, FormatError, IoError


def test_fit_standardizer_uses_population_std():
    s = fit_standardizer(np.array([[0.0], [2.0]]))
    assert s.means.tolist() == [1.0]
    assert s.stds.tolist() == [1.0]


def test_fit_standardizer_rejects_constant_columns():
    with pytest.raises(DegenerateDataError):
        fit_standardizer(np.array([[1.0, 0.0], [1.0, 2.0]]))
    with pytest.raises(DegenerateDataError):
        fit_standardizer(np.array([[1.0, 2.0]]))


def test_standardize_examples():
    s = Standardizer(np.array([1.0]), np.array([2.0]))
    assert standardize(s, np.array([[3.0]])).tolist() == [[1.0]]
    assert inverse_standardize(Standardizer(np.array([0.0]), np.array([2.0])), np.array([[1.5]])).tolist() == [[3.0]]


def test_standardize_round_trip(rng):
    x = rng.normal(loc=5.0, scale=3.0, size=(50, 4))
    s = fit_standardizer(x)
    z = s.standardize(x)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(s.inverse_standardize(z), x, rtol=1e-12)


def test_rudimentary_responses():
    assert rudimentary_response(np.array([[2.0]]), np.array([1.0]))[0, 0] == 8.0
    v = np.full(4, 0.5)
    assert rudimentary_response(np.ones((1, 4)), v)[0, 0] == 8.0
    np.testing.assert_array_equal(rudimentary_response(np.zeros((1, 3)), np.full(3, 3**-0.5), True), [[0, 0, 1, 0]])


def test_gen_rudimentary_is_deterministic():
    a = gen_rudimentary(3, 100, seed=4)
    b = gen_rudimentary(3, 100, seed=4)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.x, gen_rudimentary(3, 100, seed=5).x)


def test_gen_rudimentary_standardizes_y():
    for vector_valued in (False, True):
        ds = gen_rudimentary(2, 500, seed=1, vector_valued=vector_valued)
        np.testing.assert_allclose(ds.y.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(ds.y.std(axis=0), 1.0, atol=1e-12)
        assert ds.y.shape == (500, 4 if vector_valued else 1)
        np.testing.assert_allclose(ds.ground_truth, np.full(2, 2**-0.5))


def test_response_ignores_orthogonal_perturbations(rng):
    v = np.full(3, 3**-0.5)
    x = rng.normal(size=(10, 3))
    w = np.array([1.0, -1.0, 0.0])
    np.testing.assert_allclose(
        rudimentary_response(x + 0.7 * w, v, True), rudimentary_response(x, v, True), rtol=1e-12, atol=1e-12
    )


def test_gen_rejects_bad_sizes():
    with pytest.raises(ConfigError):
        gen_rudimentary(0, 10, seed=1)
    with pytest.raises(ConfigError):
        gen_rudimentary(2, 0, seed=1)


def test_split_partitions_rows():
    ds = gen_rudimentary(1, 20000, seed=1)
    train, test = split(ds, 0.8, seed=2)
    assert (train.n_rows, test.n_rows) == (16000, 4000)
    combined = np.sort(np.concatenate([train.x[:, 0], test.x[:, 0]]))
    assert np.array_equal(combined, np.sort(ds.x[:, 0]))
    again, _ = split(ds, 0.8, seed=2)
    assert np.array_equal(again.x, train.x)
    with pytest.raises(ConfigError):
        split(ds, 1.0, seed=2)


def test_matrix_files(tmp_path, rng):
    (tmp_path / "m.csv").write_text("1,2\n3,4\n")
    assert load_matrix(tmp_path / "m.csv").tolist() == [[1.0, 2.0], [3.0, 4.0]]
    (tmp_path / "col.csv").write_text("1\n2\n")
    assert load_matrix(tmp_path / "col.csv").shape == (2, 1)

    x = rng.normal(size=(5, 3)) * 1e-7
    save_matrix(tmp_path / "x.csv", x)
    assert np.array_equal(load_matrix(tmp_path / "x.csv"), x)


def test_matrix_file_errors(tmp_path):
    with pytest.raises(IoError):
        load_matrix(tmp_path / "missing.csv")
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(FormatError):
        load_matrix(tmp_path / "ragged.csv")
    (tmp_path / "text.csv").write_text("1,a\n")
    with pytest.raises(FormatError):
        load_matrix(tmp_path / "text.csv")
    (tmp_path / "nan.csv").write_text("1,nan\n")
    with pytest.raises(FormatError):
        load_matrix(tmp_path / "nan.csv")


def test_dataset_round_trip(tmp_path):
    ds = gen_rudimentary(2, 30, seed=3, vector_valued=True)
    manifest_path = save_dataset(ds, tmp_path / "ds", generator={"d": 2})
    loaded = load_dataset(manifest_path)
    assert np.array_equal(loaded.x, ds.x)
    assert np.array_equal(loaded.y, ds.y)
    assert np.array_equal(loaded.standardized_x(), ds.standardized_x())
    assert loaded.target_names == ["cube", "sin", "cos", "tanh"]
    assert np.array_equal(load_dataset(tmp_path / "ds").ground_truth, ds.ground_truth)
