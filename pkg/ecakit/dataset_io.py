import json
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ecakit.errors import ConfigError, DegenerateDataError, DimensionError, FormatError, IoError
from ecakit.linalg import Matrix, Vector, as_matrix
from ecakit.utils import read_file_content, write_file_content

MANIFEST_NAME = "dataset.json"


def load_matrix(path) -> Matrix:
    """Reads a comma-separated matrix, one data point per line."""
    if not os.path.isfile(path):
        raise IoError(f"Matrix file '{path}' does not exist.")
    try:
        matrix = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except OSError as e:
        raise IoError(f"Error reading matrix {path}: {e}") from e
    except ValueError as e:
        raise FormatError(f"Malformed matrix file {path}: {e}") from e
    if matrix.size == 0:
        raise FormatError(f"Matrix file {path} is empty.")
    if not np.all(np.isfinite(matrix)):
        raise FormatError(f"Matrix file {path} contains non-finite values.")
    return matrix


def save_matrix(path, matrix: Matrix):
    """Writes a matrix with 17 significant digits, which round-trips float64 exactly."""
    matrix = as_matrix(matrix)
    try:
        np.savetxt(path, matrix, fmt="%.17g", delimiter=",")
    except OSError as e:
        raise IoError(f"Error saving matrix {path}: {e}") from e


class StandardizerDocument(BaseModel):
    means: List[float]
    stds: List[float]


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-column mean and population standard deviation."""

    means: Vector
    stds: Vector

    def _check(self, x) -> Matrix:
        x = as_matrix(x)
        if x.shape[1] != self.means.shape[0]:
            raise DimensionError(f"standardizer has {self.means.shape[0]} columns, data has {x.shape[1]}")
        return x

    def standardize(self, x: Matrix) -> Matrix:
        return (self._check(x) - self.means) / self.stds

    def inverse_standardize(self, x: Matrix) -> Matrix:
        return self._check(x) * self.stds + self.means

    def to_document(self) -> StandardizerDocument:
        return StandardizerDocument(means=self.means.tolist(), stds=self.stds.tolist())

    @classmethod
    def from_document(cls, document: StandardizerDocument) -> "Standardizer":
        means = np.array(document.means, dtype=np.float64)
        stds = np.array(document.stds, dtype=np.float64)
        if means.shape != stds.shape or not np.all(stds > 0):
            raise FormatError("standardizer needs matching means and positive stds")
        return cls(means, stds)


def fit_standardizer(x: Matrix) -> Standardizer:
    x = as_matrix(x, "X")
    if x.shape[0] < 2:
        raise DegenerateDataError("standardization needs at least two rows")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    constant = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    if np.any(constant):
        raise DegenerateDataError(f"constant columns cannot be standardized: {np.flatnonzero(constant).tolist()}")
    return Standardizer(means, stds)


def standardize(standardizer: Standardizer, x: Matrix) -> Matrix:
    return standardizer.standardize(x)


def inverse_standardize(standardizer: Standardizer, x: Matrix) -> Matrix:
    return standardizer.inverse_standardize(x)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Paired inputs and responses.

    `x_standardizer` maps X to the standardized space the emulator works in;
    `y_standardizer` records how the stored Y was standardized, if it was.
    """

    x: Matrix
    y: Matrix
    feature_names: Optional[List[str]] = None
    target_names: Optional[List[str]] = None
    x_standardizer: Optional[Standardizer] = None
    y_standardizer: Optional[Standardizer] = None
    ground_truth: Optional[Vector] = None

    def __post_init__(self):
        if self.x.shape[0] != self.y.shape[0]:
            raise DimensionError(f"X has {self.x.shape[0]} rows but Y has {self.y.shape[0]}")

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    def standardized_x(self) -> Matrix:
        return self.x if self.x_standardizer is None else self.x_standardizer.standardize(self.x)

    def take(self, rows) -> "Dataset":
        return replace(self, x=self.x[rows], y=self.y[rows])


def ground_truth_direction(d: int) -> Vector:
    """The unit vector (1, ..., 1) / sqrt(d)."""
    return np.full(d, 1.0 / np.sqrt(d))


def rudimentary_response(x: Matrix, v: Vector, vector_valued: bool = False) -> Matrix:
    """
    Raw responses depending on x only through s = v.x: the column s^3, or the
    four columns (s^3, sin 0.2s, cos 0.2s, tanh 0.2s).
    """
    s = as_matrix(x) @ v
    if not vector_valued:
        return (s**3)[:, None]
    return np.column_stack([s**3, np.sin(0.2 * s), np.cos(0.2 * s), np.tanh(0.2 * s)])


def gen_rudimentary(d: int, n: int, seed: int, vector_valued: bool = False) -> Dataset:
    """
    Standard-normal inputs in d dimensions with responses driven by the
    single direction (1, ..., 1) / sqrt(d). Y columns are z-standardized.
    """
    if d < 1 or n < 1:
        raise ConfigError(f"d and n must be positive, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    v = ground_truth_direction(d)
    raw_y = rudimentary_response(x, v, vector_valued)
    y_standardizer = fit_standardizer(raw_y) if n >= 2 else None
    y = raw_y if y_standardizer is None else y_standardizer.standardize(raw_y)
    return Dataset(
        x=x,
        y=y,
        feature_names=[f"x{i + 1}" for i in range(d)],
        target_names=["cube", "sin", "cos", "tanh"] if vector_valued else ["cube"],
        x_standardizer=fit_standardizer(x) if n >= 2 else None,
        y_standardizer=y_standardizer,
        ground_truth=v,
    )


def split(ds: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first `fraction` of rows and the rest."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"split fraction must lie in (0, 1), got {fraction}")
    n_first = int(round(fraction * ds.n_rows))
    if n_first == 0 or n_first == ds.n_rows:
        raise ConfigError(f"splitting {ds.n_rows} rows at {fraction} leaves one side empty")
    order = np.random.default_rng(seed).permutation(ds.n_rows)
    return ds.take(np.sort(order[:n_first])), ds.take(np.sort(order[n_first:]))


class DatasetManifest(BaseModel):
    """Binds the X and Y matrix files of a dataset to its metadata."""

    x_path: str = Field(..., description="X matrix file, relative to the manifest.")
    y_path: str = Field(..., description="Y matrix file, relative to the manifest.")
    n_rows: int
    feature_names: Optional[List[str]] = None
    target_names: Optional[List[str]] = None
    x_standardizer: Optional[StandardizerDocument] = None
    y_standardizer: Optional[StandardizerDocument] = None
    ground_truth: Optional[List[float]] = None
    generator: Optional[dict] = Field(None, description="Parameters of the synthetic generator, if any.")


def save_dataset(ds: Dataset, directory, generator: Optional[dict] = None) -> str:
    """Writes X.csv, Y.csv and the manifest into `directory`; returns the manifest path."""
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise IoError(f"Cannot create directory {directory}: {e}") from e
    save_matrix(os.path.join(directory, "X.csv"), ds.x)
    save_matrix(os.path.join(directory, "Y.csv"), ds.y)
    manifest = DatasetManifest(
        x_path="X.csv",
        y_path="Y.csv",
        n_rows=ds.n_rows,
        feature_names=ds.feature_names,
        target_names=ds.target_names,
        x_standardizer=ds.x_standardizer.to_document() if ds.x_standardizer else None,
        y_standardizer=ds.y_standardizer.to_document() if ds.y_standardizer else None,
        ground_truth=ds.ground_truth.tolist() if ds.ground_truth is not None else None,
        generator=generator,
    )
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    write_file_content(manifest_path, json.dumps(manifest.model_dump(), indent=1))
    return manifest_path


def _read_manifest(manifest_path) -> Tuple[str, DatasetManifest]:
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, MANIFEST_NAME)
    try:
        return manifest_path, DatasetManifest.model_validate_json(read_file_content(manifest_path))
    except ValidationError as e:
        raise FormatError(f"Malformed dataset manifest {manifest_path}: {e}") from e


def _standardizer(document: Optional[StandardizerDocument]) -> Optional[Standardizer]:
    return Standardizer.from_document(document) if document else None


def load_standardizers(manifest_path) -> Tuple[Optional[Standardizer], Optional[Standardizer]]:
    """The X and Y standardizers recorded in a dataset manifest, without reading its matrices."""
    _, manifest = _read_manifest(manifest_path)
    return _standardizer(manifest.x_standardizer), _standardizer(manifest.y_standardizer)


def load_dataset(manifest_path) -> Dataset:
    """Loads the dataset a manifest describes."""
    manifest_path, manifest = _read_manifest(manifest_path)

    root = os.path.dirname(os.path.abspath(manifest_path))
    x = load_matrix(os.path.join(root, manifest.x_path))
    y = load_matrix(os.path.join(root, manifest.y_path))
    if x.shape[0] != manifest.n_rows:
        raise FormatError(f"manifest lists {manifest.n_rows} rows, {manifest.x_path} has {x.shape[0]}")
    return Dataset(
        x=x,
        y=y,
        feature_names=manifest.feature_names,
        target_names=manifest.target_names,
        x_standardizer=_standardizer(manifest.x_standardizer),
        y_standardizer=_standardizer(manifest.y_standardizer),
        ground_truth=np.array(manifest.ground_truth) if manifest.ground_truth is not None else None,
    )
