"""
Emulator-based component analysis.

An EcaModel holds an orthonormal basis V of the (z-standardized) input space,
fitted one vector at a time so that the emulator evaluated on inputs projected
onto span(V) covers as much of the response variance as possible. Scores,
projections and expansions are linear maps; inverse and reconstruct search the
score space with Adam for the best emulated match of given responses.
"""

import json
import logging
import os
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError
from tqdm import tqdm

from ecakit.emulator import MlpEmulator, read_emulator
from ecakit.errors import ConfigError, DegenerateDataError, DimensionError, FormatError, NumericsError, StateError
from ecakit.linalg import Matrix, Vector, as_matrix, complement_project, matmul_rows, normalize, orthonormality_error
from ecakit.optimizer import adam_init, adam_step, select_rows
from ecakit.options import FitOptions, InverseOptions
from ecakit.utils import read_file_content, write_file_content

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-6


def r2loss(y_pred: Matrix, y_known: Matrix) -> float:
    """
    Missing variance 1 - rho = tr(Ybar^T Ybar) / tr(Y^T Y) with
    Ybar = y_known - y_pred.
    """
    y_pred = as_matrix(y_pred, "y_pred")
    y_known = as_matrix(y_known, "y_known")
    if y_pred.shape != y_known.shape:
        raise DimensionError(f"prediction shape {y_pred.shape} differs from target shape {y_known.shape}")
    total = float(np.sum(y_known * y_known))
    if not total > 0.0:
        raise DegenerateDataError("targets have zero total variance")
    residual = y_known - y_pred
    loss = float(np.sum(residual * residual)) / total
    if not np.isfinite(loss):
        raise NumericsError("non-finite covered-variance loss")
    return loss


def _project_with(x, base, v):
    s = matmul_rows(x, v[None, :])[:, 0]
    return s, base + s[:, None] * v[None, :]


def component_loss(emulator: MlpEmulator, x: Matrix, y: Matrix, base: Matrix, v: Vector, denominator: float) -> float:
    _, x_proj = _project_with(x, base, v)
    residual = y - emulator.forward(x_proj)
    return float(np.sum(residual * residual)) / denominator


def component_loss_and_gradient(
    emulator: MlpEmulator,
    x: Matrix,
    y: Matrix,
    base: Matrix,
    v: Vector,
    denominator: float,
) -> Tuple[float, Vector]:
    """
    Loss sum((y - y_emu(x_proj))^2) / denominator and its gradient in v, where
    x_proj = base + (v.x) v and `base` is x projected onto the retained basis.
    """
    s, x_proj = _project_with(x, base, v)
    pred, pullback = emulator.forward_with_pullback(x_proj)
    residual = y - pred
    loss = float(np.sum(residual * residual)) / denominator
    g_x = pullback(-2.0 * residual / denominator)
    g_dot_v = matmul_rows(g_x, v[None, :])[:, 0]
    grad = np.sum(s[:, None] * g_x + g_dot_v[:, None] * x, axis=0)
    return loss, grad


def _canonical_sign(v: Vector) -> Vector:
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def _entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy)


class EcaModelDocument(BaseModel):
    """On-disk form of a fitted model."""

    input_dim: int = Field(..., ge=1)
    output_dim: int = Field(..., ge=1)
    emulator_path: Optional[str] = Field(None, description="Emulator file, relative to the model file.")
    seed: Optional[int] = None
    components: List[List[float]] = Field(default_factory=list)
    y_var: List[float] = Field(default_factory=list)
    x_var: List[float] = Field(default_factory=list)


class EcaModel:
    """
    ECA basis attached to an emulator.

    Attributes:
        V: fitted components as rows of a (k, input_dim) array.
        y_var: cumulative covered variance of Y on the fit data, per rank.
        x_var: cumulative covered variance of X on the fit data, per rank.
        seed: seed used by the last fit (or set via set_seed).
    """

    def __init__(self, emulator: MlpEmulator, seed: Optional[int] = None):
        self.emulator = emulator
        self.seed = seed
        self.emulator_path: Optional[str] = None
        self._components: List[Vector] = []
        self.y_var: List[float] = []
        self.x_var: List[float] = []

    @property
    def input_dim(self) -> int:
        return self.emulator.input_dim

    @property
    def n_components(self) -> int:
        return len(self._components)

    @property
    def V(self) -> Matrix:
        if not self._components:
            return np.zeros((0, self.input_dim))
        v = np.array(self._components)
        v.setflags(write=False)
        return v

    def set_seed(self, seed: int):
        """Seeds the initial guesses and mini-batch order of subsequent fits."""
        if seed is not None and seed < 0:
            raise ConfigError(f"seed must be non-negative, got {seed}")
        self.seed = seed

    def _resolve_n_comp(self, n_comp: Optional[int]) -> int:
        if n_comp is None:
            return self.n_components
        if not 0 <= n_comp <= self.n_components:
            raise ConfigError(f"n_comp={n_comp} requested but the model has {self.n_components} components")
        return int(n_comp)

    def _check_x(self, x) -> Matrix:
        x = as_matrix(x, "X")
        if x.shape[1] != self.input_dim:
            raise DimensionError(f"X has {x.shape[1]} columns, the emulator takes {self.input_dim}")
        return x

    def _check_y(self, y) -> Matrix:
        y = as_matrix(y, "Y")
        if y.shape[1] != self.emulator.output_dim:
            raise DimensionError(f"Y has {y.shape[1]} columns, the emulator gives {self.emulator.output_dim}")
        if not np.all(np.isfinite(y)):
            raise NumericsError("Y contains non-finite values")
        return y

    # Linear maps

    def transform(self, x: Matrix, n_comp: Optional[int] = None) -> Matrix:
        """Scores t[i, j] = v_j . x_i for the first n_comp components."""
        x = self._check_x(x)
        n = self._resolve_n_comp(n_comp)
        return matmul_rows(x, self.V[:n])

    def expand(self, t: Matrix, n_comp: Optional[int] = None) -> Matrix:
        """Maps scores back to input space: row i is sum_j t[i, j] v_j."""
        t = as_matrix(t, "T")
        if n_comp is None and t.shape[1] > self.n_components:
            raise DimensionError(f"scores have {t.shape[1]} columns but the model has {self.n_components} components")
        n = t.shape[1] if n_comp is None else n_comp
        n = self._resolve_n_comp(n)
        if t.shape[1] < n:
            raise DimensionError(f"scores have {t.shape[1]} columns, {n} needed")
        basis_t = np.ascontiguousarray(self.V[:n].T)
        return matmul_rows(np.ascontiguousarray(t[:, :n]), basis_t)

    def project(self, x: Matrix, n_comp: Optional[int] = None) -> Matrix:
        n = self._resolve_n_comp(n_comp)
        return self.expand(self.transform(x, n), n)

    # Covered variance

    def covered_variance(self, x: Matrix, y: Matrix, n_comp: Optional[int] = None) -> float:
        """rho between y and the emulator evaluated on x projected onto n_comp components."""
        x = self._check_x(x)
        y = self._check_y(y)
        if x.shape[0] != y.shape[0]:
            raise DimensionError(f"X has {x.shape[0]} rows but Y has {y.shape[0]}")
        pred = self.emulator.forward(self.project(x, n_comp))
        return 1.0 - r2loss(pred, y)

    def test(self, x: Matrix, y: Matrix) -> float:
        return self.covered_variance(x, y)

    def x_covered_variance(self, x: Matrix, n_comp: Optional[int] = None) -> float:
        x = self._check_x(x)
        return 1.0 - r2loss(self.project(x, n_comp), x)

    # Fitting

    def _retained_components(self, keep: int) -> List[Vector]:
        existing = list(self._components)
        if keep == 0:
            return []
        if keep > 0:
            if keep > len(existing):
                raise ConfigError(f"keep={keep} but only {len(existing)} components exist")
            return existing[:keep]
        if -keep > len(existing):
            raise ConfigError(f"keep={keep} removes more than the {len(existing)} existing components")
        return existing[: len(existing) + keep]

    def fit(
        self,
        x: Matrix,
        y: Matrix,
        n_comp: int = 3,
        options: Optional[FitOptions] = None,
        keep: int = 0,
        verbose: bool = False,
    ) -> "EcaModel":
        """
        Fits components until the model has n_comp of them.

        Args:
            x: z-standardized inputs, one row per data point.
            y: responses matching the emulator output.
            n_comp: total number of components after the fit.
            options: optimizer options; defaults when None.
            keep: n > 0 keeps the first n existing components, -m drops the
                last m, 0 starts from scratch. Kept components are not refitted.
            verbose: show a progress bar per component.

        Returns:
            The model itself.
        """
        options = options or FitOptions()
        x = self._check_x(x)
        y = self._check_y(y)
        if x.shape[0] != y.shape[0]:
            raise DimensionError(f"X has {x.shape[0]} rows but Y has {y.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise NumericsError("X contains non-finite values")
        if not 1 <= n_comp <= self.input_dim:
            raise ConfigError(f"n_comp must lie in [1, {self.input_dim}], got {n_comp}")
        total = float(np.sum(y * y))
        if not total > 0.0:
            raise DegenerateDataError("Y has zero total variance")
        if x.shape[0] < 2 * self.input_dim:
            logger.warning(
                "Fitting %d rows in %d dimensions; the fit becomes unstable as rows approach the dimension",
                x.shape[0],
                self.input_dim,
            )

        components = self._retained_components(keep)
        if len(components) > n_comp:
            raise ConfigError(f"keep retains {len(components)} components but n_comp is {n_comp}")

        if options.seed is not None:
            self.seed = options.seed
        elif self.seed is None:
            self.seed = _entropy_seed()
            logger.info("No seed given, using %d", self.seed)
        rng = np.random.default_rng(self.seed)

        for rank in range(len(components), n_comp):
            basis = np.array(components) if components else np.zeros((0, self.input_dim))
            base = matmul_rows(matmul_rows(x, basis), np.ascontiguousarray(basis.T))
            best_v, best_loss = None, np.inf
            for restart in range(options.restarts):
                v, loss = self._fit_component(x, y, total, base, basis, options, rng, verbose, rank)
                logger.debug("Component %d restart %d: loss %.6g", rank + 1, restart + 1, loss)
                if loss < best_loss:
                    best_v, best_loss = v, loss
            components.append(_canonical_sign(best_v))
            logger.info("Component %d: covered variance %.6f", rank + 1, 1.0 - best_loss)

        self._components = components
        error = orthonormality_error(self.V, self.input_dim)
        if error > ORTHONORMALITY_TOLERANCE:
            raise NumericsError(f"fitted basis lost orthonormality (error {error:.3g})")
        self.y_var = [self.covered_variance(x, y, k) for k in range(1, n_comp + 1)]
        self.x_var = [self.x_covered_variance(x, k) for k in range(1, n_comp + 1)]
        for k in range(1, n_comp):
            if self.y_var[k] < self.y_var[k - 1]:
                logger.warning(
                    "Covered variance decreased from rank %d (%.6f) to rank %d (%.6f)",
                    k,
                    self.y_var[k - 1],
                    k + 1,
                    self.y_var[k],
                )
        return self

    def _fit_component(self, x, y, total, base, basis, options, rng, verbose, rank):
        n_rows = x.shape[0]
        v = normalize(complement_project(rng.standard_normal(self.input_dim), basis))
        state = adam_init(self.input_dim, lr=options.lr, betas=options.betas)
        batch_size = min(options.batch_size, n_rows)

        previous = component_loss(self.emulator, x, y, base, v, total)
        epochs = tqdm(range(options.epochs), desc=f"Component {rank + 1}", disable=not verbose)
        for epoch in epochs:
            order = rng.permutation(n_rows)
            for start in range(0, n_rows, batch_size):
                rows = order[start : start + batch_size]
                _, grad = component_loss_and_gradient(
                    self.emulator, x[rows], y[rows], base[rows], v, total * len(rows) / n_rows
                )
                state, v = adam_step(state, v, complement_project(grad, basis))
                v = normalize(complement_project(v, basis))
            loss = component_loss(self.emulator, x, y, base, v, total)
            if not np.isfinite(loss):
                raise NumericsError(f"non-finite loss at epoch {epoch}")
            epochs.set_postfix(rho=f"{1.0 - loss:.5f}")
            if abs(previous - loss) < options.tol:
                logger.debug("Component %d converged after %d epochs", rank + 1, epoch + 1)
                break
            previous = loss
        return v, loss

    # Inverse problem

    def inverse(
        self,
        y: Matrix,
        n_comp: Optional[int] = None,
        options: Optional[InverseOptions] = None,
    ) -> Tuple[Matrix, Vector]:
        """
        Searches scores t' whose expansion the emulator maps closest to each row of y.

        Every row starts from t' = 0 and stops on its own once its
        mean-squared error changes by less than tol between epochs, so rows
        can be split across calls without changing results.

        Returns:
            Scores (N x n_comp) and the final mean-squared error of each row.
        """
        if self.n_components == 0:
            raise StateError("the model has no fitted components")
        options = options or InverseOptions()
        n = self._resolve_n_comp(n_comp)
        if n == 0:
            raise ConfigError("inverse needs at least one component")
        y = self._check_y(y)
        n_rows = y.shape[0]
        basis = np.ascontiguousarray(self.V[:n])
        basis_t = np.ascontiguousarray(basis.T)
        scale = 2.0 / y.shape[1]

        t = np.zeros((n_rows, n))
        if n_rows == 0:
            return t, np.zeros(0)
        state = adam_init((n_rows, n), lr=options.lr, betas=options.betas)
        previous = np.full(n_rows, np.inf)
        active = np.ones(n_rows, dtype=bool)

        for _ in range(options.epochs):
            rows = np.flatnonzero(active)
            if rows.size == 0:
                break
            pred, pullback = self.emulator.forward_with_pullback(matmul_rows(t[rows], basis_t))
            residual = pred - y[rows]
            errors = np.mean(residual * residual, axis=1)
            if not np.all(np.isfinite(errors)):
                raise NumericsError("non-finite inverse error")
            converged = np.abs(previous[rows] - errors) < options.tol
            previous[rows] = errors
            active[rows[converged]] = False
            stepping = rows[~converged]
            if stepping.size == 0:
                break
            grad = np.zeros_like(t)
            grad[rows] = matmul_rows(pullback(scale * residual), basis)
            mask = np.zeros(n_rows, dtype=bool)
            mask[stepping] = True
            new_state, new_t = adam_step(state, t, grad)
            t = np.where(mask[:, None], new_t, t)
            state = select_rows(mask, new_state, state)

        residual = self.emulator.forward(matmul_rows(t, basis_t)) - y
        return t, np.mean(residual * residual, axis=1)

    def reconstruct(
        self,
        y: Matrix,
        n_comp: Optional[int] = None,
        options: Optional[InverseOptions] = None,
    ) -> Tuple[Matrix, Vector]:
        """expand(inverse(y)): approximate standardized inputs for each row of y."""
        t, errors = self.inverse(y, n_comp, options)
        return self.expand(t, t.shape[1]), errors

    # Persistence

    def to_document(self, emulator_path: Optional[str] = None) -> EcaModelDocument:
        return EcaModelDocument(
            input_dim=self.input_dim,
            output_dim=self.emulator.output_dim,
            emulator_path=emulator_path or self.emulator_path,
            seed=self.seed,
            components=[v.tolist() for v in self._components],
            y_var=list(self.y_var),
            x_var=list(self.x_var),
        )

    @classmethod
    def from_document(cls, document: EcaModelDocument, emulator: MlpEmulator) -> "EcaModel":
        if (document.input_dim, document.output_dim) != (emulator.input_dim, emulator.output_dim):
            raise DimensionError(
                f"model expects a {document.input_dim}->{document.output_dim} emulator, "
                f"got {emulator.input_dim}->{emulator.output_dim}"
            )
        model = cls(emulator, seed=document.seed)
        components = [np.array(c, dtype=np.float64) for c in document.components]
        if any(c.shape != (document.input_dim,) for c in components):
            raise DimensionError(f"every component must have {document.input_dim} entries")
        if orthonormality_error(components, document.input_dim) > ORTHONORMALITY_TOLERANCE:
            raise FormatError("model components are not orthonormal")
        model._components = components
        model.y_var = list(document.y_var)
        model.x_var = list(document.x_var)
        model.emulator_path = document.emulator_path
        return model

    def save(self, path, emulator_path: Optional[str] = None):
        document = self.to_document(emulator_path)
        write_file_content(path, json.dumps(document.model_dump(), indent=1))

    @classmethod
    def load(cls, path, emulator: Optional[MlpEmulator] = None) -> "EcaModel":
        """Reads a model file; the emulator is read from the recorded path unless given."""
        try:
            document = EcaModelDocument.model_validate_json(read_file_content(path))
        except ValidationError as e:
            raise FormatError(f"malformed model document {path}: {e}") from e
        if emulator is None:
            if not document.emulator_path:
                raise FormatError(f"model document {path} names no emulator")
            emulator = read_emulator(os.path.join(os.path.dirname(os.path.abspath(path)), document.emulator_path))
        return cls.from_document(document, emulator)


def set_seed(target, seed: int):
    """Seeds an EcaModel or a FitOptions/InverseOptions instance."""
    target.set_seed(seed)
