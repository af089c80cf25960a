"""Optimizer options and their defaults."""

from typing import Annotated, List, Optional, Tuple

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, field_validator

from ecakit.errors import ConfigError

DEFAULT_LR = 1e-3
DEFAULT_TOL = 1e-4
DEFAULT_EPOCHS = 10000
DEFAULT_BETAS = (0.9, 0.999)
DEFAULT_BATCH_SIZE = 200

DEFAULT_LR_INV = 5e-2
DEFAULT_TOL_INV = 1e-4
DEFAULT_EPOCHS_INV = 1000


def _check_betas(betas):
    beta1, beta2 = betas
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ValueError(f"betas must lie in [0, 1), got {betas}")
    return (float(beta1), float(beta2))


Betas = Annotated[Tuple[float, float], AfterValidator(_check_betas)]


class _Options(BaseModel):
    model_config = ConfigDict(validate_assignment=True, extra="forbid")

    @classmethod
    def build(cls, **values):
        """Validates `values`, dropping None so unset CLI flags fall back to defaults."""
        try:
            return cls(**{k: v for k, v in values.items() if v is not None})
        except ValidationError as e:
            raise ConfigError(f"invalid {cls.__name__}: {e}") from e

    def set_seed(self, seed: int):
        try:
            self.seed = seed
        except ValidationError as e:
            raise ConfigError(f"invalid seed: {e}") from e


class FitOptions(_Options):
    """Options of the component fit."""

    lr: float = Field(DEFAULT_LR, gt=0, description="Learning rate for the Adam optimizer.")
    betas: Betas = Field(DEFAULT_BETAS, description="Beta parameters for the Adam optimizer.")
    tol: float = Field(DEFAULT_TOL, gt=0, description="Stopping condition on the change of the loss.")
    epochs: int = Field(DEFAULT_EPOCHS, ge=1, description="Maximum number of epochs.")
    batch_size: int = Field(DEFAULT_BATCH_SIZE, ge=1, description="Mini-batch size.")
    seed: Optional[int] = Field(None, ge=0, description="Seed for the random number generator.")
    restarts: int = Field(1, ge=1, description="Independent initial guesses per component; the best is kept.")


class InverseOptions(_Options):
    """Options of the inverse transformation."""

    lr: float = Field(DEFAULT_LR_INV, gt=0, description="Learning rate for the Adam optimizer.")
    betas: Betas = Field(DEFAULT_BETAS, description="Beta parameters for the Adam optimizer.")
    tol: float = Field(DEFAULT_TOL_INV, gt=0, description="Stopping condition on the change of each row's error.")
    epochs: int = Field(DEFAULT_EPOCHS_INV, ge=1, description="Maximum number of epochs.")
    seed: Optional[int] = Field(None, ge=0, description="Seed for the random number generator.")


class MlpArchitecture(_Options):
    """Layer sizes and activations of a trainable emulator."""

    hidden_layers: List[int] = Field(default_factory=lambda: [16, 16, 16, 16])
    activation: str = Field("relu", pattern="^(relu|tanh|logistic|identity)$")
    output_activation: str = Field("identity", pattern="^(relu|tanh|logistic|identity)$")

    @field_validator("hidden_layers")
    @classmethod
    def _positive_widths(cls, widths):
        if any(w < 1 for w in widths):
            raise ValueError(f"hidden layer widths must be positive, got {widths}")
        return widths


class TrainOptions(_Options):
    """Options of the emulator trainer (Adam with decoupled weight decay, early stopping)."""

    lr: float = Field(1e-3, gt=0)
    betas: Betas = Field(DEFAULT_BETAS)
    weight_decay: float = Field(1e-3, ge=0)
    batch_size: int = Field(200, ge=1)
    max_epochs: int = Field(2000, ge=1)
    patience: int = Field(50, ge=1)
    validation_fraction: float = Field(0.2, gt=0, lt=1)
    seed: Optional[int] = Field(None, ge=0)

