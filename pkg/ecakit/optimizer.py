"""Adam with bias correction, written as a pure state transition."""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
import numpy.typing as npt

from ecakit.errors import ConfigError, DimensionError, NumericsError

ADAM_EPS = 1e-8


@dataclass(frozen=True)
class AdamState:
    """
    Moment estimates and hyperparameters of one Adam run.

    `m` and `v` have the shape of the parameters they track (a vector for
    component fitting, an N x k matrix for batched inverse scores).
    """

    m: npt.NDArray[np.float64]
    v: npt.NDArray[np.float64]
    step_count: int
    lr: float
    beta1: float
    beta2: float
    eps: float = ADAM_EPS


def _check_hyperparameters(lr, beta1, beta2, eps):
    if not (np.isfinite(lr) and lr > 0):
        raise ConfigError(f"learning rate must be positive, got {lr}")
    for name, beta in (("beta1", beta1), ("beta2", beta2)):
        if not (0.0 <= beta < 1.0):
            raise ConfigError(f"{name} must lie in [0, 1), got {beta}")
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")


def adam_init(dim, lr=1e-3, betas=(0.9, 0.999), eps=ADAM_EPS) -> AdamState:
    """Zero moments for parameters of shape `dim` (an int or a shape tuple)."""
    shape = (dim,) if isinstance(dim, (int, np.integer)) else tuple(dim)
    if len(shape) == 0 or any(s < 1 for s in shape):
        raise ConfigError(f"parameter shape must be non-empty, got {shape}")
    beta1, beta2 = betas
    _check_hyperparameters(lr, beta1, beta2, eps)
    return AdamState(
        m=np.zeros(shape),
        v=np.zeros(shape),
        step_count=0,
        lr=float(lr),
        beta1=float(beta1),
        beta2=float(beta2),
        eps=float(eps),
    )


def adam_step(
    state: AdamState,
    params: npt.NDArray[np.float64],
    grad: npt.NDArray[np.float64],
) -> Tuple[AdamState, npt.NDArray[np.float64]]:
    """Returns the advanced state and the updated parameters; inputs are not modified."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != state.m.shape or grad.shape != state.m.shape:
        raise DimensionError(
            f"Adam state has shape {state.m.shape}, got params {params.shape} and grad {grad.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericsError("non-finite gradient passed to Adam")

    t = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * (grad * grad)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, step_count=t), new_params


def select_rows(active: npt.NDArray[np.bool_], updated: AdamState, previous: AdamState) -> AdamState:
    """Keeps `updated` moments on active rows and `previous` moments elsewhere."""
    mask = active.reshape((-1,) + (1,) * (updated.m.ndim - 1))
    return replace(
        updated,
        m=np.where(mask, updated.m, previous.m),
        v=np.where(mask, updated.v, previous.v),
    )
