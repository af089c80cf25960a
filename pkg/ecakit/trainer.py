"""
Desk-scale trainer for MlpEmulator: mini-batch Adam on the mean-squared
error, decoupled weight decay on weights only, and patient early stopping on
a held-out part of the training rows.
"""

import logging
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from ecakit.emulator import Activation, DenseLayer, MlpEmulator
from ecakit.errors import ConfigError, DegenerateDataError, DimensionError, NumericsError
from ecakit.linalg import Matrix, as_matrix
from ecakit.optimizer import adam_init, adam_step
from ecakit.options import MlpArchitecture, TrainOptions

logger = logging.getLogger(__name__)


def r2_score(y_pred: Matrix, y_true: Matrix) -> float:
    """Variance-weighted coefficient of determination over all output columns."""
    y_pred = as_matrix(y_pred, "y_pred")
    y_true = as_matrix(y_true, "y_true")
    if y_pred.shape != y_true.shape:
        raise DimensionError(f"shapes differ: {y_pred.shape} vs {y_true.shape}")
    total = float(np.sum((y_true - y_true.mean(axis=0)) ** 2))
    if total == 0.0:
        raise DegenerateDataError("targets have no variance")
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / total


class _ParameterLayout:
    """Packs the per-layer weights and biases into one flat vector for Adam."""

    def __init__(self, sizes: List[int]):
        self.shapes = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            self.shapes.append((fan_out, fan_in))
            self.shapes.append((fan_out,))
        self.offsets = np.cumsum([0] + [int(np.prod(s)) for s in self.shapes])
        self.size = int(self.offsets[-1])
        self.decay_mask = np.zeros(self.size)
        for i in range(0, len(self.shapes), 2):
            self.decay_mask[self.offsets[i] : self.offsets[i + 1]] = 1.0

    def unpack(self, flat):
        return [flat[self.offsets[i] : self.offsets[i + 1]].reshape(s) for i, s in enumerate(self.shapes)]

    def pack(self, arrays):
        return np.concatenate([a.ravel() for a in arrays])


def _glorot_init(layout, activations, rng):
    arrays = []
    for i in range(0, len(layout.shapes), 2):
        fan_out, fan_in = layout.shapes[i]
        factor = 2.0 if activations[i // 2] is Activation.LOGISTIC else 6.0
        bound = np.sqrt(factor / (fan_in + fan_out))
        arrays.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
        arrays.append(rng.uniform(-bound, bound, fan_out))
    return layout.pack(arrays)


def _forward(params, activations, x):
    tape = [(None, x)]
    a = x
    for i, act in enumerate(activations):
        z = a @ params[2 * i].T + params[2 * i + 1]
        a = act.apply(z)
        tape.append((z, a))
    return a, tape


def _mse_gradient(params, activations, x, y):
    pred, tape = _forward(params, activations, x)
    residual = pred - y
    loss = float(np.mean(residual**2))
    g = 2.0 * residual / residual.size
    grads = [None] * len(params)
    for i in reversed(range(len(activations))):
        z, a = tape[i + 1]
        dz = g * activations[i].derivative(z, a)
        grads[2 * i] = dz.T @ tape[i][1]
        grads[2 * i + 1] = dz.sum(axis=0)
        g = dz @ params[2 * i]
    return loss, grads


def _mse(params, activations, x, y):
    pred, _ = _forward(params, activations, x)
    return float(np.mean((pred - y) ** 2))


def train_mlp(
    x: Matrix,
    y: Matrix,
    architecture: Optional[MlpArchitecture] = None,
    train_options: Optional[TrainOptions] = None,
    verbose: bool = False,
) -> MlpEmulator:
    """
    Trains a feed-forward emulator mapping rows of x to rows of y.

    The best parameters seen on the validation split are returned.
    """
    architecture = architecture or MlpArchitecture()
    options = train_options or TrainOptions()
    x = as_matrix(x, "X")
    y = as_matrix(y, "Y")
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"X has {x.shape[0]} rows but Y has {y.shape[0]}")
    if x.shape[0] < 2:
        raise ConfigError("training needs at least two rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NumericsError("training data contains non-finite values")

    seed = options.seed if options.seed is not None else int(np.random.SeedSequence().entropy)
    rng = np.random.default_rng(seed)

    n_rows = x.shape[0]
    n_val = min(n_rows - 1, max(1, int(round(options.validation_fraction * n_rows))))
    order = rng.permutation(n_rows)
    val_idx, fit_idx = order[:n_val], order[n_val:]
    x_fit, y_fit = x[fit_idx], y[fit_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    sizes = [x.shape[1]] + list(architecture.hidden_layers) + [y.shape[1]]
    activations = [Activation(architecture.activation)] * len(architecture.hidden_layers) + [
        Activation(architecture.output_activation)
    ]
    layout = _ParameterLayout(sizes)
    flat = _glorot_init(layout, activations, rng)
    state = adam_init(layout.size, lr=options.lr, betas=options.betas)
    decay = options.lr * options.weight_decay * layout.decay_mask

    best_loss = _mse(layout.unpack(flat), activations, x_val, y_val)
    best_flat = flat.copy()
    waited = 0
    n_fit = x_fit.shape[0]
    batch_size = min(options.batch_size, n_fit)

    epochs = tqdm(range(options.max_epochs), desc="Training emulator", disable=not verbose)
    for epoch in epochs:
        perm = rng.permutation(n_fit)
        for start in range(0, n_fit, batch_size):
            batch = perm[start : start + batch_size]
            _, grads = _mse_gradient(layout.unpack(flat), activations, x_fit[batch], y_fit[batch])
            flat = flat - decay * flat
            state, flat = adam_step(state, flat, layout.pack(grads))

        val_loss = _mse(layout.unpack(flat), activations, x_val, y_val)
        if not np.isfinite(val_loss):
            raise NumericsError(f"validation loss diverged at epoch {epoch}")
        if val_loss < best_loss:
            best_loss, best_flat, waited = val_loss, flat.copy(), 0
        else:
            waited += 1
            if waited >= options.patience:
                logger.info("Early stopping at epoch %d, best validation MSE %.6g", epoch, best_loss)
                break
        epochs.set_postfix(val_mse=f"{val_loss:.4g}")

    params = layout.unpack(best_flat)
    return MlpEmulator(
        [DenseLayer(params[2 * i], params[2 * i + 1], act) for i, act in enumerate(activations)]
    )
