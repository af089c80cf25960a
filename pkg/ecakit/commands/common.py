"""Helpers shared by the command modules."""

import os

import click
import numpy as np

from ecakit.dataset_io import load_dataset, load_matrix
from ecakit.errors import ConfigError, IoError


def resolve_seed(seed, what):
    """
    Returns `seed`, or draws one from system entropy so it can be recorded.
    In --strict mode a missing seed is an error.
    """
    if seed is not None:
        return seed
    ctx = click.get_current_context()
    if (ctx.find_root().obj or {}).get("strict"):
        raise ConfigError(f"--strict: {what} is randomized and needs an explicit --seed")
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint32)[0])


def current_params(**overrides):
    """The invoked command's parameters, with resolved values substituted."""
    params = dict(click.get_current_context().params)
    params.update(overrides)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}


def manifest_path_for(output, explicit=None):
    return explicit or f"{output}.manifest.json"


def is_verbose():
    return bool((click.get_current_context().find_root().obj or {}).get("verbose"))


def load_inputs(data, matrix_path, what):
    """
    Loads either a dataset manifest (returning the dataset and its
    standardized X) or a bare CSV matrix taken as already standardized.
    """
    if (data is None) == (matrix_path is None):
        raise ConfigError(f"give exactly one of --data or --{what}")
    if data is not None:
        ds = load_dataset(data)
        return ds, ds.standardized_x()
    return None, load_matrix(matrix_path)


def parse_int_list(text, name):
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"{name} must be a comma-separated list of integers, got '{text}'") from e
    if not values:
        raise ConfigError(f"{name} must not be empty")
    return values


def ensure_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as e:
        raise IoError(f"Cannot create directory {parent}: {e}") from e


def fit_option_flags(command):
    """Adds the optimizer flags of the component fit, named as the options they set."""
    flags = [
        click.option("--lr", type=float, default=None, help="Learning rate for the Adam optimizer. [default: 1e-3]"),
        click.option(
            "--betas", type=float, nargs=2, default=None, help="Beta parameters for Adam. [default: 0.9 0.999]"
        ),
        click.option("--tol", type=float, default=None, help="Stopping condition on the loss change. [default: 1e-4]"),
        click.option("--epochs", type=int, default=None, help="Maximum number of epochs. [default: 10000]"),
        click.option(
            "--batch-size", "--batch_size", "batch_size", type=int, default=None, help="Mini-batch size. [default: 200]"
        ),
        click.option("--restarts", type=int, default=None, help="Initial guesses per component. [default: 1]"),
    ]
    for flag in reversed(flags):
        command = flag(command)
    return command


def inverse_option_flags(command):
    """Adds the optimizer flags of the inverse transformation."""
    flags = [
        click.option("--lr", type=float, default=None, help="Learning rate for the Adam optimizer. [default: 0.05]"),
        click.option(
            "--betas", type=float, nargs=2, default=None, help="Beta parameters for Adam. [default: 0.9 0.999]"
        ),
        click.option("--tol", type=float, default=None, help="Stopping condition per row. [default: 1e-4]"),
        click.option("--epochs", type=int, default=None, help="Maximum number of epochs. [default: 1000]"),
    ]
    for flag in reversed(flags):
        command = flag(command)
    return command
