import click
import numpy as np

from ecakit.commands.common import (
    current_params,
    ensure_parent_dir,
    inverse_option_flags,
    is_verbose,
    manifest_path_for,
)
from ecakit.dataset_io import load_dataset, load_matrix, save_matrix
from ecakit.eca import EcaModel
from ecakit.errors import ConfigError
from ecakit.manifest import RunManifest
from ecakit.options import InverseOptions
from ecakit.processing import process_tasks_with_executor
from ecakit.trainer import r2_score
from ecakit.utils import reports_errors


def inverse_task_handler(rows, task_config):
    """Solves the inverse problem for one chunk of rows."""
    return task_config["model"].inverse(task_config["y"][rows], task_config["n_comp"], task_config["options"])


def solve_in_chunks(model, y, n_comp, options, workers, chunk_size):
    """Runs EcaModel.inverse over row chunks; rows are independent, so chunking does not change results."""
    if chunk_size < 1:
        raise ConfigError(f"--chunk-size must be positive, got {chunk_size}")
    chunks = [np.arange(start, min(start + chunk_size, y.shape[0])) for start in range(0, y.shape[0], chunk_size)]
    task_config = {"model": model, "y": y, "n_comp": n_comp, "options": options}
    results = process_tasks_with_executor(
        chunks, workers, inverse_task_handler, task_config, desc="Inverse", verbose=is_verbose()
    )
    scores = np.concatenate([t for t, _ in results]) if results else np.zeros((0, n_comp or model.n_components))
    errors = np.concatenate([e for _, e in results]) if results else np.zeros(0)
    return scores, errors


def _inverse_command(
    name,
    model,
    data,
    y_path,
    n_comp,
    options_values,
    workers,
    chunk_size,
    out,
    manifest,
    inverse_standardize=False,
):
    options = InverseOptions.build(**options_values)
    run = RunManifest(
        command=name,
        params=current_params(),
        options=options.model_dump(),
        inputs={"model": model, **({"data": data} if data else {"y": y_path})},
        outputs={"out": out},
        seed=options.seed,
    )
    if (data is None) == (y_path is None):
        raise ConfigError("give exactly one of --data or --y")

    with run.phase("load"):
        eca = EcaModel.load(model)
        ds = load_dataset(data) if data else None
        y = ds.y if ds is not None else load_matrix(y_path)

    with run.phase("inverse"):
        scores, errors = solve_in_chunks(eca, y, n_comp, options, workers, chunk_size)
    result = scores if name == "inverse" else eca.expand(scores, scores.shape[1])

    if ds is not None:
        known = eca.transform(ds.standardized_x(), scores.shape[1])
        reference = known if name == "inverse" else eca.expand(known, scores.shape[1])
        run.results["r2_vs_projection"] = r2_score(result, reference)
    run.results["mean_error"] = float(np.mean(errors)) if errors.size else 0.0

    if inverse_standardize:
        if ds is None or ds.x_standardizer is None:
            raise ConfigError("--inverse-standardize needs --data with an X standardizer")
        result = ds.x_standardizer.inverse_standardize(result)

    ensure_parent_dir(out)
    save_matrix(out, np.column_stack([result, errors]))
    run.save(manifest_path_for(out, manifest))
    click.echo(f"Mean per-row error: {run.results['mean_error']:.6g}")
    if "r2_vs_projection" in run.results:
        click.echo(f"R2 against projected data: {run.results['r2_vs_projection']:.4f}")
    click.echo(f"Wrote {result.shape[0]} rows (last column: per-row MSE) to {out}")


def _shared_flags(command):
    for flag in reversed(
        [
            click.option("--model", required=True, help="Fitted model file."),
            click.option("--data", default=None, help="Dataset manifest; its Y is inverted and its X used for R2."),
            click.option("--y", "y_path", default=None, help="CSV matrix of responses to invert."),
            click.option("--n-comp", type=int, default=None, help="Components to use. [default: all]"),
        ]
    ):
        command = flag(command)
    return command


def _run_flags(command):
    for flag in reversed(
        [
            click.option("--seed", type=int, default=None, help="Seed recorded with the options."),
            click.option("--workers", type=int, default=1, show_default=True, help="Worker threads over row chunks."),
            click.option("--chunk-size", type=int, default=256, show_default=True, help="Rows per worker task."),
            click.option("--out", required=True, help="CSV output; the last column holds the per-row MSE."),
            click.option("--manifest", default=None, help="(Optional) Path of the run manifest."),
        ]
    ):
        command = flag(command)
    return command


@click.command("inverse")
@_shared_flags
@inverse_option_flags
@_run_flags
@reports_errors
def inverse_cmd(model, data, y_path, n_comp, lr, betas, tol, epochs, seed, workers, chunk_size, out, manifest):
    """
    Find t' scores whose emulated responses best match given y.
    """
    _inverse_command(
        "inverse",
        model,
        data,
        y_path,
        n_comp,
        dict(lr=lr, betas=betas, tol=tol, epochs=epochs, seed=seed),
        workers,
        chunk_size,
        out,
        manifest,
    )


@click.command("reconstruct")
@_shared_flags
@inverse_option_flags
@click.option(
    "--inverse-standardize",
    is_flag=True,
    help="Map reconstructed inputs back to the original units of the dataset.",
)
@_run_flags
@reports_errors
def reconstruct_cmd(
    model, data, y_path, n_comp, lr, betas, tol, epochs, inverse_standardize, seed, workers, chunk_size, out, manifest
):
    """
    Reconstruct approximate inputs x' = expand(inverse(y)).
    """
    _inverse_command(
        "reconstruct",
        model,
        data,
        y_path,
        n_comp,
        dict(lr=lr, betas=betas, tol=tol, epochs=epochs, seed=seed),
        workers,
        chunk_size,
        out,
        manifest,
        inverse_standardize,
    )
