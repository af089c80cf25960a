import os

import click

from ecakit.commands.common import (
    current_params,
    ensure_parent_dir,
    fit_option_flags,
    is_verbose,
    manifest_path_for,
    resolve_seed,
)
from ecakit.dataset_io import load_dataset
from ecakit.eca import EcaModel
from ecakit.emulator import read_emulator
from ecakit.errors import StateError
from ecakit.manifest import RunManifest
from ecakit.options import FitOptions
from ecakit.utils import reports_errors, write_file_content


def format_variance_table(model):
    lines = [f"{'rank':>4}  {'y_var':>10}  {'x_var':>10}"]
    for rank, (y_var, x_var) in enumerate(zip(model.y_var, model.x_var), start=1):
        lines.append(f"{rank:>4}  {y_var:>10.6f}  {x_var:>10.6f}")
    return "\n".join(lines)


@click.command("fit")
@click.option("--data", required=True, help="Dataset manifest with the ECA fit rows.")
@click.option("--emulator", required=True, help="Emulator file.")
@click.option("--n-comp", type=int, default=3, show_default=True, help="Total number of components to fit.")
@fit_option_flags
@click.option("--seed", type=int, default=None, help="Seed for initial guesses and mini-batches.")
@click.option(
    "--keep",
    type=int,
    default=0,
    show_default=True,
    help="n > 0 keeps the first n components of the existing --model, -m drops its last m, 0 starts fresh.",
)
@click.option("--model", required=True, help="Model file to write (and to read when --keep is non-zero).")
@click.option("--table", default=None, help="(Optional) CSV file for the per-rank y_var/x_var table.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def fit_cmd(data, emulator, n_comp, lr, betas, tol, epochs, batch_size, restarts, seed, keep, model, table, manifest):
    """
    Fit ECA components for a dataset and an emulator.
    """
    seed = resolve_seed(seed, "fit")
    options = FitOptions.build(
        lr=lr, betas=betas, tol=tol, epochs=epochs, batch_size=batch_size, restarts=restarts, seed=seed
    )
    run = RunManifest(
        command="fit",
        params=current_params(seed=seed),
        options=options.model_dump(),
        inputs={"data": data, "emulator": emulator},
        outputs={"model": model},
        seed=seed,
    )

    with run.phase("load"):
        ds = load_dataset(data)
        x = ds.standardized_x()
        if keep != 0:
            if not os.path.isfile(model):
                raise StateError(f"--keep {keep} needs an existing model at {model}")
            eca = EcaModel.load(model, read_emulator(emulator))
        else:
            eca = EcaModel(read_emulator(emulator))

    with run.phase("fit"):
        eca.fit(x, ds.y, n_comp=n_comp, options=options, keep=keep, verbose=is_verbose())

    ensure_parent_dir(model)
    emulator_ref = os.path.relpath(os.path.abspath(emulator), os.path.dirname(os.path.abspath(model)))
    eca.save(model, emulator_path=emulator_ref)
    run.results.update(y_var=eca.y_var, x_var=eca.x_var)
    if ds.ground_truth is not None and ds.ground_truth.shape[0] == eca.input_dim:
        run.results["ground_truth_overlap"] = abs(float(eca.V[0] @ ds.ground_truth))

    if table:
        rows = ["rank,y_var,x_var"] + [
            f"{rank},{y_var!r},{x_var!r}" for rank, (y_var, x_var) in enumerate(zip(eca.y_var, eca.x_var), start=1)
        ]
        write_file_content(table, "\n".join(rows) + "\n")
        run.outputs["table"] = table
    run.save(manifest_path_for(model, manifest))

    click.echo(format_variance_table(eca))
    if "ground_truth_overlap" in run.results:
        click.echo(f"|v . v1| = {run.results['ground_truth_overlap']:.4f}")
    click.echo(f"Model saved to {model}")
