import click

from ecakit.commands.common import (
    current_params,
    ensure_parent_dir,
    is_verbose,
    manifest_path_for,
    parse_int_list,
    resolve_seed,
)
from ecakit.dataset_io import load_dataset
from ecakit.emulator import write_emulator
from ecakit.manifest import RunManifest
from ecakit.options import MlpArchitecture, TrainOptions
from ecakit.trainer import r2_score, train_mlp
from ecakit.utils import reports_errors


@click.command("train")
@click.option("--data", required=True, help="Dataset manifest with the training rows.")
@click.option("--test-data", default=None, help="(Optional) Dataset manifest to report the test R2 on.")
@click.option("--hidden", default="16,16,16,16", show_default=True, help="Comma-separated hidden layer widths.")
@click.option(
    "--activation",
    type=click.Choice(["relu", "tanh", "logistic", "identity"]),
    default="relu",
    show_default=True,
    help="Activation of the hidden layers. The output layer is linear.",
)
@click.option("--lr", type=float, default=1e-3, show_default=True, help="Initial learning rate for Adam.")
@click.option("--weight-decay", type=float, default=1e-3, show_default=True, help="Decoupled weight decay.")
@click.option("--batch-size", "--batch_size", "batch_size", type=int, default=200, show_default=True)
@click.option("--max-epochs", type=int, default=2000, show_default=True)
@click.option("--patience", type=int, default=50, show_default=True, help="Epochs without validation improvement.")
@click.option(
    "--validation-fraction",
    type=float,
    default=0.2,
    show_default=True,
    help="Share of the training rows held out for early stopping.",
)
@click.option("--seed", type=int, default=None, help="Seed for initialization, splitting and mini-batches.")
@click.option("--out", required=True, help="Path of the emulator file to write.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def train_cmd(
    data,
    test_data,
    hidden,
    activation,
    lr,
    weight_decay,
    batch_size,
    max_epochs,
    patience,
    validation_fraction,
    seed,
    out,
    manifest,
):
    """
    Train a feed-forward emulator on a dataset (inputs are z-standardized first).
    """
    seed = resolve_seed(seed, "train")
    architecture = MlpArchitecture.build(hidden_layers=parse_int_list(hidden, "--hidden"), activation=activation)
    options = TrainOptions.build(
        lr=lr,
        weight_decay=weight_decay,
        batch_size=batch_size,
        max_epochs=max_epochs,
        patience=patience,
        validation_fraction=validation_fraction,
        seed=seed,
    )
    run = RunManifest(
        command="train",
        params=current_params(seed=seed),
        options={**options.model_dump(), "architecture": architecture.model_dump()},
        inputs={"data": data, **({"test_data": test_data} if test_data else {})},
        outputs={"emulator": out},
        seed=seed,
    )

    with run.phase("load"):
        train = load_dataset(data)
        test = load_dataset(test_data) if test_data else None
    click.echo(f"Training {architecture.hidden_layers} {activation} emulator on {train.n_rows} rows...")
    with run.phase("train"):
        emulator = train_mlp(train.standardized_x(), train.y, architecture, options, verbose=is_verbose())

    with run.phase("evaluate"):
        run.results["train_r2"] = r2_score(emulator.forward(train.standardized_x()), train.y)
        if test is not None:
            run.results["test_r2"] = r2_score(emulator.forward(test.standardized_x()), test.y)

    ensure_parent_dir(out)
    write_emulator(out, emulator)
    run.save(manifest_path_for(out, manifest))
    click.echo(f"Train R2: {run.results['train_r2']:.4f}")
    if test is not None:
        click.echo(f"Test R2: {run.results['test_r2']:.4f}")
    click.echo(f"Emulator saved to {out}")
