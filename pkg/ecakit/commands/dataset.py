import os

import click

from ecakit.commands.common import current_params, manifest_path_for, resolve_seed
from ecakit.dataset_io import Dataset, fit_standardizer, load_matrix, load_standardizers, save_dataset, split
from ecakit.errors import ConfigError, DimensionError
from ecakit.manifest import RunManifest
from ecakit.utils import reports_errors


def resolve_standardizers(x, y, standardize_y, standardizer_from):
    """
    Fits the X (and optionally Y) standardizer on the data, or reuses the ones
    recorded for another dataset.

    When reusing, Y is standardized exactly when the source dataset's Y was.
    """
    if standardizer_from is None:
        return fit_standardizer(x), fit_standardizer(y) if standardize_y else None
    x_standardizer, y_standardizer = load_standardizers(standardizer_from)
    if x_standardizer is None:
        raise ConfigError(f"{standardizer_from} records no X standardizer")
    if standardize_y and y_standardizer is None:
        raise ConfigError(f"--standardize-y: {standardizer_from} records no Y standardizer")
    return x_standardizer, y_standardizer


@click.command("dataset")
@click.option("--x", "x_path", required=True, help="CSV matrix of inputs, one data point per line.")
@click.option("--y", "y_path", required=True, help="CSV matrix of responses, one data point per line.")
@click.option("--standardize-y", is_flag=True, help="Store Y z-standardized and record its standardizer.")
@click.option(
    "--standardizer-from",
    default=None,
    help="(Optional) Dataset (directory or manifest) whose standardizers to reuse instead of fitting new ones.",
)
@click.option(
    "--split",
    "split_fraction",
    type=float,
    default=None,
    help="(Optional) Also write train/ and test/ subsets sharing one standardizer, the first holding this fraction.",
)
@click.option("--seed", type=int, default=None, help="Seed for --split.")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def dataset_cmd(x_path, y_path, standardize_y, standardizer_from, split_fraction, seed, out_dir, manifest):
    """
    Build a dataset manifest (with its X standardizer) from external matrices.
    """
    if split_fraction is not None:
        seed = resolve_seed(seed, "dataset --split")
    run = RunManifest(command="dataset", params=current_params(seed=seed), inputs={"x": x_path, "y": y_path}, seed=seed)
    if standardizer_from is not None:
        run.inputs["standardizer_from"] = standardizer_from
    x = load_matrix(x_path)
    y = load_matrix(y_path)
    x_standardizer, y_standardizer = resolve_standardizers(x, y, standardize_y, standardizer_from)
    if x_standardizer.means.shape[0] != x.shape[1]:
        raise DimensionError(f"standardizer has {x_standardizer.means.shape[0]} columns, X has {x.shape[1]}")
    ds = Dataset(
        x=x,
        y=y_standardizer.standardize(y) if y_standardizer else y,
        x_standardizer=x_standardizer,
        y_standardizer=y_standardizer,
    )

    run.outputs["dataset"] = save_dataset(ds, out_dir)
    if split_fraction is not None:
        train, test = split(ds, split_fraction, seed)
        run.outputs["train"] = save_dataset(train, os.path.join(out_dir, "train"))
        run.outputs["test"] = save_dataset(test, os.path.join(out_dir, "test"))
        click.echo(f"Split into {train.n_rows} train and {test.n_rows} test rows.")
    run.save(manifest_path_for(f"{out_dir}/dataset", manifest))
    click.echo(f"Wrote dataset of {ds.n_rows} rows to {run.outputs['dataset']}")
