import os

import click

from ecakit.commands.common import current_params, manifest_path_for, resolve_seed
from ecakit.dataset_io import gen_rudimentary, save_dataset, split
from ecakit.errors import ConfigError
from ecakit.manifest import RunManifest
from ecakit.utils import reports_errors


@click.command("gen")
@click.option("--d", "d", type=int, required=True, help="Input dimension.")
@click.option("--n", "n", type=int, default=20000, show_default=True, help="Number of data points.")
@click.option("--seed", type=int, default=None, help="Seed for sampling and splitting.")
@click.option(
    "--vector-valued",
    is_flag=True,
    help="Generate the four-column response (s^3, sin 0.2s, cos 0.2s, tanh 0.2s) instead of s^3.",
)
@click.option(
    "--split",
    "split_fraction",
    type=float,
    default=None,
    help="(Optional) Also write train/ and test/ subsets, the first holding this fraction of rows.",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False),
    required=True,
    help="Directory for X.csv, Y.csv and dataset.json.",
)
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def gen_cmd(d, n, seed, vector_valued, split_fraction, out_dir, manifest):
    """
    Generate the synthetic single-direction dataset.
    """
    if d < 1 or n < 1:
        raise ConfigError(f"--d and --n must be positive, got d={d}, n={n}")
    seed = resolve_seed(seed, "gen")
    run = RunManifest(command="gen", params=current_params(seed=seed), seed=seed)

    generator = {"d": d, "n": n, "seed": seed, "vector_valued": vector_valued}
    with run.phase("generate"):
        ds = gen_rudimentary(d, n, seed, vector_valued)
    with run.phase("write"):
        run.outputs["dataset"] = save_dataset(ds, out_dir, generator)
        if split_fraction is not None:
            train, test = split(ds, split_fraction, seed)
            run.outputs["train"] = save_dataset(train, os.path.join(out_dir, "train"), generator)
            run.outputs["test"] = save_dataset(test, os.path.join(out_dir, "test"), generator)
            click.echo(f"Split into {train.n_rows} train and {test.n_rows} test rows.")

    run.results["rows"] = ds.n_rows
    run.save(manifest_path_for(os.path.join(out_dir, "gen"), manifest))
    click.echo(f"Generated {ds.n_rows} rows in {d} dimensions into {out_dir} (seed {seed}).")
