import click

from ecakit.commands.common import current_params, ensure_parent_dir, load_inputs, manifest_path_for
from ecakit.dataset_io import save_matrix
from ecakit.eca import EcaModel
from ecakit.errors import ConfigError
from ecakit.manifest import RunManifest
from ecakit.utils import reports_errors


def _linear_command(name, data, x_path, model, n_comp, out, manifest, inverse_standardize=False):
    run = RunManifest(
        command=name,
        params=current_params(),
        inputs={"model": model, **({"data": data} if data else {"x": x_path})},
        outputs={"out": out},
    )
    with run.phase("load"):
        eca = EcaModel.load(model)
        ds, x = load_inputs(data, x_path, "x")
    with run.phase(name):
        if name == "transform":
            result = eca.transform(x, n_comp)
        else:
            result = eca.project(x, n_comp)
            if inverse_standardize:
                if ds is None or ds.x_standardizer is None:
                    raise ConfigError("--inverse-standardize needs --data with an X standardizer")
                result = ds.x_standardizer.inverse_standardize(result)
    ensure_parent_dir(out)
    save_matrix(out, result)
    run.save(manifest_path_for(out, manifest))
    click.echo(f"Wrote {result.shape[0]}x{result.shape[1]} {name} output to {out}")


@click.command("transform")
@click.option("--model", required=True, help="Fitted model file.")
@click.option("--data", default=None, help="Dataset manifest; X is standardized with its standardizer.")
@click.option("--x", "x_path", default=None, help="CSV matrix of already standardized inputs.")
@click.option("--n-comp", type=int, default=None, help="Components to use. [default: all]")
@click.option("--out", required=True, help="CSV file for the t scores.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def transform_cmd(model, data, x_path, n_comp, out, manifest):
    """
    Compute t scores of inputs on the ECA basis.
    """
    _linear_command("transform", data, x_path, model, n_comp, out, manifest)


@click.command("project")
@click.option("--model", required=True, help="Fitted model file.")
@click.option("--data", default=None, help="Dataset manifest; X is standardized with its standardizer.")
@click.option("--x", "x_path", default=None, help="CSV matrix of already standardized inputs.")
@click.option("--n-comp", type=int, default=None, help="Components to use. [default: all]")
@click.option(
    "--inverse-standardize",
    is_flag=True,
    help="Map projections back to the original units of the dataset.",
)
@click.option("--out", required=True, help="CSV file for the projected inputs.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def project_cmd(model, data, x_path, n_comp, inverse_standardize, out, manifest):
    """
    Project inputs onto the span of the ECA basis.
    """
    _linear_command("project", data, x_path, model, n_comp, out, manifest, inverse_standardize)
