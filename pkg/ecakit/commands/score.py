import click

from ecakit.commands.common import current_params, manifest_path_for
from ecakit.dataset_io import load_dataset
from ecakit.eca import EcaModel
from ecakit.manifest import RunManifest
from ecakit.utils import reports_errors


@click.command("test")
@click.option("--model", required=True, help="Fitted model file.")
@click.option("--data", required=True, help="Dataset manifest to evaluate on.")
@click.option("--n-comp", type=int, default=None, help="Components to use. [default: all]")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def test_cmd(model, data, n_comp, manifest):
    """
    Print the covered variance of Y and X on a dataset.
    """
    run = RunManifest(command="test", params=current_params(), inputs={"model": model, "data": data})
    with run.phase("evaluate"):
        eca = EcaModel.load(model)
        ds = load_dataset(data)
        x = ds.standardized_x()
        run.results["y_covered_variance"] = eca.covered_variance(x, ds.y, n_comp)
        run.results["x_covered_variance"] = eca.x_covered_variance(x, n_comp)
    run.save(manifest_path_for(f"{model}.test", manifest))
    click.echo(f"Covered variance of Y: {run.results['y_covered_variance']:.6f}")
    click.echo(f"Covered variance of X: {run.results['x_covered_variance']:.6f}")
