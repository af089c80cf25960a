import click

from ecakit import __version__
from ecakit.commands.bench import bench_cmd
from ecakit.commands.dataset import dataset_cmd
from ecakit.commands.fit import fit_cmd
from ecakit.commands.gen import gen_cmd
from ecakit.commands.inverse import inverse_cmd, reconstruct_cmd
from ecakit.commands.replay import replay_cmd
from ecakit.commands.score import test_cmd
from ecakit.commands.train import train_cmd
from ecakit.commands.transform import project_cmd, transform_cmd
from ecakit.utils import configure_logging


@click.group()
@click.version_option(__version__, prog_name="ecakit")
@click.option("--verbose", is_flag=True, help="Debug logging and progress bars.")
@click.option("--strict", is_flag=True, help="Refuse to run randomized commands without an explicit --seed.")
@click.pass_context
def entry_point(ctx, verbose, strict):
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["strict"] = strict
    configure_logging(verbose)


entry_point.add_command(gen_cmd)
entry_point.add_command(dataset_cmd)
entry_point.add_command(train_cmd)
entry_point.add_command(fit_cmd)
entry_point.add_command(transform_cmd)
entry_point.add_command(project_cmd)
entry_point.add_command(inverse_cmd)
entry_point.add_command(reconstruct_cmd)
entry_point.add_command(bench_cmd)
entry_point.add_command(test_cmd)
entry_point.add_command(replay_cmd)
