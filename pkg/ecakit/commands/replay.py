import click

from ecakit.errors import FormatError
from ecakit.manifest import read_manifest
from ecakit.utils import reports_errors


@click.command("replay")
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@reports_errors
def replay_cmd(ctx, manifest_file):
    """
    Re-run the command recorded in a run manifest with its resolved parameters.
    """
    run = read_manifest(manifest_file)
    command = ctx.parent.command.get_command(ctx.parent, run.command)
    if command is None or run.command == "replay":
        raise FormatError(f"manifest records unknown command '{run.command}'")
    click.echo(f"Replaying '{run.command}' from {manifest_file}")
    ctx.invoke(command, **run.params)
