import functools
import logging
import sys

import click

from ecakit.errors import EcaError, IoError


def handle_error(message, exit_code=1):
    """Prints an error message and exits the program."""
    click.echo(click.style(f"Error: {message}", fg="red"), err=True)
    sys.exit(exit_code)


def reports_errors(command):
    """Turns an EcaError escaping a command into a styled message and its exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except EcaError as e:
            handle_error(str(e), e.exit_code)

    return wrapper


def configure_logging(verbose):
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def read_file_content(file_path):
    """Helper function to read content from a file path."""
    if not file_path:
        return None
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise IoError(f"Error reading file {file_path}: {e}") from e


def write_file_content(file_path, content):
    try:
        with open(file_path, "w", encoding="utf-8") as f:
            f.write(content)
    except OSError as e:
        raise IoError(f"Error writing file {file_path}: {e}") from e
