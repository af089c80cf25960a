import logging
import os
import time

import click
import numpy as np

from ecakit.commands.common import (
    current_params,
    ensure_parent_dir,
    fit_option_flags,
    is_verbose,
    manifest_path_for,
    parse_int_list,
    resolve_seed,
)
from ecakit.dataset_io import gen_rudimentary, split
from ecakit.eca import EcaModel
from ecakit.emulator import read_emulator, write_emulator
from ecakit.errors import ConfigError
from ecakit.manifest import RunManifest
from ecakit.options import FitOptions, MlpArchitecture, TrainOptions
from ecakit.processing import process_tasks_with_executor
from ecakit.trainer import r2_score, train_mlp
from ecakit.utils import reports_errors, write_file_content

logger = logging.getLogger(__name__)

SUCCESS_OVERLAP = 0.95

REPORT_COLUMNS = [
    "d",
    "emulator_r2",
    "trials",
    "median_fit_seconds",
    "success_rate",
    "rho_mean",
    "rho_min",
    "rho_max",
    "rho_std",
]


def bench_trial_handler(trial_seed, task_config):
    """Fits one model with its own seed and scores it against the known direction."""
    options = task_config["options"].model_copy(update={"seed": int(trial_seed)})
    model = EcaModel(task_config["emulator"])
    start = time.perf_counter()
    model.fit(task_config["x"], task_config["y"], n_comp=task_config["n_comp"], options=options)
    elapsed = time.perf_counter() - start
    return {
        "seed": int(trial_seed),
        "seconds": elapsed,
        "overlap": abs(float(model.V[0] @ task_config["ground_truth"])),
        "rho": model.y_var[0],
    }


def _derived_seed(seed, *keys):
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def emulator_cache_name(d, n, split_fraction, vector_valued, architecture, seed):
    """File name identifying every setting the cached emulator was trained with."""
    widths = "x".join(str(w) for w in architecture.hidden_layers)
    response = "vector" if vector_valued else "scalar"
    return f"emulator_d{d}_n{n}_split{split_fraction:g}_{response}_h{widths}_{architecture.activation}_s{seed}.json"


def _matches(emulator, train, architecture):
    widths = [layer.out_dim for layer in emulator.layers[:-1]]
    return (
        emulator.input_dim == train.x.shape[1]
        and emulator.output_dim == train.y.shape[1]
        and widths == list(architecture.hidden_layers)
    )


def prepare_emulator(train, test, emulator_dir, cache_name, architecture, seed):
    """Loads the cached emulator named `cache_name`, or trains and caches one."""
    d = train.x.shape[1]
    path = os.path.join(emulator_dir, cache_name) if emulator_dir else None
    emulator = read_emulator(path) if path and os.path.isfile(path) else None
    if emulator is not None and not _matches(emulator, train, architecture):
        logger.warning("Cached emulator %s does not fit the current data, retraining", path)
        emulator = None
    if emulator is None:
        click.echo(f"[d={d}] training emulator on {train.n_rows} rows...")
        emulator = train_mlp(
            train.standardized_x(),
            train.y,
            architecture,
            TrainOptions(seed=seed),
            verbose=is_verbose(),
        )
        if path:
            ensure_parent_dir(path)
            write_emulator(path, emulator)
    return emulator, r2_score(emulator.forward(test.standardized_x()), test.y)


def summarize(d, emulator_r2, trials):
    rhos = np.array([t["rho"] for t in trials])
    overlaps = np.array([t["overlap"] for t in trials])
    return {
        "d": d,
        "emulator_r2": emulator_r2,
        "trials": len(trials),
        "median_fit_seconds": float(np.median([t["seconds"] for t in trials])),
        "success_rate": float(np.mean(overlaps > SUCCESS_OVERLAP)),
        "rho_mean": float(np.mean(rhos)),
        "rho_min": float(np.min(rhos)),
        "rho_max": float(np.max(rhos)),
        "rho_std": float(np.std(rhos)),
    }


def format_report(rows):
    header = "  ".join(f"{c:>18}" for c in REPORT_COLUMNS)
    lines = [header]
    for row in rows:
        cells = [f"{row[c]:>18}" if isinstance(row[c], int) else f"{row[c]:>18.4f}" for c in REPORT_COLUMNS]
        lines.append("  ".join(cells))
    return "\n".join(lines)


@click.command("bench")
@click.option("--d-list", default="2,32,512", show_default=True, help="Comma-separated input dimensions.")
@click.option("--trials", type=int, default=25, show_default=True, help="Fits per dimension, each with its own seed.")
@click.option("--seed", type=int, default=None, help="Master seed for data, emulators and trial seeds.")
@click.option("--n", "n", type=int, default=20000, show_default=True, help="Generated rows per dimension.")
@click.option("--split", "split_fraction", type=float, default=0.8, show_default=True, help="Emulator training share.")
@click.option("--n-comp", type=int, default=1, show_default=True)
@click.option("--vector-valued", is_flag=True, help="Use the four-column response.")
@click.option("--hidden", default="16,16,16,16", show_default=True, help="Hidden widths of trained emulators.")
@click.option("--emulator-dir", default=None, help="(Optional) Cache directory for trained emulators.")
@fit_option_flags
@click.option("--workers", type=int, default=1, show_default=True, help="Worker threads across trials.")
@click.option("--out", default=None, help="(Optional) CSV report path.")
@click.option("--manifest", default=None, help="(Optional) Path of the run manifest.")
@reports_errors
def bench_cmd(
    d_list,
    trials,
    seed,
    n,
    split_fraction,
    n_comp,
    vector_valued,
    hidden,
    emulator_dir,
    lr,
    betas,
    tol,
    epochs,
    batch_size,
    restarts,
    workers,
    out,
    manifest,
):
    """
    Time repeated fits on synthetic data and report how often the known direction is found.
    """
    if trials < 1:
        raise ConfigError(f"--trials must be positive, got {trials}")
    dims = parse_int_list(d_list, "--d-list")
    seed = resolve_seed(seed, "bench")
    options = FitOptions.build(lr=lr, betas=betas, tol=tol, epochs=epochs, batch_size=batch_size, restarts=restarts)
    architecture = MlpArchitecture.build(hidden_layers=parse_int_list(hidden, "--hidden"))
    run = RunManifest(command="bench", params=current_params(seed=seed), options=options.model_dump(), seed=seed)

    rows = []
    for d in dims:
        data_seed = _derived_seed(seed, d)
        with run.phase(f"data_d{d}"):
            train, test = split(gen_rudimentary(d, n, data_seed, vector_valued), split_fraction, data_seed)
        with run.phase(f"emulator_d{d}"):
            cache_name = emulator_cache_name(d, n, split_fraction, vector_valued, architecture, data_seed)
            emulator, emulator_r2 = prepare_emulator(train, test, emulator_dir, cache_name, architecture, data_seed)
        task_config = {
            "emulator": emulator,
            "x": test.standardized_x(),
            "y": test.y,
            "n_comp": n_comp,
            "options": options,
            "ground_truth": test.ground_truth,
        }
        trial_seeds = np.random.SeedSequence([seed, d, 1]).generate_state(trials)
        with run.phase(f"fits_d{d}"):
            results = process_tasks_with_executor(
                trial_seeds, workers, bench_trial_handler, task_config, desc=f"d={d}", verbose=is_verbose()
            )
        rows.append(summarize(d, emulator_r2, results))
        run.results[f"trials_d{d}"] = results
        click.echo(
            f"[d={d}] emulator R2 {emulator_r2:.4f}, success {rows[-1]['success_rate']:.2f}, "
            f"median fit {rows[-1]['median_fit_seconds']:.2f}s"
        )

    run.results["report"] = rows
    click.echo(format_report(rows))
    if len(rows) > 1:
        ratio = rows[-1]["median_fit_seconds"] / rows[0]["median_fit_seconds"]
        run.results["time_ratio_last_to_first"] = ratio
        click.echo(f"Median fit time ratio d={rows[-1]['d']} / d={rows[0]['d']}: {ratio:.2f}")

    if out:
        ensure_parent_dir(out)
        lines = [",".join(REPORT_COLUMNS)] + [",".join(repr(row[c]) for c in REPORT_COLUMNS) for row in rows]
        write_file_content(out, "\n".join(lines) + "\n")
        run.outputs["report"] = out
    run.save(manifest_path_for(out or "bench", manifest))
