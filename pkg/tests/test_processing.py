import threading

import pytest

from ecakit.errors import ConfigError
from ecakit.manifest import RunManifest, read_manifest
from ecakit.processing import THREADS_ENV, process_tasks_with_executor, resolve_workers


def square_handler(task, task_config):
    return task * task + task_config["offset"]


@pytest.mark.parametrize("workers", [1, 4])
def test_results_keep_task_order(workers):
    results = process_tasks_with_executor(range(20), workers, square_handler, {"offset": 1}, verbose=False)
    assert results == [i * i + 1 for i in range(20)]


def test_errors_propagate():
    def failing_handler(task, task_config):
        if task == 3:
            raise ConfigError("bad task")
        return task

    with pytest.raises(ConfigError):
        process_tasks_with_executor(range(8), 2, failing_handler, {}, verbose=False)


def test_uses_worker_threads():
    seen = set()

    def handler(task, task_config):
        seen.add(threading.get_ident())
        return task

    process_tasks_with_executor(range(4), 1, handler, {}, verbose=False)
    assert seen == {threading.get_ident()}


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_workers(8) == 8
    monkeypatch.setenv(THREADS_ENV, "2")
    assert resolve_workers(8) == 2
    with pytest.raises(ConfigError):
        resolve_workers(0)
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_workers(2)


def test_manifest_round_trip(tmp_path):
    run = RunManifest(command="fit", params={"n_comp": 2, "betas": [0.9, 0.999]}, seed=5)
    with run.phase("fit"):
        pass
    run.results["y_var"] = [0.5, 0.75]
    run.save(tmp_path / "run.json")
    loaded = read_manifest(tmp_path / "run.json")
    assert loaded.command == "fit"
    assert loaded.params == {"n_comp": 2, "betas": [0.9, 0.999]}
    assert loaded.seed == 5
    assert "fit" in loaded.timings
    assert loaded.results["y_var"] == [0.5, 0.75]
