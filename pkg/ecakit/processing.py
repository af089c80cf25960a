import concurrent.futures
import logging
import os

from tqdm import tqdm

from ecakit.errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "ECA_NUM_THREADS"


def resolve_workers(requested):
    """Caps the requested worker count by the ECA_NUM_THREADS environment variable."""
    if requested < 1:
        raise ConfigError(f"worker count must be positive, got {requested}")
    cap = os.environ.get(THREADS_ENV)
    if cap is None:
        return requested
    try:
        cap = int(cap)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{cap}'") from e
    if cap < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive, got {cap}")
    return min(requested, cap)


def process_tasks_with_executor(tasks, workers, task_handler, task_config, desc="Processing", verbose=True):
    """
    Runs task_handler(task, task_config) for every task and returns the results
    in task order, whatever order they complete in.

    With a single worker the tasks run inline. On KeyboardInterrupt pending
    futures are cancelled immediately.
    """
    tasks = list(tasks)
    workers = resolve_workers(workers)
    results = [None] * len(tasks)

    if workers == 1:
        for i, task in enumerate(tqdm(tasks, desc=desc, disable=not verbose)):
            results[i] = task_handler(task, task_config)
        return results

    executor = concurrent.futures.ThreadPoolExecutor(max_workers=workers)
    try:
        futures = {executor.submit(task_handler, task, task_config): i for i, task in enumerate(tasks)}
        for future in tqdm(
            concurrent.futures.as_completed(futures),
            total=len(futures),
            desc=desc,
            disable=not verbose,
        ):
            results[futures[future]] = future.result()
    except KeyboardInterrupt:
        logger.warning("Interrupted, cancelling pending tasks")
        executor.shutdown(wait=False, cancel_futures=True)
        raise
    except BaseException:
        executor.shutdown(wait=False, cancel_futures=True)
        raise

    executor.shutdown(wait=True)
    return results
