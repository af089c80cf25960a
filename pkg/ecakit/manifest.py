"""Run manifests: one JSON record per CLI invocation, replayable by `ecakit replay`."""

import contextlib
import json
import time
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, ValidationError

from ecakit import __version__
from ecakit.errors import FormatError
from ecakit.utils import read_file_content, write_file_content


class RunManifest(BaseModel):
    command: str
    params: Dict[str, Any] = Field(default_factory=dict, description="Resolved command-line parameters.")
    options: Dict[str, Any] = Field(default_factory=dict, description="Resolved optimizer options.")
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None
    timings: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds per phase.")
    results: Dict[str, Any] = Field(default_factory=dict)
    version: str = __version__
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @contextlib.contextmanager
    def phase(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start

    def save(self, path):
        write_file_content(path, json.dumps(self.model_dump(), indent=1))


def read_manifest(path) -> RunManifest:
    try:
        return RunManifest.model_validate_json(read_file_content(path))
    except ValidationError as e:
        raise FormatError(f"Malformed run manifest {path}: {e}") from e
