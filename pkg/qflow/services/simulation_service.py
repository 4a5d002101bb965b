from dataclasses import dataclass
from typing import Any, List, Optional, Tuple
import csv
import hashlib
import json
import logging
import os
import platform
import time

import numpy as np
import scipy
import pydantic

from qflow import __version__
from qflow.config import settings
from qflow.core.analysis import bloch_series
from qflow.core.errors import SpecValidationError
from qflow.core.game import QuantumGame
from qflow.core.integrator import SimulationConfig, integrate
from qflow.core.trajectory import Trajectory
from qflow.models.common import parse_document
from qflow.models.game import GameSpec
from qflow.models.manifest import RunManifest
from qflow.models.report import RunMetadata
from qflow.utils.run_id import get_run_id
from qflow.utils.serialization import format_real

logger = logging.getLogger(__name__)

TRAJECTORY_CSV = "trajectory.csv"
TRAJECTORY_JSON = "trajectory.json"
METADATA_JSON = "metadata.json"


def read_json(path: str, what: str) -> Any:
    """Load a JSON document; parse errors carry the line and column."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SpecValidationError(f"{what} not found: {path}")
    except json.JSONDecodeError as e:
        raise SpecValidationError(f"{what} {path} is not valid JSON: line {e.lineno}, column {e.colno}: {e.msg}")


def write_json(path: str, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def load_manifest(path: str) -> Tuple[RunManifest, str]:
    """Returns the manifest and the directory its relative paths resolve against."""
    data = read_json(path, "Manifest")
    manifest = parse_document(RunManifest, data, source=f"manifest {os.path.basename(path)}")
    return manifest, os.path.dirname(os.path.abspath(path))


def load_game(path: str) -> Tuple[GameSpec, QuantumGame]:
    data = read_json(path, "Game spec")
    spec = parse_document(GameSpec, data, source=f"game spec {os.path.basename(path)}")
    return spec, spec.to_game()


def resolve_path(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def file_digest(path: str) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def csv_header(trajectory: Trajectory) -> List[str]:
    header = ["t"]
    for i, stack in enumerate(trajectory.states):
        d = stack.shape[1]
        header += [f"p{i}_eig{k}" for k in range(d)]
        if d == 2:
            header += [f"p{i}_bloch_x", f"p{i}_bloch_y", f"p{i}_bloch_z"]
    return header


def csv_rows(trajectory: Trajectory, digits: int) -> List[List[str]]:
    eigenvalues = [np.flip(np.linalg.eigvalsh(stack), axis=-1) for stack in trajectory.states]
    bloch = [bloch_series(trajectory, i) if stack.shape[1] == 2 else None
             for i, stack in enumerate(trajectory.states)]

    rows = []
    for k, t in enumerate(trajectory.times):
        row = [format_real(t, digits)]
        for i in range(trajectory.n_players):
            row += [format_real(x, digits) for x in eigenvalues[i][k]]
            if bloch[i] is not None:
                row += [format_real(c, digits) for c in bloch[i][k]]
        rows.append(row)
    return rows


def write_csv(path: str, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def library_versions() -> dict:
    return {
        "qflow": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


@dataclass
class SimulationRun:
    manifest: RunManifest
    manifest_path: str
    game_spec: GameSpec
    game: QuantumGame
    config: SimulationConfig
    trajectory: Trajectory
    output_dir: str
    files: List[str]
    wall_time: float = 0.0


class SimulationService:
    """Load a manifest, integrate the dynamics and persist the trajectory."""

    def __init__(self, manifest_path: str):
        self.manifest_path = os.path.abspath(manifest_path)
        self.manifest, self.base_dir = load_manifest(self.manifest_path)
        self.game_path = resolve_path(self.base_dir, self.manifest.game_path)
        self.game_spec, self.game = load_game(self.game_path)
        self.config = self.manifest.config.to_config(self.game.n_players, seed=self.manifest.seed)
        self.output_dir = resolve_path(self.base_dir, self.manifest.output_dir or settings.OUTPUT_DIR)
        logger.info(f"Loaded manifest {self.manifest_path} (game '{self.game.name}', dims {self.game.player_dims})")

    def _ensure_output_directory(self):
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            raise SpecValidationError(f"Output directory {self.output_dir} is not writable: {e}")

    def _output(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _stale_reason(self) -> Optional[str]:
        """Why the persisted run does not belong to the current manifest, or None when it does."""
        path = self._output(METADATA_JSON)
        if not os.path.exists(path):
            return f"{METADATA_JSON} is missing"
        metadata = RunMetadata.model_validate(read_json(path, "Run metadata"))
        if metadata.game_path != self.game_path:
            return f"game changed from {metadata.game_path} to {self.game_path}"
        if metadata.game_sha256 != file_digest(self.game_path):
            return f"game file {self.game_path} was modified"
        if metadata.seed != self.manifest.seed:
            return f"seed changed from {metadata.seed} to {self.manifest.seed}"
        if metadata.config != self.manifest.config.model_dump(mode="json"):
            return "run config changed"
        return None

    def load_existing(self) -> Optional[Trajectory]:
        """The trajectory persisted by a previous simulate run of this manifest, if any."""
        path = self._output(TRAJECTORY_JSON)
        if not os.path.exists(path):
            return None
        reason = self._stale_reason()
        if reason is not None:
            logger.warning(f"Ignoring persisted trajectory in {self.output_dir}: {reason}")
            return None
        logger.info(f"Reloading trajectory from {path}")
        return Trajectory.from_dict(read_json(path, "Trajectory"))

    def run(self, persist: bool = True) -> SimulationRun:
        start = time.perf_counter()
        trajectory = integrate(self.game, self.config)
        wall_time = time.perf_counter() - start

        files: List[str] = []
        if persist:
            files = self._save(trajectory, wall_time)
        return SimulationRun(
            manifest=self.manifest,
            manifest_path=self.manifest_path,
            game_spec=self.game_spec,
            game=self.game,
            config=self.config,
            trajectory=trajectory,
            output_dir=self.output_dir,
            files=files,
            wall_time=wall_time,
        )

    def _save(self, trajectory: Trajectory, wall_time: float) -> List[str]:
        self._ensure_output_directory()

        csv_path = self._output(TRAJECTORY_CSV)
        write_csv(csv_path, csv_header(trajectory), csv_rows(trajectory, settings.CSV_DIGITS))
        json_path = self._output(TRAJECTORY_JSON)
        write_json(json_path, trajectory.to_dict())

        files = [TRAJECTORY_CSV, TRAJECTORY_JSON, METADATA_JSON]
        metadata = RunMetadata(
            run_id=get_run_id(),
            manifest=self.manifest_path,
            game_path=self.game_path,
            game_sha256=file_digest(self.game_path),
            config=self.manifest.config.model_dump(mode="json"),
            seed=self.manifest.seed,
            versions=library_versions(),
            wall_time=wall_time,
            files=files,
        )
        write_json(self._output(METADATA_JSON), metadata.model_dump(mode="json"))
        logger.info(f"Wrote {', '.join(files)} to {self.output_dir}")
        return files
