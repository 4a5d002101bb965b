from typing import Dict, List, Optional
import logging
import os

import numpy as np

from qflow.config import settings
from qflow.core.analysis import (
    bloch_series,
    exploitability_series,
    fenchel_series,
    purity,
    recurrence_stats,
    regret,
    regret_integrand,
    stationarity_residual,
    support_rank,
    time_average,
    vs_probe,
)
from qflow.core.errors import MissingDataError, SpecValidationError
from qflow.core.trajectory import Trajectory
from qflow.models.report import ConservationReport, StationarityReport, VsProbeReport
from qflow.services.simulation_service import SimulationService, write_csv, write_json
from qflow.utils.serialization import encode_matrix, format_real

logger = logging.getLogger(__name__)

DIAGNOSTICS_CSV = "diagnostics.csv"


class DiagnosticsService:
    """
    Run the diagnostics a manifest requests against its trajectory.

    The trajectory is reloaded from the output directory when a previous
    simulate run of the same manifest, game and seed left one there;
    otherwise it is integrated inline and persisted.
    """

    def __init__(self, manifest_path: str):
        self.simulation = SimulationService(manifest_path)
        self.manifest = self.simulation.manifest
        self.game = self.simulation.game
        self.options = self.manifest.diagnostic_options
        self.output_dir = self.simulation.output_dir

    def _trajectory(self) -> Trajectory:
        trajectory = self.simulation.load_existing()
        if trajectory is None:
            logger.info("No persisted trajectory found, simulating inline")
            trajectory = self.simulation.run(persist=True).trajectory
        if trajectory.n_players != self.game.n_players:
            raise SpecValidationError(
                f"Persisted trajectory has {trajectory.n_players} players, game has {self.game.n_players}"
            )
        return trajectory

    def _equilibrium(self) -> Optional[List[np.ndarray]]:
        profile = self.options.equilibrium or self.simulation.game_spec.equilibrium
        if profile is None:
            return None
        return self.game.as_profile(profile)

    def _check_available(self, trajectory: Trajectory) -> None:
        """Fail before any work when a requested diagnostic has no data to run on."""
        requested = set(self.manifest.diagnostics)
        if "regret" in requested:
            trajectory.require_gradients()
        if "fenchel" in requested:
            trajectory.require_dual_scores()
        if "vsprobe" in requested and self._equilibrium() is None:
            raise MissingDataError("vsprobe needs an equilibrium profile in diagnostic_options or the game spec")
        if "bloch" in requested:
            non_qubits = [i for i, d in enumerate(self.game.player_dims) if d != 2]
            if non_qubits:
                raise MissingDataError(f"Bloch coordinates need qubit players; players {non_qubits} are not")

    def run(self) -> Dict[str, dict]:
        trajectory = self._trajectory()
        self._check_available(trajectory)
        os.makedirs(self.output_dir, exist_ok=True)

        reports: Dict[str, dict] = {}
        kernels = trajectory.kernel_objects()
        equilibrium = self._equilibrium()
        conservation: Optional[ConservationReport] = None
        best_states: Dict[int, np.ndarray] = {}

        for name in self.manifest.diagnostics:
            if name == "regret":
                items = [regret(self.game, i, trajectory, tolerance=self.options.regret_tolerance)
                         for i in range(self.game.n_players)]
                for item in items:
                    best_states[item.player] = item.best_fixed_state
                    if not item.within_bound:
                        logger.warning(
                            f"Player {item.player} regret {item.realized_regret:.6g} exceeds bound {item.bound:.6g}"
                        )
                reports["regret"] = {"players": [r.model_dump(mode="json") for r in items]}
            elif name == "fenchel":
                if equilibrium is None:
                    logger.warning("No equilibrium given; Fenchel coupling measured against the initial profile")
                reference = equilibrium or trajectory.profile_at(0)
                conservation = fenchel_series(kernels, reference, trajectory)
                reports["fenchel"] = conservation.model_dump(mode="json")
            elif name == "recurrence":
                reports["recurrence"] = recurrence_stats(trajectory, self.options.r_out).model_dump(mode="json")
            elif name == "vsprobe":
                margin = vs_probe(self.game, equilibrium, self.options.vs_radius, self.options.vs_samples,
                                  rng_seed=self.manifest.seed)
                probe = VsProbeReport(margin=margin, radius=self.options.vs_radius,
                                      samples=self.options.vs_samples, seed=self.manifest.seed)
                stationarity = StationarityReport(
                    residual=stationarity_residual(self.game, kernels, equilibrium),
                    exploitability=self.game.exploitability(equilibrium),
                )
                reports["vsprobe"] = {**probe.model_dump(mode="json"), "certified": probe.certified,
                                      "stationarity": stationarity.model_dump(mode="json")}
            elif name == "bloch":
                reports["bloch"] = {
                    "times": [float(t) for t in trajectory.times],
                    "players": [bloch_series(trajectory, i).tolist() for i in range(self.game.n_players)],
                }

        final = trajectory.profile_at(trajectory.n_times - 1)
        reports["summary"] = {
            "horizon": trajectory.horizon,
            "final_purity": [purity(X) for X in final],
            "final_support_rank": [support_rank(X) for X in final],
            "final_exploitability": self.game.exploitability(final),
            "time_average": [encode_matrix(X) for X in time_average(trajectory)],
        }

        files = []
        for name, payload in reports.items():
            filename = f"{name}.json"
            write_json(os.path.join(self.output_dir, filename), payload)
            files.append(filename)
        write_csv(os.path.join(self.output_dir, DIAGNOSTICS_CSV), *self._series_table(trajectory, conservation, best_states))
        files.append(DIAGNOSTICS_CSV)
        logger.info(f"Wrote diagnostics {', '.join(files)} to {self.output_dir}")
        return reports

    def _series_table(self, trajectory: Trajectory, conservation: Optional[ConservationReport],
                      best_states: Dict[int, np.ndarray]):
        digits = settings.CSV_DIGITS
        columns: Dict[str, np.ndarray] = {"t": trajectory.times}
        if conservation is not None:
            columns["F"] = np.asarray(conservation.series)
        for i, best in sorted(best_states.items()):
            columns[f"p{i}_regret_integrand"] = regret_integrand(trajectory, i, best)
        for i, stack in enumerate(trajectory.states):
            columns[f"p{i}_purity"] = np.array([purity(X) for X in stack])
        columns["exploitability"] = exploitability_series(self.game, trajectory)
        for i, d in enumerate(self.game.player_dims):
            if d == 2:
                coords = bloch_series(trajectory, i)
                for axis, label in enumerate("xyz"):
                    columns[f"p{i}_bloch_{label}"] = coords[:, axis]

        header = list(columns)
        rows = [[format_real(columns[h][k], digits) for h in header] for k in range(trajectory.n_times)]
        return header, rows
