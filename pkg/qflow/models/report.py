from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, List, Optional
from datetime import datetime

from qflow.models.common import Matrix


class RegretReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    player: int
    realized_regret: float
    bound: float
    best_fixed_state: Matrix
    horizon: float
    kernel: str
    tolerance: float = 1e-4

    @property
    def within_bound(self) -> bool:
        return self.realized_regret <= self.bound + self.tolerance


class ConservationReport(BaseModel):
    times: List[float] = Field(default_factory=list)
    series: List[float] = Field(default_factory=list)
    max_drift: float
    initial_value: float


class RecurrenceReport(BaseModel):
    departed: bool
    departure_time: Optional[float] = None  # None when the run never left the r_out ball
    return_distance: float
    return_time: Optional[float] = None
    horizon: float
    r_out: float
    returned: bool = False


class VsProbeReport(BaseModel):
    margin: float
    radius: float
    samples: int
    seed: int

    @property
    def certified(self) -> bool:
        """True when every sampled profile satisfied the strict stability inequality."""
        return self.margin < 0.0


class StationarityReport(BaseModel):
    residual: float
    exploitability: float


class VerifyResult(BaseModel):
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: Optional[str] = None
    elapsed: float = 0.0


class RunMetadata(BaseModel):
    run_id: Optional[str] = None
    manifest: str
    game_path: str
    game_sha256: Optional[str] = None
    config: Dict
    seed: int
    versions: Dict[str, str]
    wall_time: float
    created_at: datetime = Field(default_factory=datetime.now)
    files: List[str] = Field(default_factory=list)
