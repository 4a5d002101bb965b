from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Optional, Union

from qflow.config import SUPPORTED_DIAGNOSTICS, SUPPORTED_INTEGRATORS, SUPPORTED_SPACES, settings
from qflow.core.errors import DimensionMismatchError
from qflow.core.integrator import INITIAL_KINDS, InitialState, SimulationConfig
from qflow.core.kernels_registry import builtin_kernel
from qflow.models.common import Matrix


class IntegratorSpec(BaseModel):
    method: str = "dopri45"
    rtol: float = Field(default_factory=lambda: settings.DEFAULT_RTOL, gt=0)
    atol: float = Field(default_factory=lambda: settings.DEFAULT_ATOL, gt=0)
    step: float = Field(default_factory=lambda: settings.DEFAULT_RK4_STEP, gt=0)

    @field_validator("method")
    @classmethod
    def check_method(cls, v: str) -> str:
        v = v.strip().lower()
        if v not in SUPPORTED_INTEGRATORS:
            raise ValueError(f"unsupported integrator '{v}', expected one of {SUPPORTED_INTEGRATORS}")
        return v


class InitialCondition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: str = "uniform"
    matrix: Optional[Matrix] = None
    seed: Optional[int] = None
    scale: float = Field(default=1.0, gt=0)

    @field_validator("kind")
    @classmethod
    def check_kind(cls, v: str) -> str:
        if v not in INITIAL_KINDS:
            raise ValueError(f"unknown initial condition kind '{v}', expected one of {INITIAL_KINDS}")
        return v


class SimulationConfigSpec(BaseModel):
    kernels: Union[str, List[str]] = "vonneumann"
    horizon: float = Field(gt=0)
    integrator: IntegratorSpec = Field(default_factory=IntegratorSpec)
    record_stride: float = Field(default_factory=lambda: settings.DEFAULT_RECORD_STRIDE, gt=0)
    initial: Optional[List[InitialCondition]] = None
    space: str = "dual"

    @field_validator("integrator", mode="before")
    @classmethod
    def integrator_from_name(cls, v):
        if isinstance(v, str):
            return {"method": v}
        return v

    @field_validator("space")
    @classmethod
    def check_space(cls, v: str) -> str:
        if v not in SUPPORTED_SPACES:
            raise ValueError(f"unsupported space '{v}', expected one of {SUPPORTED_SPACES}")
        return v

    def to_config(self, n_players: int, seed: int = 0) -> SimulationConfig:
        """Build the integrator config; a single kernel name applies to every player."""
        names = [self.kernels] * n_players if isinstance(self.kernels, str) else list(self.kernels)
        if len(names) != n_players:
            raise DimensionMismatchError(f"config.kernels lists {len(names)} kernels for {n_players} players")

        initial = self.initial or [InitialCondition() for _ in range(n_players)]
        if len(initial) != n_players:
            raise DimensionMismatchError(f"config.initial lists {len(initial)} conditions for {n_players} players")

        states = []
        for i, cond in enumerate(initial):
            # Unseeded random starts derive from the manifest seed so reruns are identical
            cond_seed = cond.seed if cond.seed is not None else seed + i
            states.append(InitialState(kind=cond.kind, matrix=cond.matrix, seed=cond_seed, scale=cond.scale))

        return SimulationConfig(
            kernels=[builtin_kernel(name) for name in names],
            horizon=self.horizon,
            initial=states,
            integrator=self.integrator.method,
            step=self.integrator.step,
            rtol=self.integrator.rtol,
            atol=self.integrator.atol,
            record_stride=self.record_stride,
            space=self.space,
        )


class DiagnosticOptions(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    equilibrium: Optional[List[Matrix]] = None
    r_out: float = Field(default_factory=lambda: settings.DEFAULT_R_OUT, gt=0)
    vs_radius: float = Field(default_factory=lambda: settings.DEFAULT_VS_RADIUS, gt=0)
    vs_samples: int = Field(default_factory=lambda: settings.DEFAULT_VS_SAMPLES, gt=0)
    regret_tolerance: float = Field(default=1e-4, ge=0)


class RunManifest(BaseModel):
    game_path: str
    config: SimulationConfigSpec
    diagnostics: List[str] = Field(default_factory=list)
    diagnostic_options: DiagnosticOptions = Field(default_factory=DiagnosticOptions)
    output_dir: Optional[str] = None
    seed: int = 0

    @field_validator("diagnostics")
    @classmethod
    def check_diagnostics(cls, v: List[str]) -> List[str]:
        unknown = [d for d in v if d not in SUPPORTED_DIAGNOSTICS]
        if unknown:
            raise ValueError(f"unknown diagnostics {unknown}, expected a subset of {SUPPORTED_DIAGNOSTICS}")
        return v
