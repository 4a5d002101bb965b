from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Optional

from qflow.core.errors import DimensionMismatchError
from qflow.core.game import PovmOutcome, QuantumGame, from_classical
from qflow.models.common import Matrix


class OutcomeSpec(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    operator: Matrix
    payoffs: List[float]
    label: str = ""


class GameSpec(BaseModel):
    """
    Game-spec document: POVM outcomes on the joint space, or a
    ``classical_tables`` shortcut lifted with rank-1 projectors.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "game"
    player_dims: Optional[List[int]] = None
    outcomes: Optional[List[OutcomeSpec]] = None
    zero_sum: Optional[bool] = None
    classical_tables: Optional[List[list]] = None
    equilibrium: Optional[List[Matrix]] = Field(default=None, description="Reference profile for diagnostics")

    @model_validator(mode="after")
    def check_payoff_source(self):
        if (self.outcomes is None) == (self.classical_tables is None):
            raise ValueError("exactly one of 'outcomes' or 'classical_tables' must be given")
        if self.outcomes is not None and self.player_dims is None:
            raise ValueError("'player_dims' is required with 'outcomes'")
        return self

    def to_game(self) -> QuantumGame:
        if self.classical_tables is not None:
            game = from_classical(self.classical_tables, zero_sum=self.zero_sum, name=self.name)
            if self.player_dims is not None and list(self.player_dims) != game.player_dims:
                raise DimensionMismatchError(
                    f"player_dims {self.player_dims} disagree with table shape {game.player_dims}"
                )
            return game
        outcomes = [PovmOutcome(operator=o.operator, payoffs=tuple(o.payoffs), label=o.label) for o in self.outcomes]
        return QuantumGame(self.player_dims, outcomes, zero_sum=bool(self.zero_sum), name=self.name)
