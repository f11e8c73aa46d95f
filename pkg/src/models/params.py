# src/models/params.py
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field


class LevelParams(BaseModel):
    """Level layout derived deterministically from ``(n, delta, lambda)``."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=2, description="Vertex universe size")
    delta: float = Field(..., gt=0, description="Group growth knob")
    lam: float = Field(..., gt=0, description="Upper-invariant slack knob")
    num_groups: int = Field(..., ge=1, description="ceil(log_{1+delta} n)")
    levels_per_group: int = Field(..., ge=4, description="4 * num_groups")
    num_levels: int = Field(..., ge=4, description="K = levels_per_group * num_groups")
    theoretical_factor: float = Field(
        ..., gt=2, description="(2 + 3/lambda)(1 + delta), the 2+eps bound"
    )

    @property
    def upper_slack(self) -> float:
        """The ``2 + 3/lambda`` multiplier of the upper invariant."""
        return 2.0 + 3.0 / self.lam
