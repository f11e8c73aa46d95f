# src/models/audit.py
from typing import Literal

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field


class AuditViolation(BaseModel):
    """One broken structural property found by a from-scratch audit."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "kind": "invariant2",
                "vertex": 3,
                "detail": "level 1, up*-degree 0 < 1.0",
            }
        },
    )

    kind: Literal["graph", "level_range", "invariant1", "invariant2", "bookkeeping"]
    vertex: int | None = Field(default=None, description="Offending vertex, if any")
    detail: str = ""


class BoundReport(BaseModel):
    """Two-sided ratio of estimates against exact coreness."""

    max_ratio: float = Field(default=1.0, ge=1.0)
    factor: float = Field(..., gt=0)
    offenders: list[int] = Field(
        default_factory=list, description="Vertices whose ratio exceeds the factor"
    )
    zero_core: list[int] = Field(
        default_factory=list, description="Coreness-0 vertices left out of the ratio"
    )

    @property
    def passed(self) -> bool:
        return not self.offenders
