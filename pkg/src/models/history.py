# src/models/history.py
from enum import Enum
from typing import Literal
from typing import Self

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator


class ReadMode(str, Enum):
    """How coreness reads synchronize with update batches."""

    CPLDS = "cplds"
    SYNC = "sync"
    NONSYNC = "nonsync"


class ReadRecord(BaseModel):
    """One completed read, stamped with the process-wide monotonic clock."""

    model_config = ConfigDict(frozen=True)

    vertex: int = Field(..., ge=0)
    invoke_ts: int = Field(..., description="Nanoseconds, sampled on invocation")
    return_ts: int = Field(..., description="Nanoseconds, sampled before return")
    returned_level: int = Field(..., ge=0)
    mode: ReadMode
    batch_id: int = Field(default=0, ge=0, description="Batch number seen at invoke")

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if self.invoke_ts >= self.return_ts:
            message = f"invoke_ts {self.invoke_ts} >= return_ts {self.return_ts}"
            raise ValueError(message)
        return self


class MoverRecord(BaseModel):
    """A vertex that changed level within one batch."""

    model_config = ConfigDict(frozen=True)

    vertex: int = Field(..., ge=0)
    old_level: int = Field(..., ge=0)
    new_level: int = Field(..., ge=0)
    dag_root: int = Field(..., ge=0, description="find(vertex) right before unmarking")

    @model_validator(mode="after")
    def _moved(self) -> Self:
        if self.old_level == self.new_level:
            message = f"vertex {self.vertex} recorded as mover without moving"
            raise ValueError(message)
        return self


class BatchRecord(BaseModel):
    """Execution interval of one batch plus the level changes it caused."""

    batch_id: int = Field(..., ge=1)
    kind: Literal["insert", "delete"]
    begin_ts: int
    end_ts: int
    movers: list[MoverRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if self.begin_ts >= self.end_ts:
            message = f"batch {self.batch_id} begin_ts >= end_ts"
            raise ValueError(message)
        return self


class HistoryViolation(BaseModel):
    """A necessary linearizability condition that a history breaks."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["boundary", "dag_inversion"]
    vertex: int
    batch_id: int | None = None
    detail: str = ""
