# src/models/batch.py
from enum import Enum

from pydantic import BaseModel
from pydantic import Field
from pydantic import field_validator

Edge = tuple[int, int]


class BatchKind(str, Enum):
    """Kind of an update batch. A batch never mixes insertions and deletions."""

    INSERT = "insert"
    DELETE = "delete"


class EdgeBatch(BaseModel):
    """A batch of edge updates.

    Endpoints are stored as ``(u, v)`` with ``u <= v``. Raw batches may still
    hold duplicates, self-loops or no-op updates; ``normalize_batch`` removes
    them against a concrete graph.
    """

    kind: BatchKind = Field(..., description="Insert or delete")
    edges: list[Edge] = Field(default_factory=list, description="Updated edges")
    dropped: int = Field(default=0, ge=0, description="Edges removed by normalization")

    @field_validator("edges", mode="after")
    @classmethod
    def _order_endpoints(cls, edges: list[Edge]) -> list[Edge]:
        return [(u, v) if u <= v else (v, u) for u, v in edges]

    def __len__(self) -> int:
        return len(self.edges)

    def endpoints(self) -> set[int]:
        """Vertices touched by the batch."""
        touched: set[int] = set()
        for u, v in self.edges:
            touched.add(u)
            touched.add(v)
        return touched

    def mirrored(self) -> "EdgeBatch":
        """Deletion batch undoing this insertion batch (or vice versa)."""
        kind = BatchKind.DELETE if self.kind is BatchKind.INSERT else BatchKind.INSERT
        return EdgeBatch.model_construct(kind=kind, edges=list(self.edges), dropped=0)

    class Config:
        """Pydantic model configuration."""

        json_schema_extra = {
            "example": {"kind": "insert", "edges": [[0, 1], [1, 2]], "dropped": 0}
        }
