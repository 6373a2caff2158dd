"""Run manifest model."""

from datetime import datetime, timezone
from typing import List, Optional

from sqlmodel import Field, SQLModel


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


class RunManifest(SQLModel):
    """Everything needed to replay a solver run."""

    command: List[str] = Field(default_factory=list)
    config: dict = Field(default_factory=dict)
    instance_path: Optional[str] = None
    instance_sha256: str
    seed: int
    method: str = "proposed"
    oracle: bool = False
    tool_version: str
    started_at: datetime = Field(default_factory=utcnow)
    finished_at: Optional[datetime] = None
    wall_time_s: Optional[float] = None
    frontier_size: int = 0
    hypervolume: Optional[float] = None
    reference_point: Optional[List[float]] = None
