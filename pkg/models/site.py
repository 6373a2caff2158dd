"""Candidate site model."""

from enum import Enum
from typing import Optional

from sqlmodel import Field, SQLModel


class SiteKind(str, Enum):
    """Candidate type: no fiber (small cell) or fiber (backhaul aggregate node)."""

    SC_CANDIDATE = "sc_candidate"
    BAN_CANDIDATE = "ban_candidate"


class Site(SQLModel):
    """A candidate location for a small cell base station or a BAN."""

    id: str = Field(min_length=1, max_length=64)
    x: float
    y: float
    cost: float = Field(ge=0)
    kind: SiteKind
    # Per-site access threshold; None means the instance-wide coverage distance.
    coverage_distance_m: Optional[float] = Field(default=None, ge=0)

    class Config:
        """Pydantic configuration."""

        json_schema_extra = {
            "example": {
                "id": "SC001",
                "x": 105.0,
                "y": 35.0,
                "cost": 1.0,
                "kind": "sc_candidate",
            }
        }
