"""Serialized deployment (solution file) model."""

from typing import List

from sqlmodel import Field, SQLModel


class BackhaulAssignment(SQLModel):
    sc_id: str
    ban_id: str


class SubareaCoverage(SQLModel):
    subarea: int = Field(ge=0)
    site_id: str


class SolutionFile(SQLModel):
    """One deployment as written into a report directory."""

    cost: float
    uncovered: int
    covered_fraction: float
    open_sc: List[str] = Field(default_factory=list)
    open_ban: List[str] = Field(default_factory=list)
    backhaul: List[BackhaulAssignment] = Field(default_factory=list)
    coverage: List[SubareaCoverage] = Field(default_factory=list)
