"""Solver configuration models."""

from typing import Optional

from sqlmodel import Field, SQLModel


class TabuLimits(SQLModel):
    """Iteration limits of the single-level and two-level tabu searches."""

    n_max: int = Field(default=500, ge=0, description="N_max, single-level iterations")
    t_div: int = Field(default=25, ge=1, description="T_div, stall steps before diversifying")
    n_div: int = Field(default=2, ge=0, description="N_div, sites opened when diversifying")
    n_swap: int = Field(default=50, ge=0, description="N_swap, sampled swap moves")
    n_t1: int = Field(default=20, ge=0, description="N_t1, BAN-level iterations")
    n_t2: int = Field(default=40, ge=0, description="N_t2, SCBS-level iterations")
    tenure: Optional[int] = Field(default=None, ge=0, description="None: 7 + ceil(sites / 10)")


class SolverConfig(SQLModel):
    """Parameters of the adaptive epsilon-constraint solver."""

    delta_c: Optional[float] = Field(default=None, gt=0, description="None: min site cost")
    delta_eps: Optional[float] = Field(default=None, ge=0, description="None: 2 x min SCBS cost")
    n_max_lagrange: int = Field(default=5, ge=0)
    tabu: TabuLimits = Field(default_factory=TabuLimits)
    alpha0: float = Field(default=2.0, gt=0)
    halving_patience: int = Field(default=10, ge=1)
    seed: int = 0
    warm_start: bool = True
    exact_bound_guard: int = Field(
        default=2**8, ge=0, description="largest (y, z) space solved exactly for bounds"
    )
    workers: int = Field(default=1, ge=1)

    class Config:
        """Pydantic configuration."""

        json_schema_extra = {
            "example": {
                "n_max_lagrange": 5,
                "tabu": {"n_max": 500, "t_div": 25, "n_div": 2, "n_swap": 50},
                "seed": 7,
            }
        }
