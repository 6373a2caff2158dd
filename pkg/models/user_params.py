"""User traffic parameters."""

from sqlmodel import Field, SQLModel


class UserParams(SQLModel):
    """Poisson user field with a constant per-user rate demand."""

    density_per_m2: float = Field(default=200e-6, ge=0, description="users/m² (200/km²)")
    rate_demand_bps: float = Field(default=100e6, gt=0)
    block_prob_max: float = Field(default=0.05, gt=0, lt=1, description="p_bb")
