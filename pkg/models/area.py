"""Planning area model."""

import math

from pydantic import model_validator
from sqlmodel import Field, SQLModel

GRID_TOLERANCE = 1e-9


class AreaSpec(SQLModel):
    """Rectangular planning area split into square subareas."""

    width: float = Field(gt=0, description="Area width in meters")
    height: float = Field(gt=0, description="Area height in meters")
    subarea_side: float = Field(default=10.0, gt=0, description="Subarea side in meters")

    class Config:
        """Pydantic configuration."""

        json_schema_extra = {
            "example": {"width": 400.0, "height": 400.0, "subarea_side": 10.0}
        }

    @model_validator(mode="after")
    def check_grid(self) -> "AreaSpec":
        for name in ("width", "height"):
            ratio = getattr(self, name) / self.subarea_side
            if abs(ratio - round(ratio)) > GRID_TOLERANCE or round(ratio) < 1:
                raise ValueError(
                    f"{name} must be a positive integer multiple of subarea_side "
                    f"({getattr(self, name)} / {self.subarea_side})"
                )
        return self

    @property
    def columns(self) -> int:
        return int(round(self.width / self.subarea_side))

    @property
    def rows(self) -> int:
        return int(round(self.height / self.subarea_side))

    @property
    def subarea_count(self) -> int:
        """S, the number of subareas."""
        return self.columns * self.rows

    @property
    def subarea_area(self) -> float:
        """Area of one subarea in m² (Δs)."""
        return self.subarea_side * self.subarea_side

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height
