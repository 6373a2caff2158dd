"""Deployment instance model."""

from typing import List

from pydantic import model_validator
from sqlmodel import Field, SQLModel

from .area import AreaSpec
from .channel import ChannelParams, access_channel_defaults, backhaul_channel_defaults
from .radio_params import RadioParams
from .site import Site, SiteKind
from .user_params import UserParams


class CapacityOverride(SQLModel):
    """Measured or planned capacity of one BAN -> SCBS link."""

    ban_id: str
    sc_id: str
    capacity_bps: float = Field(ge=0)


class Instance(SQLModel):
    """Everything the solver needs: geometry, candidates and radio/user parameters.

    Treated as immutable once validated.
    """

    area: AreaSpec
    sc_sites: List[Site] = Field(default_factory=list)
    ban_sites: List[Site] = Field(default_factory=list)
    access_channel: ChannelParams = Field(default_factory=access_channel_defaults)
    backhaul_channel: ChannelParams = Field(default_factory=backhaul_channel_defaults)
    radio: RadioParams = Field(default_factory=RadioParams)
    users: UserParams = Field(default_factory=UserParams)
    nb_max: int = Field(ge=1, description="N_b, SCBSs one BAN can backhaul")
    capacity_overrides: List[CapacityOverride] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_sites(self) -> "Instance":
        seen = set()
        for expected, sites, field in (
            (SiteKind.SC_CANDIDATE, self.sc_sites, "sc_sites"),
            (SiteKind.BAN_CANDIDATE, self.ban_sites, "ban_sites"),
        ):
            for site in sites:
                if site.kind != expected:
                    raise ValueError(f"{field}: site {site.id} has kind {site.kind.value}")
                if not self.area.contains(site.x, site.y):
                    raise ValueError(
                        f"{field}: site {site.id} at ({site.x}, {site.y}) lies outside the "
                        f"{self.area.width}x{self.area.height} m area"
                    )
                if site.id in seen:
                    raise ValueError(f"{field}: duplicate site id {site.id}")
                seen.add(site.id)

        sc_ids = {site.id for site in self.sc_sites}
        ban_ids = {site.id for site in self.ban_sites}
        for override in self.capacity_overrides:
            if override.ban_id not in ban_ids or override.sc_id not in sc_ids:
                raise ValueError(
                    f"capacity_overrides: unknown link {override.ban_id} -> {override.sc_id}"
                )
        return self

    @property
    def site_count(self) -> int:
        return len(self.sc_sites) + len(self.ban_sites)


class InstanceDefaults(SQLModel):
    """Parameter bundle used when generating instances."""

    access_channel: ChannelParams = Field(default_factory=access_channel_defaults)
    backhaul_channel: ChannelParams = Field(default_factory=backhaul_channel_defaults)
    radio: RadioParams = Field(default_factory=RadioParams)
    users: UserParams = Field(default_factory=UserParams)
    nb_max: int = Field(default=3, ge=1)
    sc_cost: float = Field(default=1.0, ge=0)
    ban_cost: float = Field(default=10.0, ge=0)
