"""Channel model parameters."""

from sqlmodel import Field, SQLModel

SPEED_OF_LIGHT = 299_792_458.0


class ChannelParams(SQLModel):
    """Close-in path loss with LOS/NLOS exponents and lognormal shadowing."""

    pathloss_exp_los: float = Field(default=2.0, ge=1)
    pathloss_exp_nlos: float = Field(default=3.3, ge=1)
    shadow_sigma_los_db: float = Field(default=5.2, gt=0)
    shadow_sigma_nlos_db: float = Field(default=7.6, gt=0)
    beta_los: float = Field(default=0.046, gt=0, description="LOS decay rate in 1/m")
    carrier_hz: float = Field(default=73e9, gt=0)
    ref_dist_m: float = Field(default=1.0, gt=0)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


def access_channel_defaults() -> ChannelParams:
    """Urban 73 GHz access link."""
    return ChannelParams()


def backhaul_channel_defaults() -> ChannelParams:
    """Urban 73 GHz backhaul link."""
    return ChannelParams(
        pathloss_exp_los=2.0,
        pathloss_exp_nlos=3.5,
        shadow_sigma_los_db=4.2,
        shadow_sigma_nlos_db=7.9,
    )
