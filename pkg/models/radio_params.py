"""Radio parameters shared by every base station."""

from sqlmodel import Field, SQLModel


class RadioParams(SQLModel):
    """Transmit power, noise and outage thresholds."""

    tx_power_dbm: float = 30.0
    noise_dbm: float = -74.0
    snr_threshold_db: float = -10.0
    outage_max: float = Field(default=0.1, gt=0, lt=1, description="p_oa")
    backhaul_bandwidth_hz: float = Field(default=1e9, gt=0)
    backhaul_snr_threshold_db: float = -10.0
    backhaul_antenna_gain_db: float = Field(
        default=40.0,
        ge=0,
        description="Combined BAN and SCBS beam gain of a backhaul link, added to its mean SNR",
    )
