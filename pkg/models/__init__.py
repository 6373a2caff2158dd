"""Data models for mmwave-planner."""

from .area import AreaSpec
from .site import Site, SiteKind
from .channel import ChannelParams, access_channel_defaults, backhaul_channel_defaults
from .radio_params import RadioParams
from .user_params import UserParams
from .instance import CapacityOverride, Instance, InstanceDefaults
from .solver_config import SolverConfig, TabuLimits
from .run_manifest import RunManifest
from .solution import BackhaulAssignment, SolutionFile, SubareaCoverage

__all__ = [
    "AreaSpec",
    "Site",
    "SiteKind",
    "ChannelParams",
    "access_channel_defaults",
    "backhaul_channel_defaults",
    "RadioParams",
    "UserParams",
    "CapacityOverride",
    "Instance",
    "InstanceDefaults",
    "SolverConfig",
    "TabuLimits",
    "RunManifest",
    "BackhaulAssignment",
    "SolutionFile",
    "SubareaCoverage",
]
