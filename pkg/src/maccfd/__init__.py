"""Movable-antenna full-duplex link simulator and antenna-placement optimizer."""

from maccfd.channel import (
    ChannelRealization,
    LinkGeometry,
    PathAngles,
    SystemParams,
    channel_coefficient,
    db_to_linear,
    dbm_to_mw,
    field_response,
    propagation_distance_diff,
    sample_geometry,
)
from maccfd.system import (
    AntennaLayout,
    LinkEvaluator,
    RatePair,
    achievable_rate,
    hd_rate,
    min_rate_fitness,
    sinr,
)
from maccfd.ppso import PpsoConfig, run_ppso

__version__ = "0.1.0"

__all__ = [
    "AntennaLayout",
    "ChannelRealization",
    "LinkEvaluator",
    "LinkGeometry",
    "PathAngles",
    "PpsoConfig",
    "RatePair",
    "SystemParams",
    "achievable_rate",
    "channel_coefficient",
    "db_to_linear",
    "dbm_to_mw",
    "field_response",
    "hd_rate",
    "min_rate_fitness",
    "propagation_distance_diff",
    "run_ppso",
    "sample_geometry",
    "sinr",
]
