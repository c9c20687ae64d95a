"""PHY-layer airtime arithmetic.

Every duration is returned in microseconds as an exact Fraction; rounding
happens only when values are printed. The preamble and PLCP header of a
PPDU always go out at the (slow) PLCP rate, the MAC header and payload at
the effective PHY rate of the frame.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ConfigError

US_PER_S = 1_000_000

# Multi-poll frame layout: a basic (non-QoS) MAC header in front of a fixed
# control body plus one 4-byte record per polled station. The record is
# split 2 bytes AID + 2 bytes TXOP duration in 8 us units; only the total
# length affects timing.
MULTIPOLL_MAC_HEADER_BYTES = 24
MULTIPOLL_FIXED_BODY_BYTES = 13
MULTIPOLL_RECORD_BYTES = 4
MULTIPOLL_TXOP_UNIT_US = 8


class FrameKind(Enum):
    DATA = "data"
    ACK = "ack"
    SINGLE_POLL = "single_poll"
    MULTI_POLL = "multi_poll"


@dataclass(frozen=True)
class PhyProfile:
    """Timing constants of one PHY flavor.

    Rates are bit/s, sizes bytes, durations integer microseconds.
    """

    name: str
    preamble_bytes: int
    plcp_header_bytes: int
    plcp_rate: int        # bit/s
    data_rate: int        # bit/s
    basic_rate: int       # bit/s
    mac_header_bytes: int
    sifs_us: int          # [us]
    pifs_us: int          # [us]
    slot_us: int          # [us]
    prop_delay_us: int    # [us]

    def __post_init__(self):
        for field in ("plcp_rate", "data_rate", "basic_rate"):
            if getattr(self, field) <= 0:
                raise ConfigError(f"profile {self.name!r}: {field} must be > 0")
        for field in ("preamble_bytes", "plcp_header_bytes", "mac_header_bytes"):
            if getattr(self, field) <= 0:
                raise ConfigError(f"profile {self.name!r}: {field} must be > 0")
        for field in ("sifs_us", "pifs_us", "slot_us", "prop_delay_us"):
            if getattr(self, field) < 0:
                raise ConfigError(f"profile {self.name!r}: {field} must be >= 0")


PROFILE_11G = PhyProfile(
    name="11g",
    preamble_bytes=12,
    plcp_header_bytes=3,
    plcp_rate=1_000_000,
    data_rate=54_000_000,
    basic_rate=1_000_000,
    mac_header_bytes=36,
    sifs_us=10,
    pifs_us=30,
    slot_us=9,
    prop_delay_us=2,
)

PROFILE_11B = PhyProfile(
    name="11b",
    preamble_bytes=18,
    plcp_header_bytes=6,
    plcp_rate=1_000_000,
    data_rate=11_000_000,
    basic_rate=1_000_000,
    mac_header_bytes=36,
    sifs_us=10,
    pifs_us=30,
    slot_us=20,
    prop_delay_us=2,
)

PROFILES = {"11g": PROFILE_11G, "11b": PROFILE_11B}


def _bits_time_us(bits: int, rate_bps: int) -> Fraction:
    return Fraction(bits * US_PER_S, rate_bps)


def plcp_time_us(profile: PhyProfile) -> Fraction:
    """Preamble plus PLCP header time at the PLCP rate."""
    bits = (profile.preamble_bytes + profile.plcp_header_bytes) * 8
    return _bits_time_us(bits, profile.plcp_rate)


def airtime_data(payload_bytes: int, profile: PhyProfile, rate_override: int | None = None) -> Fraction:
    """Over-the-air time of a data PPDU carrying payload_bytes, in us.

    The MAC header and payload travel at the profile data rate unless
    rate_override is given.
    """
    if payload_bytes < 0:
        raise ValueError("payload_bytes must be >= 0")
    rate = profile.data_rate if rate_override is None else rate_override
    if rate <= 0:
        raise ConfigError("effective PHY rate must be > 0")
    body_bits = (profile.mac_header_bytes + payload_bytes) * 8
    return plcp_time_us(profile) + _bits_time_us(body_bits, rate)


def airtime_control(kind: FrameKind, profile: PhyProfile, control_rate: int | None = None) -> Fraction:
    """Airtime of an ACK or a single poll: header-only PPDU at control_rate.

    control_rate defaults to the profile basic rate. ACK and single poll
    are the same length by construction.
    """
    if kind not in (FrameKind.ACK, FrameKind.SINGLE_POLL):
        raise ValueError(f"not a control frame kind: {kind}")
    rate = profile.basic_rate if control_rate is None else control_rate
    if rate <= 0:
        raise ConfigError("control_rate must be > 0")
    return plcp_time_us(profile) + _bits_time_us(profile.mac_header_bytes * 8, rate)


def airtime_multipoll(n_stations: int, profile: PhyProfile, control_rate: int | None = None) -> Fraction:
    """Airtime of one broadcast multi-poll frame for n_stations records."""
    if n_stations < 1:
        raise ValueError("n_stations must be >= 1")
    rate = profile.basic_rate if control_rate is None else control_rate
    if rate <= 0:
        raise ConfigError("control_rate must be > 0")
    body_bytes = (
        MULTIPOLL_MAC_HEADER_BYTES
        + MULTIPOLL_FIXED_BODY_BYTES
        + MULTIPOLL_RECORD_BYTES * n_stations
    )
    return plcp_time_us(profile) + _bits_time_us(body_bytes * 8, rate)


def poll_gain_ratio(n_stations: int, profile: PhyProfile, control_rate: int | None = None) -> Fraction:
    """Relative poll-overhead saving of one multi-poll over n single polls.

    Clamped at zero: with a single station the multi-poll is slightly
    longer than a single poll and there is nothing to gain.
    """
    if n_stations < 1:
        raise ValueError("n_stations must be >= 1")
    single = airtime_control(FrameKind.SINGLE_POLL, profile, control_rate)
    multi = airtime_multipoll(n_stations, profile, control_rate)
    raw = 1 - multi / (n_stations * single)
    return raw if raw > 0 else Fraction(0)
