"""Closed-form per-interval delay model for the three schedulers.

Predicts, for polling position i in one service interval, the time from
the interval start to the end of that station's burst. Predecessor j
contributes a term TD_j built from its reference payload time; the two
adaptive schedulers subtract the unused tail T_u_j = max(0, ref_j - t_j)
that a mean-sized grant would have wasted on the actual traffic, and the
multi-poll variant further removes the per-station poll frames in favor
of a single broadcast poll.

The model deliberately ignores PHY header time on data PPDUs and counts
one interframe space around the own burst, so a discrete-event run sits
a few percent above it, uniformly across schedulers and loads.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .hcca import msdu_count
from .phy import FrameKind, PhyProfile, airtime_control, airtime_multipoll
from .traces import Tspec, VideoTrace
from .util import exact

US_PER_S = 1_000_000

SCHEDULERS = ("hcca", "atxop", "amtxop")


def td_i(payload_us, profile: PhyProfile, control_rate: int | None = None) -> Fraction:
    """Time one predecessor burst occupies the channel: its payload time
    plus a poll, an ACK, three interframe spaces and one propagation
    delay."""
    t_poll = airtime_control(FrameKind.SINGLE_POLL, profile, control_rate)
    t_ack = airtime_control(FrameKind.ACK, profile, control_rate)
    return exact(payload_us) + t_poll + t_ack + 3 * profile.sifs_us + profile.prop_delay_us


@dataclass(frozen=True)
class AnalyticInputs:
    """Inputs of the delay model for one admitted set.

    payload_us[k][i] is the actual payload airtime of polling position
    i+1 during service interval k; ref_payload_us[i] the constant
    reference payload time its mean-based grant would cover.
    """

    profile: PhyProfile
    ref_payload_us: tuple
    payload_us: tuple
    control_rate: int | None = None

    def __post_init__(self):
        if not self.ref_payload_us:
            raise ValueError("need at least one station")
        if not self.payload_us:
            raise ValueError("need at least one service interval")
        n = len(self.ref_payload_us)
        for k, row in enumerate(self.payload_us):
            if len(row) != n:
                raise ValueError(f"interval {k} has {len(row)} stations, expected {n}")

    @property
    def n_stations(self) -> int:
        return len(self.ref_payload_us)

    @property
    def m_intervals(self) -> int:
        return len(self.payload_us)

    @property
    def t_poll(self) -> Fraction:
        return airtime_control(FrameKind.SINGLE_POLL, self.profile, self.control_rate)

    @property
    def t_mpoll(self) -> Fraction:
        return airtime_multipoll(self.n_stations, self.profile, self.control_rate)

    def unused_us(self, j: int, k: int) -> Fraction:
        """Grant tail left over by polling position j in interval k."""
        gap = self.ref_payload_us[j - 1] - self.payload_us[k][j - 1]
        return gap if gap > 0 else Fraction(0)


def d_si(scheduler: str, i: int, inputs: AnalyticInputs, k: int = 0) -> Fraction:
    """Delay of polling position i (1-based) within service interval k."""
    if scheduler not in SCHEDULERS:
        raise ValueError(f"unknown scheduler {scheduler!r}, expected one of {SCHEDULERS}")
    if not 1 <= i <= inputs.n_stations:
        raise ValueError(f"polling position {i} out of range 1..{inputs.n_stations}")
    if not 0 <= k < inputs.m_intervals:
        raise ValueError(f"interval {k} out of range 0..{inputs.m_intervals - 1}")

    sifs = inputs.profile.sifs_us
    own = inputs.payload_us[k][i - 1]
    preds = range(1, i)
    td = [td_i(inputs.ref_payload_us[j - 1], inputs.profile, inputs.control_rate) for j in preds]

    if scheduler == "hcca":
        return sum(td, Fraction(0)) + own + inputs.t_poll + 2 * sifs
    if scheduler == "atxop":
        reclaimed = sum((inputs.unused_us(j, k) for j in preds), Fraction(0))
        return sum(td, Fraction(0)) - reclaimed + own + inputs.t_poll + 2 * sifs
    # multi-poll: one broadcast poll up front, predecessors shed their
    # individual polls, the own burst follows its backoff after one SIFS
    reclaimed = sum((inputs.unused_us(j, k) + inputs.t_poll for j in preds), Fraction(0))
    return inputs.t_mpoll + sum(td, Fraction(0)) - reclaimed + own + sifs


def aggregate_delay(scheduler: str, inputs: AnalyticInputs) -> Fraction:
    """Sum of all stations' delays in one service interval, averaged over
    the intervals, in us."""
    total = Fraction(0)
    for k in range(inputs.m_intervals):
        for i in range(1, inputs.n_stations + 1):
            total += d_si(scheduler, i, inputs, k)
    return total / inputs.m_intervals


def aggregate_delay_alt(scheduler: str, inputs: AnalyticInputs) -> Fraction:
    """Alternative reading that counts the own payload time and one
    interframe space twice per station. Reported alongside the primary
    model for comparison, never used for validation."""
    extra = Fraction(0)
    for k in range(inputs.m_intervals):
        extra += sum(inputs.payload_us[k]) + inputs.n_stations * inputs.profile.sifs_us
    return aggregate_delay(scheduler, inputs) + extra / inputs.m_intervals


def analytic_inputs(
    trace: VideoTrace,
    n_stations: int,
    tspec: Tspec,
    si_s,
    profile: PhyProfile,
    control_rate: int | None = None,
    m_intervals: int | None = None,
    start_interval: int = 0,
) -> AnalyticInputs:
    """Model inputs for n identical stations all streaming this trace in
    lockstep. Frames are binned into service intervals by generation
    time; each bin must fit its grant for the model to hold, which the
    TSPEC guarantees at the mean rate."""
    if n_stations < 1:
        raise ValueError("n_stations must be >= 1")
    si = exact(si_s)
    si_ms = si * 1000
    rate = tspec.min_phy_rate_bps

    bins = {}
    for frame in trace.generation_frames():
        k = math.floor(frame.display_time_ms / si_ms)
        bins[k] = bins.get(k, 0) + frame.size
    last = max(bins) if bins else 0
    if m_intervals is None:
        m_intervals = last + 1 - start_interval
    sizes = [bins.get(k, 0) for k in range(start_interval, start_interval + m_intervals)]

    payload = tuple(
        (Fraction(s * 8 * US_PER_S, rate),) * n_stations for s in sizes
    )
    n_msdus = msdu_count(si, tspec.mean_rate_bps, tspec.mean_msdu_bytes)
    ref_bytes = max(n_msdus * tspec.mean_msdu_bytes, tspec.max_msdu_bytes)
    ref = Fraction(ref_bytes * 8 * US_PER_S, rate)
    return AnalyticInputs(
        profile=profile,
        ref_payload_us=(ref,) * n_stations,
        payload_us=payload,
        control_rate=control_rate,
    )


@dataclass(frozen=True)
class ValidationReport:
    rel_errors: tuple
    max_rel_error: float
    mean_rel_error: float

    def within(self, bound) -> bool:
        return self.max_rel_error <= bound


def validate(model_series, sim_series) -> ValidationReport:
    """Relative error of the model against simulated values, pointwise."""
    model = [exact(m) for m in model_series]
    sim = [exact(s) for s in sim_series]
    if len(model) != len(sim):
        raise ValueError(f"series length mismatch: {len(model)} vs {len(sim)}")
    if not sim:
        raise ValueError("empty series")
    if any(s <= 0 for s in sim):
        raise ValueError("simulated values must be > 0")
    errs = tuple(abs(m - s) / s for m, s in zip(model, sim))
    return ValidationReport(
        rel_errors=errs,
        max_rel_error=float(max(errs)),
        mean_rel_error=float(sum(errs) / len(errs)),
    )
