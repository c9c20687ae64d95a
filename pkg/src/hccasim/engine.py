"""Discrete-event simulation of polled uplink TXOPs on one channel.

Time is integer ticks at K ticks per microsecond, with K the least common
multiple of R/gcd(R, 8 MHz) over every PHY rate in the scenario; every
frame airtime and interframe space then lands exactly on the grid and a
run is reproducible bit for bit. Events at the same tick order by kind,
then station AID, then insertion order.

Per service interval the AP issues one TXOP per admitted stream, in
admission (= AID) order. Grant boundaries are rigid: a station that
finishes early leaves the remainder idle, and a frame that does not fit
stays queued. Under the multi-poll scheduler stations start their TXOP
immediately when the preceding one ends, having counted down the
predecessor durations from the broadcast poll; under the single-poll
schedulers each TXOP begins with its poll frame.

A lost uplink frame still consumes its full exchange time (the ACK slot
runs dead), is dropped without retransmission, and carries its
queue-size report down with it, so the following interval falls back to
a mean-sized grant.
"""

import heapq
import math
import os
import random
from collections import deque
from dataclasses import dataclass, replace
from enum import IntEnum
from fractions import Fraction

from .adaptive import (
    SizeLedger,
    ap_on_data,
    build_multipoll,
    fallback_grant,
    multipoll_overhead,
    station_backoff,
    txop_adaptive,
)
from .analytic import SCHEDULERS
from .errors import ConfigError
from .hcca import (
    PollingList,
    admit,
    compute_si,
    min_msi,
    msdu_count,
    reference_overhead,
    txop_reference,
)
from .metrics import MetricsReport, PacketRecord, build_report
from .phy import FrameKind, PhyProfile, airtime_control, airtime_multipoll, plcp_time_us
from .traces import Tspec, VideoTrace
from .util import exact

US_PER_S = 1_000_000
M_TO_FT = Fraction("3.28084")


class EventKind(IntEnum):
    """Tie-break order for events on the same tick."""

    STREAM_START = 0
    STREAM_END = 1
    FRAME_GENERATED = 2
    MOBILITY_TIER_CHANGE = 3
    BEACON_TBTT = 4
    CAP_START = 5
    SLOT_SERVICE = 6


@dataclass
class Channel:
    """Memoryless loss channel for uplink data PPDUs."""

    per: float
    rng: random.Random

    def __post_init__(self):
        if not 0 <= self.per < 1:
            raise ConfigError(f"per must be in [0, 1), got {self.per}")


def apply_channel(channel: Channel, frame) -> bool:
    """Draw the fate of one uplink PPDU; True means it arrives intact.
    One draw per frame regardless of the loss rate, so runs with
    different rates stay draw-aligned under one seed."""
    return channel.rng.random() >= channel.per


@dataclass(frozen=True)
class Mobility:
    """Group movement: every station starts at the same range and walks
    outward at constant speed. tiers maps range (feet) to the PHY rate
    sustained inside it; past the last tier the stations disassociate."""

    tiers: tuple                 # ((max_distance_ft, rate_bps), ...) ascending
    speed_mps: Fraction
    start_s: Fraction
    initial_distance_ft: Fraction

    def __post_init__(self):
        if not self.tiers:
            raise ConfigError("mobility needs at least one rate tier")
        dists = [exact(d) for d, _ in self.tiers]
        if dists != sorted(dists) or len(set(dists)) != len(dists):
            raise ConfigError("tier distances must be strictly ascending")
        if any(r <= 0 for _, r in self.tiers):
            raise ConfigError("tier rates must be > 0")
        if exact(self.speed_mps) < 0 or exact(self.initial_distance_ft) < 0:
            raise ConfigError("speed and initial distance must be >= 0")


def phy_rate_for_distance(distance, tiers):
    """Rate of the innermost tier containing the distance, None when the
    station is out of range entirely."""
    d = exact(distance)
    for max_ft, rate in tiers:
        if d <= exact(max_ft):
            return rate
    return None


def advance_mobility(positions, speed_mps, dt_s):
    """Move every station outward by speed*dt. Positions are feet, speed
    is m/s."""
    step = exact(speed_mps) * M_TO_FT * exact(dt_s)
    return {aid: exact(pos) + step for aid, pos in positions.items()}


@dataclass(frozen=True)
class StationSpec:
    aid: int
    trace: VideoTrace
    tspec: Tspec
    start_s: Fraction = Fraction(0)
    stop_s: Fraction | None = None

    def __post_init__(self):
        if self.aid <= 0:
            raise ConfigError("aid must be > 0")
        if exact(self.start_s) < 0:
            raise ConfigError("start_s must be >= 0")


@dataclass(frozen=True)
class Scenario:
    name: str
    scheduler: str
    profile: PhyProfile
    stations: tuple
    sim_time_s: Fraction
    beacon_interval_s: Fraction
    t_cp_s: Fraction = Fraction(0)
    warmup_s: Fraction = Fraction(0)
    control_rate: int | None = None
    data_rate: int | None = None
    per: float = 0.0
    seed: int = 0
    mobility: Mobility | None = None
    log_events: bool = False

    def __post_init__(self):
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(
                f"unknown scheduler {self.scheduler!r}, expected one of {SCHEDULERS}"
            )
        if not self.stations:
            raise ConfigError("scenario needs at least one station")
        aids = [s.aid for s in self.stations]
        if len(set(aids)) != len(aids):
            raise ConfigError(f"duplicate aids: {aids}")
        if exact(self.sim_time_s) <= 0:
            raise ConfigError("sim_time_s must be > 0")
        if exact(self.beacon_interval_s) <= 0:
            raise ConfigError("beacon_interval_s must be > 0")
        if not 0 <= exact(self.warmup_s) < exact(self.sim_time_s):
            raise ConfigError("warmup_s must lie inside the simulated time")
        if exact(self.t_cp_s) < 0:
            raise ConfigError("t_cp_s must be >= 0")
        if not 0 <= self.per < 1:
            raise ConfigError(f"per must be in [0, 1), got {self.per}")


@dataclass(frozen=True)
class GrantLogEntry:
    si_index: int
    aid: int
    start_us: Fraction
    duration_us: Fraction
    basis: object


@dataclass
class RunResult:
    scenario: Scenario
    si_s: Fraction | None
    n_offered: int
    n_admitted: int
    admitted_aids: tuple
    rejected_aids: tuple
    records: tuple
    grant_log: tuple
    n_generated: int
    n_delivered: int
    n_lost: int
    n_lost_measured: int
    n_null_lost: int
    n_left_queued: int
    n_deferred_slots: int
    n_beacons: int
    n_service_intervals: int
    tier_changes: tuple
    event_log: tuple

    @property
    def warmup_us(self) -> Fraction:
        return exact(self.scenario.warmup_s) * US_PER_S

    def measured_records(self) -> tuple:
        w = self.warmup_us
        return tuple(r for r in self.records if r.gen_time_us >= w)

    def measured_grants(self) -> tuple:
        w = self.warmup_us
        return tuple(g for g in self.grant_log if g.start_us >= w)

    def report(self) -> MetricsReport:
        duration = exact(self.scenario.sim_time_s) - exact(self.scenario.warmup_s)
        return build_report(
            self.measured_records(),
            (g.duration_us for g in self.measured_grants()),
            duration,
            n_lost=self.n_lost_measured,
        )


class _QFrame:
    __slots__ = ("index", "size", "gen_tick")

    def __init__(self, index, size, gen_tick):
        self.index = index
        self.size = size
        self.gen_tick = gen_tick


class _Station:
    __slots__ = (
        "spec", "aid", "admitted", "rejected", "stopped", "suspended",
        "queue", "gen_frames", "next_gen_idx", "op_rate",
    )

    def __init__(self, spec, op_rate):
        self.spec = spec
        self.aid = spec.aid
        self.admitted = False
        self.rejected = False
        self.stopped = False
        self.suspended = False
        self.queue = deque()
        self.gen_frames = list(spec.trace.generation_frames())
        self.next_gen_idx = 0
        self.op_rate = op_rate

    @property
    def active(self):
        return self.admitted and not (self.stopped or self.suspended)


class _Sim:
    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.profile = scenario.profile
        self.ctrl = scenario.control_rate
        base_rate = scenario.data_rate or self.profile.data_rate

        rates = {self.profile.plcp_rate, self.profile.basic_rate, base_rate}
        if self.ctrl is not None:
            rates.add(self.ctrl)
        if scenario.mobility:
            rates.update(r for _, r in scenario.mobility.tiers)
        self.K = math.lcm(*(r // math.gcd(r, 8 * US_PER_S) for r in rates))

        self.end_tick = self._sec_ticks(scenario.sim_time_s)
        self.warmup_tick = self._sec_ticks(scenario.warmup_s)
        self.bi = exact(scenario.beacon_interval_s)

        self.stations = {
            s.aid: _Station(s, base_rate)
            for s in sorted(scenario.stations, key=lambda s: s.aid)
        }
        self.plist = PollingList(beacon_interval_s=self.bi)
        self.ledger = SizeLedger()
        self.channel = Channel(per=scenario.per, rng=random.Random(scenario.seed))

        # per-exchange constants (integer ticks)
        self.sifs_t = self.profile.sifs_us * self.K
        self.dp_t = self.profile.prop_delay_us * self.K
        self.ack_t = self._to_ticks(airtime_control(FrameKind.ACK, self.profile, self.ctrl))
        self.poll_t = self._to_ticks(airtime_control(FrameKind.SINGLE_POLL, self.profile, self.ctrl))
        self.plcp_t = self._to_ticks(plcp_time_us(self.profile))
        self._byte_ticks = {}

        self.heap = []
        self._seq = 0
        self.records = []
        self.grant_log = []
        self.tier_changes = []
        self.event_log = []
        self.logging = scenario.log_events or os.environ.get("HCCASIM_LOG", "") not in ("", "0")

        self.si_index = 0
        self.cap_scheduled = False
        self.n_generated = 0
        self.n_lost = 0
        self.n_lost_measured = 0
        self.n_null_lost = 0
        self.n_deferred = 0
        self.n_beacons = 0
        self._fleet_rate_logged = None

        self.positions0 = None
        self.positions = None
        if scenario.mobility:
            d0 = exact(scenario.mobility.initial_distance_ft)
            self.positions0 = {aid: d0 for aid in self.stations}
            self.positions = dict(self.positions0)
            self._apply_mobility(0)

        for st in self.stations.values():
            start = self._sec_ticks(st.spec.start_s)
            if start < self.end_tick:
                self._push(start, EventKind.STREAM_START, st.aid, None)
            if st.spec.stop_s is not None:
                stop = self._sec_ticks(st.spec.stop_s)
                if stop < self.end_tick:
                    self._push(stop, EventKind.STREAM_END, st.aid, None)
        bi_t = self._sec_ticks(self.bi)
        for t in range(0, self.end_tick, bi_t):
            self._push(t, EventKind.BEACON_TBTT, 0, None)

    # -- time plumbing ---------------------------------------------------

    def _to_ticks(self, us) -> int:
        v = exact(us) * self.K
        if v.denominator != 1:
            raise ConfigError(f"duration {us} us is off the 1/{self.K} us tick grid")
        return int(v)

    def _sec_ticks(self, s) -> int:
        return self._to_ticks(exact(s) * US_PER_S)

    def _us(self, tick) -> Fraction:
        return Fraction(tick, self.K)

    def _data_ticks(self, payload_bytes: int, rate: int) -> int:
        per_byte = self._byte_ticks.get(rate)
        if per_byte is None:
            per_byte, rem = divmod(8 * US_PER_S * self.K, rate)
            if rem:
                raise ConfigError(f"rate {rate} is off the tick grid")
            self._byte_ticks[rate] = per_byte
        return self.plcp_t + (self.profile.mac_header_bytes + payload_bytes) * per_byte

    # -- event plumbing --------------------------------------------------

    def _push(self, tick, kind, aid, payload):
        self._seq += 1
        heapq.heappush(self.heap, (tick, int(kind), aid, self._seq, payload))

    def _log(self, tick, what, aid, detail=""):
        if not self.logging:
            return
        us, rem = divmod(tick, self.K)
        frac = (rem * US_PER_S + self.K // 2) // self.K
        if frac == US_PER_S:
            us, frac = us + 1, 0
        self.event_log.append(f"t={us}.{frac:06d} {what} aid={aid} {detail}".rstrip())

    # -- main loop -------------------------------------------------------

    def run(self) -> RunResult:
        handlers = {
            EventKind.STREAM_START: self._on_stream_start,
            EventKind.STREAM_END: self._on_stream_end,
            EventKind.FRAME_GENERATED: self._on_frame_generated,
            EventKind.BEACON_TBTT: self._on_beacon,
            EventKind.CAP_START: self._on_cap_start,
            EventKind.SLOT_SERVICE: self._on_slot_service,
        }
        while self.heap:
            tick, kind, aid, _seq, payload = heapq.heappop(self.heap)
            if tick >= self.end_tick:
                break
            handlers[EventKind(kind)](tick, aid, payload)
        return self._finalize()

    def _finalize(self) -> RunResult:
        admitted = tuple(st.aid for st in self.stations.values() if st.admitted)
        rejected = tuple(st.aid for st in self.stations.values() if st.rejected)
        left = sum(len(st.queue) for st in self.stations.values())
        return RunResult(
            scenario=self.sc,
            si_s=self.plist.si_s if self.plist.entries else None,
            n_offered=len(self.sc.stations),
            n_admitted=len(admitted),
            admitted_aids=admitted,
            rejected_aids=rejected,
            records=tuple(self.records),
            grant_log=tuple(self.grant_log),
            n_generated=self.n_generated,
            n_delivered=len(self.records),
            n_lost=self.n_lost,
            n_lost_measured=self.n_lost_measured,
            n_null_lost=self.n_null_lost,
            n_left_queued=left,
            n_deferred_slots=self.n_deferred,
            n_beacons=self.n_beacons,
            n_service_intervals=self.si_index,
            tier_changes=tuple(self.tier_changes),
            event_log=tuple(self.event_log),
        )

    # -- admission and traffic -------------------------------------------

    def _working_tspec(self, st: _Station) -> Tspec:
        return replace(st.spec.tspec, min_phy_rate_bps=st.op_rate)

    def _on_stream_start(self, tick, aid, _payload):
        st = self.stations[aid]
        wt = self._working_tspec(st)
        msis = [e.tspec.msi_s for e in self.plist.entries] + [wt.msi_s]
        si = compute_si(self.bi, min_msi(msis))
        n = msdu_count(si, wt.mean_rate_bps, wt.mean_msdu_bytes)
        overhead = reference_overhead(n, self.profile, self.ctrl, st.op_rate)
        ok, plist = admit(self.plist, wt, self.sc.t_cp_s, overhead, aid=aid)
        if not ok:
            st.rejected = True
            self._log(tick, "ADMIT-REJECT", aid)
            return
        self.plist = plist
        st.admitted = True
        self._log(tick, "ADMIT", aid, f"si={float(plist.si_s):.6f}s n_msdu={n}")
        self._schedule_frame(st, 0)
        if not self.cap_scheduled:
            self.cap_scheduled = True
            self._push(tick, EventKind.CAP_START, 0, None)

    def _on_stream_end(self, tick, aid, _payload):
        st = self.stations[aid]
        st.stopped = True
        self._log(tick, "STREAM-END", aid, f"queued={len(st.queue)}")

    def _schedule_frame(self, st: _Station, idx: int):
        if idx >= len(st.gen_frames):
            return
        frame = st.gen_frames[idx]
        tick = self._sec_ticks(st.spec.start_s) + self._to_ticks(frame.display_time_ms * 1000)
        if tick < self.end_tick:
            self._push(tick, EventKind.FRAME_GENERATED, st.aid, idx)

    def _on_frame_generated(self, tick, aid, idx):
        st = self.stations[aid]
        if st.stopped:
            return
        frame = st.gen_frames[idx]
        st.queue.append(_QFrame(idx, frame.size, tick))
        st.next_gen_idx = idx + 1
        self.n_generated += 1
        self._schedule_frame(st, idx + 1)

    def _on_beacon(self, tick, _aid, _payload):
        self.n_beacons += 1

    # -- mobility ----------------------------------------------------------

    def _apply_mobility(self, tick):
        mob = self.sc.mobility
        if mob is None:
            return
        t_s = Fraction(tick, self.K * US_PER_S)
        dt = max(Fraction(0), t_s - exact(mob.start_s))
        # closed form from the initial positions: no per-step accumulation
        self.positions = advance_mobility(self.positions0, mob.speed_mps, dt)
        rate_now = None
        for aid, st in self.stations.items():
            rate = phy_rate_for_distance(self.positions[aid], mob.tiers)
            if rate is None:
                if not st.suspended:
                    st.suspended = True
                    self._log(tick, "DISASSOCIATE", aid, f"distance={float(self.positions[aid]):.2f}ft")
            else:
                st.op_rate = rate
            rate_now = rate
        if rate_now != self._fleet_rate_logged:
            self.tier_changes.append((self._us(tick), rate_now))
            self._fleet_rate_logged = rate_now
            self._log(tick, "TIER-CHANGE", 0, f"rate={rate_now}")

    # -- the contention-free period ---------------------------------------

    def _on_cap_start(self, tick, _aid, _payload):
        self._apply_mobility(tick)
        si_us = self.plist.si_s * US_PER_S
        si_t = self._to_ticks(si_us)
        cap_end = tick + si_t
        k = self.si_index
        self.si_index += 1

        active = [e for e in self.plist.entries if self.stations[e.aid].active]
        if active:
            if self.sc.scheduler == "amtxop":
                self._dispatch_multipoll(tick, cap_end, active, k)
            else:
                self._dispatch_polls(tick, cap_end, active, k)

        nxt = tick + si_t
        if nxt < self.end_tick:
            self._push(nxt, EventKind.CAP_START, 0, None)

    def _grant_for(self, entry, st):
        """Current-interval grant for one stream under the single-poll
        schedulers."""
        si = self.plist.si_s
        wt = self._working_tspec(st)
        n = msdu_count(si, wt.mean_rate_bps, wt.mean_msdu_bytes)
        o_ref = reference_overhead(n, self.profile, self.ctrl, st.op_rate)
        if self.sc.scheduler == "hcca":
            return txop_reference(wt, si, o_ref)
        size = self.ledger.take(entry.aid)
        if size is None:
            return fallback_grant(wt, si, o_ref)
        o_one = reference_overhead(1, self.profile, self.ctrl, st.op_rate)
        return txop_adaptive(size, wt, o_one)

    def _dispatch_polls(self, tick, cap_end, active, k):
        t = tick
        for entry in active:
            st = self.stations[entry.aid]
            grant = self._grant_for(entry, st)
            g_t = self._to_ticks(grant.duration_us)
            if t + g_t > cap_end:
                self.n_deferred += 1
                self._log(t, "DEFER", entry.aid, f"si={k}")
                break
            self.grant_log.append(GrantLogEntry(k, entry.aid, self._us(t), grant.duration_us, grant.basis))
            self._push(t, EventKind.SLOT_SERVICE, entry.aid, (g_t, False))
            t += g_t

    def _dispatch_multipoll(self, tick, cap_end, active, k):
        rates = {self.stations[e.aid].op_rate for e in active}
        if len(rates) != 1:
            raise ConfigError("multi-poll scheduling needs a uniform PHY rate")
        rate = rates.pop()
        si = self.plist.si_s
        t_poll = airtime_control(FrameKind.SINGLE_POLL, self.profile, self.ctrl)

        tmp_entries = []
        for entry in active:
            st = self.stations[entry.aid]
            wt = self._working_tspec(st)
            n = msdu_count(si, wt.mean_rate_bps, wt.mean_msdu_bytes)
            # fallback grants carry no poll of their own under the multi-poll
            o_fb = reference_overhead(n, self.profile, self.ctrl, rate) - t_poll
            tmp_entries.append(replace(entry, tspec=wt, overhead_us=o_fb))
        tmp = PollingList(beacon_interval_s=self.bi, entries=tuple(tmp_entries), si_s=si)

        o_slot = multipoll_overhead(1, self.profile, self.ctrl, rate)
        frame = build_multipoll(tmp, self.ledger, si, o_slot)
        mp_t = self._to_ticks(airtime_multipoll(frame.record_count, self.profile, self.ctrl))
        self._log(tick, "MULTIPOLL", 0, f"si={k} records={frame.record_count}")

        t0 = tick + mp_t
        for g in frame.records:
            start = t0 + self._to_ticks(station_backoff(frame, g.aid))
            g_t = self._to_ticks(g.duration_us)
            if start + g_t > cap_end:
                self.n_deferred += 1
                self._log(start, "DEFER", g.aid, f"si={k}")
                break
            self.grant_log.append(GrantLogEntry(k, g.aid, self._us(start), g.duration_us, g.basis))
            self._push(start, EventKind.SLOT_SERVICE, g.aid, (g_t, True))

    # -- one TXOP ----------------------------------------------------------

    def _next_report(self, st: _Station):
        if st.queue:
            return st.queue[0].size
        if st.next_gen_idx < len(st.gen_frames):
            return st.gen_frames[st.next_gen_idx].size
        return None

    def _exchange(self, st, qframe, t, slot_end, lead_sifs):
        """One data/ACK exchange inside a TXOP. Returns the tick after the
        exchange, or None if it does not fit before slot_end."""
        size = qframe.size if qframe is not None else 0
        d_t = self._data_ticks(size, st.op_rate)
        lead = self.sifs_t if lead_sifs else 0
        need = lead + d_t + self.sifs_t + self.ack_t + self.sifs_t
        if t + need > slot_end:
            return None
        data_end = t + lead + d_t
        ok = apply_channel(self.channel, qframe)
        if qframe is not None:
            st.queue.popleft()
        report = self._next_report(st)
        if ok:
            ap_on_data(self.ledger, st.aid, report)
            if qframe is not None:
                self.records.append(PacketRecord(
                    aid=st.aid,
                    sequence=qframe.index,
                    size_bytes=size,
                    gen_time_us=self._us(qframe.gen_tick),
                    rx_time_us=self._us(data_end + self.dp_t),
                ))
                self._log(data_end, "RX", st.aid, f"seq={qframe.index} size={size}")
        elif qframe is not None:
            self.n_lost += 1
            if qframe.gen_tick >= self.warmup_tick:
                self.n_lost_measured += 1
            self._log(data_end, "LOST", st.aid, f"seq={qframe.index} size={size}")
        else:
            self.n_null_lost += 1
        return t + need

    def _on_slot_service(self, tick, aid, payload):
        g_t, is_multipoll = payload
        st = self.stations[aid]
        slot_end = tick + g_t
        t = tick
        if not is_multipoll:
            t += self.poll_t
        first = True
        if not st.queue:
            # nothing pending: a header-only frame carries the size report
            self._exchange(st, None, t, slot_end, lead_sifs=not (is_multipoll and first))
            return
        while st.queue:
            nxt = self._exchange(st, st.queue[0], t, slot_end, lead_sifs=not (is_multipoll and first))
            if nxt is None:
                break
            t = nxt
            first = False


def run_scenario(scenario: Scenario) -> RunResult:
    """Simulate one scenario to completion. Deterministic in (scenario,
    seed): two calls yield identical records and grant logs."""
    return _Sim(scenario).run()
