#!/usr/bin/env python3
"""Synthesize the four VBR video traces shipped under traces/.

Each trace is 13100 frames at 25 fps in display order with a 12-frame
GOP (I BB P BB P BB P BB). Per-type levels plus uniform jitter give the
raw shape; an affine stretch around the mean is bisected until the
coefficient of variation lands on target after integer rounding and
clamping. Frame sums are then repaired so the mean is exact over three
segments ([0:750), [750:1000), [1000:13100)), which keeps windowed
statistics exact for any scenario measuring those prefixes, and the
largest frame is pinned to the advertised maximum.

Deterministic: fixed seeds, no environment dependence. Re-running must
reproduce the committed files byte for byte.
"""

import math
import random
import sys
from dataclasses import dataclass
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from hccasim.traces import load_trace, trace_stats  # noqa: E402

N_FRAMES = 13100
INTERVAL_MS = 40                      # 25 fps
SEGMENTS = (0, 750, 1000, N_FRAMES)
GOP = "IBBPBBPBBPBB"


@dataclass(frozen=True)
class TraceSpec:
    name: str
    seed: int
    levels: dict                      # type -> (level_bytes, jitter_bytes)
    mean: int                         # exact target mean [bytes]
    max: int                          # pinned maximum [bytes]
    cov: float                        # coefficient of variation target
    cov_tol: float                    # acceptance half-width (relative)


SPECS = (
    TraceSpec(
        name="jp1_high", seed=20011,
        levels={"I": (7450, 150), "P": (6600, 500), "B": (2324, 700)},
        mean=3820, max=7500, cov=0.59, cov_tol=0.02,
    ),
    TraceSpec(
        name="jp1_low", seed=20012,
        levels={"I": (1080, 20), "P": (950, 60), "B": (656, 80)},
        mean=765, max=1100, cov=0.22, cov_tol=0.15,
    ),
    TraceSpec(
        name="f1_high", seed=20013,
        levels={"I": (9700, 100), "P": (6000, 600), "B": (2838, 900)},
        mean=4200, max=9800, cov=0.42, cov_tol=0.15,
    ),
    TraceSpec(
        name="f1_low", seed=20014,
        levels={"I": (2550, 50), "P": (1800, 200), "B": (296, 150)},
        mean=860, max=2600, cov=0.65, cov_tol=0.15,
    ),
)


def frame_type(k):
    return GOP[k % len(GOP)]


def population_cov(sizes):
    n = len(sizes)
    mean = sum(sizes) / n
    var = sum((s - mean) ** 2 for s in sizes) / n
    return math.sqrt(var) / mean


def repair_segment(sizes, a, b, target_sum, cap, protect):
    """Nudge sizes in [a:b) by +-1 until the segment sums exactly to
    target_sum, keeping every value in [1, cap] and never touching the
    pinned index."""
    diff = target_sum - sum(sizes[a:b])
    step = 1 if diff > 0 else -1
    while diff != 0:
        moved = False
        for i in range(a, b):
            if diff == 0:
                break
            if i == protect:
                continue
            if step > 0 and sizes[i] < cap:
                room = cap - sizes[i]
            elif step < 0 and sizes[i] > 1:
                room = sizes[i] - 1
            else:
                continue
            take = min(room, abs(diff))
            # spread the correction: at most a per-pass quantum per frame
            take = min(take, max(1, abs(diff) // (b - a)))
            sizes[i] += step * take
            diff -= step * take
            moved = True
        if not moved:
            raise RuntimeError(f"segment [{a}:{b}) cannot absorb residual {diff}")


def build(spec, raw, stretch):
    center = sum(raw) / len(raw)
    sizes = [
        min(spec.max, max(1, round(spec.mean + stretch * (x - center))))
        for x in raw
    ]
    pin = max(range(len(sizes)), key=sizes.__getitem__)
    sizes[pin] = spec.max
    for a, b in zip(SEGMENTS, SEGMENTS[1:]):
        target = spec.mean * (b - a)
        repair_segment(sizes, a, b, target, spec.max, pin if a <= pin < b else -1)
    return sizes


def synthesize(spec):
    rng = random.Random(spec.seed)
    raw = []
    for k in range(N_FRAMES):
        level, jitter = spec.levels[frame_type(k)]
        raw.append(level + rng.uniform(-jitter, jitter))

    lo, hi = 0.05, 4.0
    sizes = None
    for _ in range(60):
        mid = (lo + hi) / 2
        sizes = build(spec, raw, mid)
        if population_cov(sizes) < spec.cov:
            lo = mid
        else:
            hi = mid

    got = population_cov(sizes)
    assert len(sizes) == N_FRAMES
    assert max(sizes) == spec.max, (spec.name, max(sizes))
    assert min(sizes) >= 1
    for a, b in zip(SEGMENTS, SEGMENTS[1:]):
        assert sum(sizes[a:b]) == spec.mean * (b - a), (spec.name, a, b)
    if abs(got - spec.cov) > spec.cov * spec.cov_tol:
        raise RuntimeError(f"{spec.name}: cov {got:.4f} outside target {spec.cov}")
    return sizes


def emit(spec, sizes):
    lines = [
        f"# {spec.name}: synthetic MPEG-4 VBR stream, 25 fps, GOP {GOP}",
        "# columns: seq type display_ms size_bytes",
    ]
    for k, size in enumerate(sizes):
        lines.append(f"{k} {frame_type(k)} {k * INTERVAL_MS} {size}")
    path = ROOT / "traces" / f"{spec.name}.txt"
    path.parent.mkdir(exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def main():
    print(f"{'trace':<10} {'mean':>6} {'cov':>7} {'max':>6} {'rate[bps]':>10}")
    for spec in SPECS:
        sizes = synthesize(spec)
        path = emit(spec, sizes)
        st = trace_stats(load_trace(path))
        assert st.mean_size == spec.mean
        print(
            f"{spec.name:<10} {float(st.mean_size):>6.0f} {st.cov:>7.4f} "
            f"{max(sizes):>6} {float(st.mean_bitrate):>10.1f}"
        )


if __name__ == "__main__":
    main()
