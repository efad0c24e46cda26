"""Hover-dwell detection, per-dwell power averaging and waypoint matching."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import EmptyInput, MalformedRow
from .geodesy import GeodeticPosition, ecef_to_geodetic, geodetic_to_ecef, geodetic_to_enu
from .ingest import PositionedSamples, fmt_exact, read_csv_table

__all__ = [
    "WaypointMission", "HoverParams", "HoverSegment",
    "parse_mission", "write_mission", "sample_speeds", "detect_hovers",
    "average_power", "average_power_db_domain", "match_waypoints", "circular_mean_deg",
]


@dataclass(frozen=True)
class WaypointMission:
    waypoints: tuple[GeodeticPosition, ...]
    dwell_s: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if not self.waypoints:
            raise ValueError("mission needs at least one waypoint")
        if self.dwell_s <= 0:
            raise ValueError("dwell_s must be positive")

    def __len__(self) -> int:
        return len(self.waypoints)


def parse_mission(source, dwell_s: float = 30.0) -> WaypointMission:
    """Read a mission-CSV (``lat_deg,lon_deg,alt_m``)."""
    wps = []
    for lineno, row in read_csv_table(source, ("lat_deg", "lon_deg", "alt_m")):
        try:
            wps.append(GeodeticPosition(row["lat_deg"], row["lon_deg"], row["alt_m"]))
        except ValueError as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
    if not wps:
        raise MalformedRow("mission file has no waypoints")
    return WaypointMission(tuple(wps), dwell_s)


def write_mission(mission: WaypointMission, dest) -> None:
    buf = io.StringIO()
    buf.write("lat_deg,lon_deg,alt_m\n")
    for wp in mission.waypoints:
        buf.write(f"{fmt_exact(wp.latitude_deg)},{fmt_exact(wp.longitude_deg)},{fmt_exact(wp.altitude_m)}\n")
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")


@dataclass(frozen=True)
class HoverParams:
    speed_threshold_mps: float = 0.5
    min_dwell_s: float = 10.0
    min_samples: int = 30
    median_window_s: float = 1.0


@dataclass(frozen=True)
class HoverSegment:
    start_s: float
    end_s: float
    centroid: GeodeticPosition
    mean_power_dbm: float
    sample_count: int
    mean_power_db_domain: float = math.nan
    yaw_deg: float | None = None
    first_index: int = 0
    segment_id: int = 0
    matched_waypoint: int | None = None
    drift_m: float | None = None

    @property
    def last_index(self) -> int:
        return self.first_index + self.sample_count - 1


def average_power(samples_dbm) -> float:
    """Mean received power: average in milliwatts, reported in dBm."""
    p = np.asarray(samples_dbm, dtype=np.float64)
    if p.size == 0:
        raise EmptyInput("cannot average an empty sample set")
    ref = p.max()
    return float(ref + 10.0 * np.log10(np.mean(10.0 ** ((p - ref) / 10.0))))


def average_power_db_domain(samples_dbm) -> float:
    p = np.asarray(samples_dbm, dtype=np.float64)
    if p.size == 0:
        raise EmptyInput("cannot average an empty sample set")
    return float(p.mean())


def circular_mean_deg(angles_deg) -> float:
    a = np.radians(np.asarray(angles_deg, dtype=np.float64))
    return math.degrees(math.atan2(np.sin(a).mean(), np.cos(a).mean())) % 360.0


def sample_speeds(positioned: PositionedSamples, median_window_s: float = 1.0) -> np.ndarray:
    """3D speed per sample: central difference of positions, then a moving median."""
    n = len(positioned)
    if n < 2:
        return np.zeros(n)
    x = positioned.ecef
    t = positioned.t_s
    lo = np.maximum(np.arange(n) - 1, 0)
    hi = np.minimum(np.arange(n) + 1, n - 1)
    dist = np.linalg.norm(x[hi] - x[lo], axis=1)
    dt = t[hi] - t[lo]
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(dt > 0, dist / np.where(dt > 0, dt, 1.0), np.where(dist > 0, np.inf, 0.0))
    if median_window_s <= 0:
        return raw
    return np.asarray(kernels.moving_median(t, raw, 0.5 * median_window_s))


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of consecutive True runs."""
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def detect_hovers(positioned: PositionedSamples, params: HoverParams = HoverParams()) -> list[HoverSegment]:
    """Maximal windows where smoothed speed stays under the threshold long enough.

    Samples outside the returned segments are treated as in-motion and
    discarded.
    """
    speeds = sample_speeds(positioned, params.median_window_s)
    segments = []
    for a, b in _runs(speeds < params.speed_threshold_mps):
        count = b - a + 1
        t0, t1 = float(positioned.t_s[a]), float(positioned.t_s[b])
        if count < params.min_samples or t1 - t0 < params.min_dwell_s or t1 <= t0:
            continue
        sl = slice(a, b + 1)
        pts = positioned.ecef[sl]
        # shifted mean keeps full precision at ECEF magnitudes
        centroid = ecef_to_geodetic(pts[0] + (pts - pts[0]).mean(axis=0))
        yaw = None if positioned.yaw_deg is None else circular_mean_deg(positioned.yaw_deg[sl])
        segments.append(HoverSegment(
            start_s=t0,
            end_s=t1,
            centroid=centroid,
            mean_power_dbm=average_power(positioned.p_dbm[sl]),
            sample_count=count,
            mean_power_db_domain=average_power_db_domain(positioned.p_dbm[sl]),
            yaw_deg=yaw,
            first_index=a,
            segment_id=len(segments),
        ))
    return segments


def match_waypoints(segments, mission: WaypointMission, max_distance_m: float | None = None) -> list[HoverSegment]:
    """Greedy in-order nearest-waypoint assignment, each waypoint used once.

    Nearest is judged in 3D; ``drift_m`` is the horizontal offset of the
    segment centroid from its waypoint.
    """
    wp_ecef = np.array([geodetic_to_ecef(w) for w in mission.waypoints])
    free = np.ones(len(mission), dtype=bool)
    out = []
    for seg in segments:
        if not free.any():
            out.append(replace(seg, matched_waypoint=None, drift_m=None))
            continue
        d = np.linalg.norm(wp_ecef - geodetic_to_ecef(seg.centroid), axis=1)
        d[~free] = np.inf
        k = int(np.argmin(d))
        if max_distance_m is not None and d[k] > max_distance_m:
            out.append(replace(seg, matched_waypoint=None, drift_m=None))
            continue
        free[k] = False
        off = geodetic_to_enu(seg.centroid, mission.waypoints[k])
        out.append(replace(seg, matched_waypoint=k, drift_m=math.hypot(off.east_m, off.north_m)))
    return out
