"""Flight-log and spectrum-analyzer sample files, and their time alignment.

track-CSV header ``t_s,lat_deg,lon_deg,alt_m[,yaw_deg]``; sample-CSV header
``t_s,p_dbm``. Both are UTF-8 with ``#`` comment lines.

Tracks and sample streams are held column-wise (numpy arrays) since flights
run to thousands of rows; indexing yields the per-row record types.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import EmptyTrack, MalformedRow, NonFinitePower, NonMonotoneTime, NoOverlap
from .geodesy import GeodeticPosition, geodetic_to_ecef_arrays

__all__ = [
    "FlightTrack", "MeasurementSample", "SampleSeries", "PositionedSample", "PositionedSamples",
    "parse_flight_log", "parse_samples", "write_flight_log", "write_samples", "align",
    "read_csv_table", "fmt_exact",
]

TRACK_COLUMNS = ("t_s", "lat_deg", "lon_deg", "alt_m")
SAMPLE_COLUMNS = ("t_s", "p_dbm")


def fmt_exact(x: float) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(x))


@dataclass(frozen=True)
class MeasurementSample:
    timestamp_s: float
    received_power_dbm: float


@dataclass(frozen=True)
class PositionedSample:
    sample: MeasurementSample
    position: GeodeticPosition
    yaw_deg: float | None = None


@dataclass(eq=False)
class FlightTrack:
    t_s: np.ndarray
    lat_deg: np.ndarray
    lon_deg: np.ndarray
    alt_m: np.ndarray
    yaw_deg: np.ndarray | None = None

    def __post_init__(self):
        self.t_s = np.asarray(self.t_s, dtype=np.float64)
        self.lat_deg = np.asarray(self.lat_deg, dtype=np.float64)
        self.lon_deg = np.asarray(self.lon_deg, dtype=np.float64)
        self.alt_m = np.asarray(self.alt_m, dtype=np.float64)
        if self.yaw_deg is not None:
            self.yaw_deg = np.asarray(self.yaw_deg, dtype=np.float64)
        n = self.t_s.size
        if n < 2:
            raise EmptyTrack(f"flight track needs at least 2 fixes, got {n}")
        cols = [self.lat_deg, self.lon_deg, self.alt_m] + ([self.yaw_deg] if self.yaw_deg is not None else [])
        if any(c.shape != (n,) for c in cols):
            raise ValueError("flight track columns differ in length")
        bad = np.flatnonzero(np.diff(self.t_s) < 0)
        if bad.size:
            k = int(bad[0]) + 1
            raise NonMonotoneTime(f"fix {k}: timestamp {self.t_s[k]} precedes {self.t_s[k - 1]}")

    def __len__(self) -> int:
        return self.t_s.size

    def position(self, i: int) -> GeodeticPosition:
        return GeodeticPosition(self.lat_deg[i], self.lon_deg[i], self.alt_m[i])

    def ecef(self) -> np.ndarray:
        return geodetic_to_ecef_arrays(self.lat_deg, self.lon_deg, self.alt_m)


@dataclass(eq=False)
class SampleSeries:
    t_s: np.ndarray
    p_dbm: np.ndarray

    def __post_init__(self):
        self.t_s = np.asarray(self.t_s, dtype=np.float64)
        self.p_dbm = np.asarray(self.p_dbm, dtype=np.float64)
        if self.t_s.shape != self.p_dbm.shape:
            raise ValueError("sample columns differ in length")

    def __len__(self) -> int:
        return self.t_s.size

    def __getitem__(self, i: int) -> MeasurementSample:
        return MeasurementSample(float(self.t_s[i]), float(self.p_dbm[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_samples(cls, samples) -> "SampleSeries":
        samples = list(samples)
        return cls([s.timestamp_s for s in samples], [s.received_power_dbm for s in samples])


@dataclass(eq=False)
class PositionedSamples:
    t_s: np.ndarray
    p_dbm: np.ndarray
    lat_deg: np.ndarray
    lon_deg: np.ndarray
    alt_m: np.ndarray
    ecef: np.ndarray
    yaw_deg: np.ndarray | None = None
    dropped: int = 0

    def __len__(self) -> int:
        return self.t_s.size

    def __getitem__(self, i: int) -> PositionedSample:
        return PositionedSample(
            MeasurementSample(float(self.t_s[i]), float(self.p_dbm[i])),
            GeodeticPosition(self.lat_deg[i], self.lon_deg[i], self.alt_m[i]),
            None if self.yaw_deg is None else float(self.yaw_deg[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def subset(self, sl) -> "PositionedSamples":
        return PositionedSamples(
            self.t_s[sl], self.p_dbm[sl], self.lat_deg[sl], self.lon_deg[sl], self.alt_m[sl],
            self.ecef[sl], None if self.yaw_deg is None else self.yaw_deg[sl], 0,
        )


# --- parsing --------------------------------------------------------------


def _read_text(source) -> str:
    """``source`` is a path (str or Path) or a text/binary stream."""
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_csv_table(source, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    """Yield ``(lineno, {column: float})`` for each data row of a headed CSV."""
    header = None
    for lineno, line in enumerate(_read_text(source).splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([stripped]))]
        if header is None:
            missing = [c for c in required if c not in cells]
            if missing:
                raise MalformedRow(f"line {lineno}: header lacks column(s) {', '.join(missing)}")
            unknown = [c for c in cells if c not in required and c not in optional]
            if unknown:
                raise MalformedRow(f"line {lineno}: unexpected column(s) {', '.join(unknown)}")
            header = cells
            continue
        if len(cells) != len(header):
            raise MalformedRow(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
        try:
            row = {name: float(cell) for name, cell in zip(header, cells)}
        except ValueError as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
        yield lineno, row
    if header is None:
        raise MalformedRow("missing header row")


def parse_flight_log(source) -> FlightTrack:
    rows = []
    has_yaw = None
    prev_t = -math.inf
    for lineno, row in read_csv_table(source, TRACK_COLUMNS, ("yaw_deg",)):
        if has_yaw is None:
            has_yaw = "yaw_deg" in row
        if not all(math.isfinite(v) for v in row.values()):
            raise MalformedRow(f"line {lineno}: non-finite value")
        if not -90.0 <= row["lat_deg"] <= 90.0:
            raise MalformedRow(f"line {lineno}: latitude {row['lat_deg']} out of range")
        if row["t_s"] < prev_t:
            raise NonMonotoneTime(f"line {lineno}: timestamp {row['t_s']} precedes {prev_t}")
        prev_t = row["t_s"]
        rows.append(row)
    if not rows:
        raise EmptyTrack("flight log contains no fixes")
    lon = np.array([r["lon_deg"] for r in rows])
    out = (lon < -180.0) | (lon >= 180.0)
    lon[out] = (lon[out] + 180.0) % 360.0 - 180.0
    return FlightTrack(
        t_s=np.array([r["t_s"] for r in rows]),
        lat_deg=np.array([r["lat_deg"] for r in rows]),
        lon_deg=lon,
        alt_m=np.array([r["alt_m"] for r in rows]),
        yaw_deg=np.array([r["yaw_deg"] for r in rows]) % 360.0 if has_yaw else None,
    )


def parse_samples(source) -> SampleSeries:
    """Parse a sample-CSV; rows are returned in time order (stable sort)."""
    t, p = [], []
    for lineno, row in read_csv_table(source, SAMPLE_COLUMNS):
        if not math.isfinite(row["t_s"]):
            raise MalformedRow(f"line {lineno}: non-finite timestamp")
        if not math.isfinite(row["p_dbm"]):
            raise NonFinitePower(f"line {lineno}: received power {row['p_dbm']} is not finite")
        t.append(row["t_s"])
        p.append(row["p_dbm"])
    t_arr, p_arr = np.array(t), np.array(p)
    order = np.argsort(t_arr, kind="stable")
    return SampleSeries(t_arr[order], p_arr[order])


def _write(dest, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def write_flight_log(track: FlightTrack, dest) -> None:
    buf = io.StringIO()
    cols = list(TRACK_COLUMNS) + (["yaw_deg"] if track.yaw_deg is not None else [])
    buf.write(",".join(cols) + "\n")
    for i in range(len(track)):
        vals = [track.t_s[i], track.lat_deg[i], track.lon_deg[i], track.alt_m[i]]
        if track.yaw_deg is not None:
            vals.append(track.yaw_deg[i])
        buf.write(",".join(fmt_exact(v) for v in vals) + "\n")
    _write(dest, buf.getvalue())


def write_samples(samples: SampleSeries, dest) -> None:
    buf = io.StringIO()
    buf.write("t_s,p_dbm\n")
    for t, p in zip(samples.t_s, samples.p_dbm):
        buf.write(f"{fmt_exact(t)},{fmt_exact(p)}\n")
    _write(dest, buf.getvalue())


# --- alignment ------------------------------------------------------------


def align(track: FlightTrack, samples: SampleSeries, clock_offset_s: float = 0.0) -> PositionedSamples:
    """Attach an interpolated position (and yaw) to every sample inside the track span.

    ``clock_offset_s`` is added to sample timestamps before matching. Positions
    are interpolated linearly in ECEF between the bracketing fixes; yaw takes
    the shorter arc. Samples outside the track span are dropped and counted.
    """
    if len(samples) == 0:
        raise NoOverlap("no samples to align")
    ts = samples.t_s + clock_offset_s
    tt = track.t_s
    inside = (ts >= tt[0]) & (ts <= tt[-1])
    if not inside.any():
        raise NoOverlap(
            f"sample times [{ts[0]}, {ts[-1]}] do not overlap track span [{tt[0]}, {tt[-1]}]")
    ts = ts[inside]
    power = samples.p_dbm[inside]
    n = len(track)

    k = np.clip(np.searchsorted(tt, ts, side="right") - 1, 0, n - 2)
    dt = tt[k + 1] - tt[k]
    w = np.where(dt > 0, (ts - tt[k]) / np.where(dt > 0, dt, 1.0), 1.0)
    w = np.clip(w, 0.0, 1.0)

    fix_ecef = track.ecef()
    ecef = (1.0 - w)[:, None] * fix_ecef[k] + w[:, None] * fix_ecef[k + 1]
    lat, lon, alt = kernels.ecef_to_geodetic(ecef[:, 0], ecef[:, 1], ecef[:, 2])
    lat, lon, alt = np.array(lat), np.array(lon), np.array(alt)
    for weight, idx in ((0.0, k), (1.0, k + 1)):
        hit = w == weight
        lat[hit] = track.lat_deg[idx[hit]]
        lon[hit] = track.lon_deg[idx[hit]]
        alt[hit] = track.alt_m[idx[hit]]
        ecef[hit] = fix_ecef[idx[hit]]

    yaw = None
    if track.yaw_deg is not None:
        y0 = track.yaw_deg[k]
        delta = (track.yaw_deg[k + 1] - y0 + 180.0) % 360.0 - 180.0
        yaw = (y0 + w * delta) % 360.0

    return PositionedSamples(ts, power, lat, lon, alt, ecef, yaw, dropped=int((~inside).sum()))
