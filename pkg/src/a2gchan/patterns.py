"""Measured antenna radiation patterns on an (azimuth, elevation) grid.

Gains are stored and interpolated in dBi. Azimuth is periodic; elevation
queries beyond the grid clamp to the nearest edge row.

pattern-CSV layout::

    # comment lines start with '#'
    el_deg,-90,-45,0,45,90
    0,1.0,2.0,...
    90,...

The first cell of the header is a label; the remaining header cells are the
elevation grid. Each data row is an azimuth followed by one gain per
elevation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import GridMismatch, MalformedGrid, NonFiniteGain, RaggedRows

__all__ = [
    "AntennaPattern", "PatternStats", "PatternDiff",
    "load_pattern", "write_pattern", "gain_at", "pattern_stats", "pattern_diff",
    "uniform_pattern", "horn_pattern", "omni_pattern", "airframe_pattern", "builtin_pattern",
]


def _check_axis(values: np.ndarray, name: str) -> None:
    if values.ndim != 1 or values.size < 2:
        raise MalformedGrid(f"{name} grid needs at least 2 points, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise MalformedGrid(f"{name} grid contains non-finite values")
    steps = np.diff(values)
    if np.any(steps <= 0):
        k = int(np.argmax(steps <= 0)) + 1
        raise MalformedGrid(f"{name} grid not strictly increasing at index {k} ({values[k - 1]} -> {values[k]})")


@dataclass(frozen=True, eq=False)
class AntennaPattern:
    azimuth_grid_deg: np.ndarray
    elevation_grid_deg: np.ndarray
    gain_dbi: np.ndarray
    label: str = ""

    def __post_init__(self):
        az = np.array(self.azimuth_grid_deg, dtype=np.float64)
        el = np.array(self.elevation_grid_deg, dtype=np.float64)
        g = np.array(self.gain_dbi, dtype=np.float64)
        _check_axis(az, "azimuth")
        _check_axis(el, "elevation")
        if az[0] < 0.0 or az[-1] >= 360.0:
            raise MalformedGrid(f"azimuth grid must lie in [0, 360), got [{az[0]}, {az[-1]}]")
        if el[0] < -90.0 or el[-1] > 90.0:
            raise MalformedGrid(f"elevation grid must lie in [-90, 90], got [{el[0]}, {el[-1]}]")
        if g.shape != (az.size, el.size):
            raise RaggedRows(f"gain matrix shape {g.shape} does not match grid ({az.size}, {el.size})")
        if not np.all(np.isfinite(g)):
            i, j = np.argwhere(~np.isfinite(g))[0]
            raise NonFiniteGain(f"non-finite gain at azimuth {az[i]}, elevation {el[j]}")
        for arr in (az, el, g):
            arr.setflags(write=False)
        object.__setattr__(self, "azimuth_grid_deg", az)
        object.__setattr__(self, "elevation_grid_deg", el)
        object.__setattr__(self, "gain_dbi", g)

    def gain_at(self, azimuth_deg, elevation_deg):
        return gain_at(self, azimuth_deg, elevation_deg)

    def same_grid(self, other: "AntennaPattern") -> bool:
        return (np.array_equal(self.azimuth_grid_deg, other.azimuth_grid_deg)
                and np.array_equal(self.elevation_grid_deg, other.elevation_grid_deg))


def load_pattern(source, label: str | None = None) -> AntennaPattern:
    """Parse a pattern-CSV from a path or a binary/text stream."""
    text, default_label = _read_text(source)
    header: list[float] | None = None
    az: list[float] = []
    rows: list[list[float]] = []
    for lineno, cells in _csv_rows(text):
        if header is None:
            try:
                header = [float(c) for c in cells[1:]]
            except ValueError as exc:
                raise MalformedGrid(f"line {lineno}: bad elevation header ({exc})") from None
            continue
        if len(cells) != len(header) + 1:
            raise RaggedRows(f"line {lineno}: expected {len(header) + 1} columns, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise MalformedGrid(f"line {lineno}: {exc}") from None
        for col, v in enumerate(values[1:], start=2):
            if not math.isfinite(v):
                raise NonFiniteGain(f"line {lineno}, column {col}: gain {cells[col - 1]!r} is not finite")
        if az and values[0] <= az[-1]:
            raise MalformedGrid(f"line {lineno}: azimuth {values[0]} not greater than previous {az[-1]}")
        az.append(values[0])
        rows.append(values[1:])
    if header is None:
        raise MalformedGrid("pattern file has no header row")
    return AntennaPattern(np.array(az), np.array(header), np.array(rows).reshape(len(az), len(header)),
                          label if label is not None else default_label)


def _read_text(source) -> tuple[str, str]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        return path.read_text(encoding="utf-8"), path.stem
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, ""


def _csv_rows(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, [c.strip() for c in next(csv.reader([stripped]))]


def write_pattern(pattern: AntennaPattern, dest) -> None:
    buf = io.StringIO()
    if pattern.label:
        buf.write(f"# {pattern.label}\n")
    buf.write(",".join(["el_deg"] + [repr(float(e)) for e in pattern.elevation_grid_deg]) + "\n")
    for a, row in zip(pattern.azimuth_grid_deg, pattern.gain_dbi):
        buf.write(",".join([repr(float(a))] + [repr(float(g)) for g in row]) + "\n")
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")


def gain_at(pattern: AntennaPattern, azimuth_deg, elevation_deg):
    """Bilinear gain in dBi; scalars in give a float, arrays in give an array."""
    scalar = np.ndim(azimuth_deg) == 0 and np.ndim(elevation_deg) == 0
    az, el = np.broadcast_arrays(np.asarray(azimuth_deg, dtype=np.float64),
                                 np.asarray(elevation_deg, dtype=np.float64))
    out = kernels.bilinear_periodic(pattern.azimuth_grid_deg, pattern.elevation_grid_deg,
                                    pattern.gain_dbi, az.ravel(), el.ravel())
    if scalar:
        return float(out[0])
    return np.asarray(out).reshape(az.shape)


@dataclass(frozen=True)
class PatternStats:
    max_gain_dbi: float
    argmax_azimuth_deg: float
    argmax_elevation_deg: float
    min_gain_dbi: float
    argmin_azimuth_deg: float
    argmin_elevation_deg: float
    front_to_back_db: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def pattern_stats(pattern: AntennaPattern) -> PatternStats:
    """Extrema over grid nodes. Front-to-back compares the peak with the
    direction opposite to it (azimuth + 180, mirrored elevation)."""
    g = pattern.gain_dbi
    imax, jmax = np.unravel_index(int(np.argmax(g)), g.shape)
    imin, jmin = np.unravel_index(int(np.argmin(g)), g.shape)
    az_max = float(pattern.azimuth_grid_deg[imax])
    el_max = float(pattern.elevation_grid_deg[jmax])
    back = gain_at(pattern, az_max + 180.0, -el_max)
    return PatternStats(
        max_gain_dbi=float(g[imax, jmax]),
        argmax_azimuth_deg=az_max,
        argmax_elevation_deg=el_max,
        min_gain_dbi=float(g[imin, jmin]),
        argmin_azimuth_deg=float(pattern.azimuth_grid_deg[imin]),
        argmin_elevation_deg=float(pattern.elevation_grid_deg[jmin]),
        front_to_back_db=float(g[imax, jmax]) - back,
    )


@dataclass(frozen=True, eq=False)
class PatternDiff:
    azimuth_grid_deg: np.ndarray
    elevation_grid_deg: np.ndarray
    difference_db: np.ndarray
    mean_db: float
    mean_abs_db: float
    max_abs_db: float
    worst_azimuth_deg: float
    worst_elevation_deg: float

    def summary(self) -> dict:
        return {
            "mean_db": self.mean_db,
            "mean_abs_db": self.mean_abs_db,
            "max_abs_db": self.max_abs_db,
            "worst_azimuth_deg": self.worst_azimuth_deg,
            "worst_elevation_deg": self.worst_elevation_deg,
        }


def pattern_diff(a: AntennaPattern, b: AntennaPattern) -> PatternDiff:
    """Elementwise ``a - b`` on identical grids."""
    if not a.same_grid(b):
        raise GridMismatch(f"patterns {a.label!r} and {b.label!r} are sampled on different grids")
    d = a.gain_dbi - b.gain_dbi
    absd = np.abs(d)
    i, j = np.unravel_index(int(np.argmax(absd)), d.shape)
    return PatternDiff(
        azimuth_grid_deg=a.azimuth_grid_deg,
        elevation_grid_deg=a.elevation_grid_deg,
        difference_db=d,
        mean_db=float(d.mean()),
        mean_abs_db=float(absd.mean()),
        max_abs_db=float(absd[i, j]),
        worst_azimuth_deg=float(a.azimuth_grid_deg[i]),
        worst_elevation_deg=float(a.elevation_grid_deg[j]),
    )


# --- synthetic patterns ---------------------------------------------------
# Stand-ins for chamber files when none are available (simulation, demos).


def _grid(az_step: float, el_step: float) -> tuple[np.ndarray, np.ndarray]:
    az = np.arange(0.0, 360.0, az_step)
    el = np.linspace(-90.0, 90.0, int(round(180.0 / el_step)) + 1)
    return az, el


def uniform_pattern(gain_dbi: float = 0.0, az_step: float = 30.0, el_step: float = 30.0,
                    label: str = "isotropic") -> AntennaPattern:
    az, el = _grid(az_step, el_step)
    return AntennaPattern(az, el, np.full((az.size, el.size), float(gain_dbi)), label)


def horn_pattern(peak_gain_dbi: float = 14.7, hpbw_deg: float = 35.0, max_attenuation_db: float = 30.0,
                 az_step: float = 5.0, el_step: float = 5.0, label: str = "horn") -> AntennaPattern:
    """Rotationally symmetric parabolic-in-dB main lobe around local (0, 0)."""
    az, el = _grid(az_step, el_step)
    A, E = np.meshgrid(np.radians(az), np.radians(el), indexing="ij")
    off = np.degrees(np.arccos(np.clip(np.cos(E) * np.cos(A), -1.0, 1.0)))
    att = np.minimum(12.0 * (off / hpbw_deg) ** 2, max_attenuation_db)
    return AntennaPattern(az, el, peak_gain_dbi - att, label)


def omni_pattern(peak_gain_dbi: float = 2.1, elevation_hpbw_deg: float = 40.0, max_attenuation_db: float = 20.0,
                 az_step: float = 5.0, el_step: float = 5.0, label: str = "omni") -> AntennaPattern:
    """Azimuth-uniform pattern peaking on the local horizontal."""
    az, el = _grid(az_step, el_step)
    att = np.minimum(12.0 * (el / elevation_hpbw_deg) ** 2, max_attenuation_db)
    return AntennaPattern(az, el, np.tile(peak_gain_dbi - att, (az.size, 1)), label)


def airframe_pattern(base: AntennaPattern, notches=((225.0, 10.0, 15.0), (10.0, 5.0, 10.0), (190.0, 2.0, 10.0)),
                     label: str = "omni-on-uav") -> AntennaPattern:
    """Carve Gaussian azimuth notches ``(center_deg, depth_db, sigma_deg)`` into ``base``.

    The defaults are illustrative: a deep gimbal shadow near 225 deg and
    weaker landing-gear dips near 10 and 190 deg.
    """
    g = base.gain_dbi.copy()
    for center, depth, sigma in notches:
        delta = (base.azimuth_grid_deg - center + 180.0) % 360.0 - 180.0
        g -= depth * np.exp(-0.5 * (delta / sigma) ** 2)[:, None]
    return AntennaPattern(base.azimuth_grid_deg, base.elevation_grid_deg, g, label)


def builtin_pattern(name: str) -> AntennaPattern:
    """Resolve ``isotropic``, ``horn``, ``omni`` or ``omni-on-uav``."""
    if name == "isotropic":
        return uniform_pattern(0.0)
    if name == "horn":
        return horn_pattern()
    if name == "omni":
        return omni_pattern()
    if name == "omni-on-uav":
        return airframe_pattern(omni_pattern())
    raise KeyError(f"unknown builtin pattern {name!r}")
