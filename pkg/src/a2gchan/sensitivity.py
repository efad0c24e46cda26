"""How position and attitude errors turn into path-loss offsets.

Convention: the UAV is really at ``nominal + displacement`` (or flies with a
perturbed attitude) while processing assumes the nominal values. The
resulting path-loss error splits into three parts::

    pl_offset = [fspl(d_true) - fspl(d_nominal)]          fspl term
              + [G_tx(nominal) - G_tx(true)]              tx gain error
              + [G_rx(nominal) - G_rx(true)]              rx gain error

A gain error is the gain the processing credits minus the gain the link
actually had.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass
from pathlib import Path

from .geodesy import ORIGIN, EnuVector, GeodeticPosition, MountOrientation, geodetic_to_enu, ray_geometry
from .ingest import read_csv_table
from .linkbudget import LinkBudgetConfig, antenna_gains, fmt9, fspl, rx_mount_for_yaw
from .patterns import AntennaPattern, uniform_pattern

__all__ = [
    "SensitivityEntry", "SensitivityReport", "default_displacements",
    "position_sensitivity", "attitude_sensitivity", "write_sensitivity_csv", "parse_sensitivity_csv",
]

DEFAULT_MAGNITUDES_M = (0.5, 1.0, 2.0, 3.0, 5.0, 10.0)


@dataclass(frozen=True)
class SensitivityEntry:
    kind: str
    displacement: EnuVector
    yaw_error_deg: float
    roll_error_deg: float
    fspl_term_db: float
    tx_gain_error_db: float
    rx_gain_error_db: float
    pl_offset_db: float


@dataclass(frozen=True)
class SensitivityReport:
    entries: tuple[SensitivityEntry, ...]
    nominal_distance_m: float
    nominal_azimuth_deg: float
    nominal_elevation_deg: float

    @property
    def worst(self) -> SensitivityEntry:
        return max(self.entries, key=lambda e: abs(e.pl_offset_db))

    def worst_for_magnitude(self, magnitude_m: float, tol: float = 1e-9) -> SensitivityEntry:
        hits = [e for e in self.entries if abs(e.displacement.norm() - magnitude_m) <= tol]
        if not hits:
            raise KeyError(f"no displacement of magnitude {magnitude_m} m in report")
        return max(hits, key=lambda e: abs(e.pl_offset_db))

    def summary_table(self) -> str:
        head = (f"nominal range {self.nominal_distance_m:.2f} m, azimuth {self.nominal_azimuth_deg:.1f} deg, "
                f"elevation {self.nominal_elevation_deg:.1f} deg")
        cols = f"{'kind':<9}{'dE':>7}{'dN':>7}{'dU':>7}{'yaw':>7}{'roll':>7}{'fspl':>9}{'tx':>9}{'rx':>9}{'PL off':>9}"
        lines = [head, cols, "-" * len(cols)]
        for e in self.entries:
            d = e.displacement
            lines.append(f"{e.kind:<9}{d.east_m:7.1f}{d.north_m:7.1f}{d.up_m:7.1f}{e.yaw_error_deg:7.1f}"
                         f"{e.roll_error_deg:7.1f}{e.fspl_term_db:9.3f}{e.tx_gain_error_db:9.3f}"
                         f"{e.rx_gain_error_db:9.3f}{e.pl_offset_db:9.3f}")
        w = self.worst
        lines.append(f"worst case: {w.pl_offset_db:+.3f} dB ({w.kind}, "
                     f"d=({w.displacement.east_m}, {w.displacement.north_m}, {w.displacement.up_m}) m, "
                     f"yaw {w.yaw_error_deg} deg, roll {w.roll_error_deg} deg)")
        return "\n".join(lines) + "\n"


def default_displacements(magnitudes=DEFAULT_MAGNITUDES_M) -> list[EnuVector]:
    """The zero vector, then +/- each magnitude along east, north and up."""
    out = [EnuVector(0.0, 0.0, 0.0)]
    for axis in range(3):
        for mag in magnitudes:
            for sign in (1.0, -1.0):
                v = [0.0, 0.0, 0.0]
                v[axis] = sign * mag
                out.append(EnuVector(*v))
    return out


def position_sensitivity(tx_position: GeodeticPosition, nominal_rx: GeodeticPosition, displacements,
                         cfg: LinkBudgetConfig, tx_pattern: AntennaPattern, rx_pattern: AntennaPattern,
                         rx_yaw_deg: float | None = None) -> SensitivityReport:
    nominal = geodetic_to_enu(nominal_rx, tx_position)
    rx_mount = rx_mount_for_yaw(cfg, rx_yaw_deg)
    ray0 = ray_geometry(ORIGIN, nominal)
    g0 = antenna_gains(ray0, cfg, tx_pattern, rx_pattern, rx_mount)
    pl0 = fspl(ray0.distance3d_m, cfg.frequency_hz)
    entries = []
    for delta in displacements:
        ray = ray_geometry(ORIGIN, nominal + delta)
        g = antenna_gains(ray, cfg, tx_pattern, rx_pattern, rx_mount)
        f = fspl(ray.distance3d_m, cfg.frequency_hz) - pl0
        tx_err = g0.tx_gain_db - g.tx_gain_db
        rx_err = g0.rx_gain_db - g.rx_gain_db
        entries.append(SensitivityEntry("position", delta, 0.0, 0.0, f, tx_err, rx_err, f + tx_err + rx_err))
    return SensitivityReport(tuple(entries), ray0.distance3d_m, ray0.azimuth_deg, ray0.elevation_deg)


def attitude_sensitivity(tx_position: GeodeticPosition, rx_position: GeodeticPosition, cfg: LinkBudgetConfig,
                         rx_pattern: AntennaPattern, yaw_errors_deg=(0.0,), roll_errors_deg=(0.0,),
                         rx_yaw_deg: float | None = None,
                         tx_pattern: AntennaPattern | None = None) -> SensitivityReport:
    """Receive-gain error for every (yaw error, roll error) pair at a fixed position."""
    tx_pattern = tx_pattern or uniform_pattern(0.0)
    ray = ray_geometry(ORIGIN, geodetic_to_enu(rx_position, tx_position))
    base = rx_mount_for_yaw(cfg, rx_yaw_deg)
    g0 = antenna_gains(ray, cfg, tx_pattern, rx_pattern, base)
    zero = EnuVector(0.0, 0.0, 0.0)
    entries = []
    for yaw_err, roll_err in itertools.product(yaw_errors_deg, roll_errors_deg):
        mount = MountOrientation(base.boresight_azimuth_deg + yaw_err, base.uptilt_deg, base.roll_deg + roll_err)
        g = antenna_gains(ray, cfg, tx_pattern, rx_pattern, mount)
        rx_err = g0.rx_gain_db - g.rx_gain_db
        entries.append(SensitivityEntry("attitude", zero, float(yaw_err), float(roll_err), 0.0, 0.0, rx_err, rx_err))
    return SensitivityReport(tuple(entries), ray.distance3d_m, ray.azimuth_deg, ray.elevation_deg)


SENSITIVITY_COLUMNS = ("kind", "de_m", "dn_m", "du_m", "yaw_err_deg", "roll_err_deg",
                       "fspl_term_db", "tx_gain_error_db", "rx_gain_error_db", "pl_offset_db")
_KINDS = {"position": 0, "attitude": 1}


def write_sensitivity_csv(reports, dest) -> None:
    """``kind`` is written as 0 (position) or 1 (attitude) so every column is numeric."""
    if isinstance(reports, SensitivityReport):
        reports = [reports]
    buf = io.StringIO()
    buf.write("# kind: 0=position 1=attitude\n")
    buf.write(",".join(SENSITIVITY_COLUMNS) + "\n")
    for rep in reports:
        for e in rep.entries:
            d = e.displacement
            vals = [d.east_m, d.north_m, d.up_m, e.yaw_error_deg, e.roll_error_deg,
                    e.fspl_term_db, e.tx_gain_error_db, e.rx_gain_error_db, e.pl_offset_db]
            buf.write(f"{_KINDS[e.kind]}," + ",".join(fmt9(v) for v in vals) + "\n")
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")


def parse_sensitivity_csv(source) -> list[SensitivityEntry]:
    names = {v: k for k, v in _KINDS.items()}
    out = []
    for _, r in read_csv_table(source, SENSITIVITY_COLUMNS):
        out.append(SensitivityEntry(
            names[int(r["kind"])], EnuVector(r["de_m"], r["dn_m"], r["du_m"]), r["yaw_err_deg"],
            r["roll_err_deg"], r["fspl_term_db"], r["tx_gain_error_db"], r["rx_gain_error_db"], r["pl_offset_db"]))
    return out
