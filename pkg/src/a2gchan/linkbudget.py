"""RF-chain bookkeeping: received power at the analyzer to path loss and back.

The budget, with the analyzer reading as the reference point::

    PL = P_tx - L_txcable + G_tx + G_rx + G_amp - L_rxcable - P_rx
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geodesy import (
    ORIGIN, GeodeticPosition, MountOrientation, RayGeometry, frame_angles, geodetic_to_enu,
    mount_matrix, ray_geometry, world_to_antenna_frame,
)
from .ingest import read_csv_table
from .patterns import AntennaPattern, gain_at
from .segmentation import HoverSegment

__all__ = [
    "SPEED_OF_LIGHT", "LinkBudgetConfig", "PathLossPoint", "fspl",
    "path_loss_from_power", "received_power", "rx_mount_for_yaw", "antenna_gains", "antenna_gains_arrays",
    "extract_path_loss", "write_pathloss_csv", "parse_pathloss_csv", "fmt9",
]

SPEED_OF_LIGHT = 299792458.0


def fmt9(x: float) -> str:
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class LinkBudgetConfig:
    tx_power_dbm: float = 22.0
    tx_cable_loss_db: float = 10.0
    rx_cable_loss_db: float = 2.5
    amplifier_gain_db: float = 55.0
    frequency_hz: float = 28e9
    tx_mount: MountOrientation = field(default_factory=lambda: MountOrientation(0.0, 15.0, 0.0))
    rx_mount: MountOrientation = field(default_factory=MountOrientation)

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValueError("frequency_hz must be positive")
        if self.tx_cable_loss_db < 0 or self.rx_cable_loss_db < 0:
            raise ValueError("cable losses must be non-negative")


def fspl(distance_m, frequency_hz):
    """Free-space path loss in dB, ``20 log10(4 pi d f / c)``."""
    d = np.asarray(distance_m, dtype=np.float64)
    if np.any(d <= 0) or frequency_hz <= 0:
        raise ValueError("distance and frequency must be positive")
    out = 20.0 * np.log10(4.0 * math.pi * d * frequency_hz / SPEED_OF_LIGHT)
    return float(out) if out.ndim == 0 else out


def path_loss_from_power(power_dbm, tx_gain_db, rx_gain_db, cfg: LinkBudgetConfig, amplifier_gain_db=None):
    amp = cfg.amplifier_gain_db if amplifier_gain_db is None else amplifier_gain_db
    return (cfg.tx_power_dbm - cfg.tx_cable_loss_db + tx_gain_db + rx_gain_db
            + amp - cfg.rx_cable_loss_db - power_dbm)


def received_power(path_loss_db, tx_gain_db, rx_gain_db, cfg: LinkBudgetConfig, amplifier_gain_db=None):
    amp = cfg.amplifier_gain_db if amplifier_gain_db is None else amplifier_gain_db
    return (cfg.tx_power_dbm - cfg.tx_cable_loss_db + tx_gain_db + rx_gain_db
            + amp - cfg.rx_cable_loss_db - path_loss_db)


def rx_mount_for_yaw(cfg: LinkBudgetConfig, yaw_deg: float | None) -> MountOrientation:
    """Receive-antenna orientation for a UAV heading; a missing yaw means nose-north."""
    m = cfg.rx_mount
    return MountOrientation(m.boresight_azimuth_deg + (yaw_deg or 0.0), m.uptilt_deg, m.roll_deg)


@dataclass(frozen=True)
class _Gains:
    tx_gain_db: float
    rx_gain_db: float
    tx_local: tuple[float, float]
    rx_local: tuple[float, float]


def antenna_gains(ray: RayGeometry, cfg: LinkBudgetConfig, tx_pattern: AntennaPattern,
                  rx_pattern: AntennaPattern, rx_mount: MountOrientation) -> _Gains:
    """Gains of both ends for a Tx->Rx ray; the receiver sees the reversed ray."""
    tx_local = world_to_antenna_frame(ray, cfg.tx_mount)
    rx_local = world_to_antenna_frame(ray.reversed(), rx_mount)
    return _Gains(gain_at(tx_pattern, *tx_local), gain_at(rx_pattern, *rx_local), tx_local, rx_local)


def antenna_gains_arrays(enu_rx: np.ndarray, cfg: LinkBudgetConfig, tx_pattern: AntennaPattern,
                         rx_pattern: AntennaPattern, rx_matrices: np.ndarray):
    """Vectorized gains for receiver positions ``enu_rx`` (N, 3) relative to the Tx.

    ``rx_matrices`` is one mount matrix or an (N, 3, 3) stack. Returns
    ``(distance, tx_gain, rx_gain)``.
    """
    d = np.linalg.norm(enu_rx, axis=1)
    unit = enu_rx / d[:, None]
    tx_local = np.einsum("ij,nj->ni", mount_matrix(cfg.tx_mount), unit)
    rx_local = np.einsum("...ij,...j->...i", rx_matrices, -unit)
    gtx = gain_at(tx_pattern, *frame_angles(tx_local))
    grx = gain_at(rx_pattern, *frame_angles(rx_local))
    return d, gtx, grx


@dataclass(frozen=True)
class PathLossPoint:
    distance3d_m: float
    path_loss_db: float
    tx_gain_db_applied: float
    rx_gain_db_applied: float
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    segment_id: int = 0
    mean_power_dbm: float = math.nan
    sample_count: int = 1
    yaw_assumed: bool = False


def extract_path_loss(segment: HoverSegment, tx_position: GeodeticPosition, cfg: LinkBudgetConfig,
                      tx_pattern: AntennaPattern, rx_pattern: AntennaPattern) -> PathLossPoint:
    """Calibrated path loss for one hover dwell."""
    ray = ray_geometry(ORIGIN, geodetic_to_enu(segment.centroid, tx_position))
    gains = antenna_gains(ray, cfg, tx_pattern, rx_pattern, rx_mount_for_yaw(cfg, segment.yaw_deg))
    pl = path_loss_from_power(segment.mean_power_dbm, gains.tx_gain_db, gains.rx_gain_db, cfg)
    return PathLossPoint(
        distance3d_m=ray.distance3d_m,
        path_loss_db=pl,
        tx_gain_db_applied=gains.tx_gain_db,
        rx_gain_db_applied=gains.rx_gain_db,
        azimuth_deg=ray.azimuth_deg,
        elevation_deg=ray.elevation_deg,
        segment_id=segment.segment_id,
        mean_power_dbm=segment.mean_power_dbm,
        sample_count=segment.sample_count,
        yaw_assumed=segment.yaw_deg is None,
    )


PATHLOSS_COLUMNS = ("d_m", "pl_db", "gtx_db", "grx_db", "az_deg", "el_deg", "segment_id")


def write_pathloss_csv(points, dest) -> None:
    buf = io.StringIO()
    buf.write(",".join(PATHLOSS_COLUMNS) + "\n")
    for p in points:
        vals = [p.distance3d_m, p.path_loss_db, p.tx_gain_db_applied, p.rx_gain_db_applied,
                p.azimuth_deg, p.elevation_deg]
        buf.write(",".join(fmt9(v) for v in vals) + f",{p.segment_id}\n")
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")


def parse_pathloss_csv(source) -> list[PathLossPoint]:
    return [
        PathLossPoint(row["d_m"], row["pl_db"], row["gtx_db"], row["grx_db"],
                      row["az_deg"], row["el_deg"], int(row["segment_id"]))
        for _, row in read_csv_table(source, PATHLOSS_COLUMNS)
    ]
