"""End-to-end processing of one flight: samples in, fitted path-loss model out."""

from __future__ import annotations

from dataclasses import dataclass, field

from .fitting import PathLossFit, fit_log_distance
from .geodesy import GeodeticPosition
from .ingest import FlightTrack, PositionedSamples, SampleSeries, align
from .linkbudget import LinkBudgetConfig, PathLossPoint, extract_path_loss
from .patterns import AntennaPattern
from .segmentation import HoverParams, HoverSegment, WaypointMission, detect_hovers, match_waypoints

__all__ = ["ProcessOptions", "ProcessResult", "process_flight"]


@dataclass(frozen=True)
class ProcessOptions:
    hover: HoverParams = field(default_factory=HoverParams)
    clock_offset_s: float = 0.0
    weighting: str = "none"
    mad_filter: bool = False


@dataclass
class ProcessResult:
    positioned: PositionedSamples
    segments: list[HoverSegment]
    points: list[PathLossPoint]
    fit: PathLossFit
    notes: list[str] = field(default_factory=list)


def process_flight(track: FlightTrack, samples: SampleSeries, tx_position: GeodeticPosition,
                   cfg: LinkBudgetConfig, tx_pattern: AntennaPattern, rx_pattern: AntennaPattern,
                   mission: WaypointMission | None = None,
                   options: ProcessOptions = ProcessOptions()) -> ProcessResult:
    positioned = align(track, samples, options.clock_offset_s)
    segments = detect_hovers(positioned, options.hover)
    if mission is not None:
        segments = match_waypoints(segments, mission)
    points = [extract_path_loss(s, tx_position, cfg, tx_pattern, rx_pattern) for s in segments]
    fit = fit_log_distance(points, cfg.frequency_hz, options.weighting, options.mad_filter)
    notes = []
    if positioned.dropped:
        notes.append(f"{positioned.dropped} samples outside the track span were dropped")
    if track.yaw_deg is None:
        notes.append("track has no yaw column: UAV assumed nose-north with zero roll and pitch")
    return ProcessResult(positioned, segments, points, fit, notes)
