"""Synthetic measurement campaigns over a free-space (Friis) channel.

A flight visits each waypoint in a straight line at constant speed, hovers
for ``dwell_s`` and finally returns home. Received power is computed from the
*true* geometry and attitude; the logged track carries the GPS error model.

Random numbers come from numpy's PCG64 bit generator, which produces the same
stream on every platform for a given seed. Every draw is made whether or not
its error term is enabled, so switching one term on never reshuffles another.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import A2GError
from .geodesy import (
    EnuVector, GeodeticPosition, enu_to_ecef, enu_to_geodetic, geodetic_to_enu, mount_matrices,
)
from .ingest import FlightTrack, SampleSeries, fmt_exact, write_flight_log, write_samples
from .linkbudget import LinkBudgetConfig, antenna_gains_arrays, fspl
from .patterns import AntennaPattern, uniform_pattern
from .pipeline import ProcessOptions, process_flight
from .segmentation import WaypointMission, write_mission

__all__ = [
    "ErrorModel", "SimulationScenario", "SimulationResult", "simulate", "line_mission",
    "write_campaign", "RunOutcome", "MonteCarloSummary", "monte_carlo", "run_seed",
]


@dataclass(frozen=True)
class ErrorModel:
    gps_horizontal_sigma_m: float = 0.0  # per-flight constant bias, each horizontal axis
    gps_vertical_sigma_m: float = 0.0  # per-flight constant bias, vertical
    gps_bias_walk_sigma_mps: float = 0.0  # random-walk increment sigma per sqrt(second)
    gps_jitter_sigma_m: float = 0.0  # white noise per fix, all axes
    wind_drift_gain_per_m: float = 0.0  # hover offset (m) per metre of height
    yaw_jitter_sigma_deg: float = 0.0
    wobble_amplitude_deg: float = 0.0
    wobble_rate_hz: float = 0.0
    amp_droop_db_per_min: float = 0.0
    power_noise_sigma_db: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            if name.endswith("sigma_m") or name.endswith("sigma_deg") or name.endswith("sigma_db") \
                    or name.endswith("sigma_mps"):
                if value < 0:
                    raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class SimulationScenario:
    mission: WaypointMission
    tx_position: GeodeticPosition
    cfg: LinkBudgetConfig = field(default_factory=LinkBudgetConfig)
    tx_pattern: AntennaPattern = field(default_factory=uniform_pattern)
    rx_pattern: AntennaPattern = field(default_factory=uniform_pattern)
    error_model: ErrorModel = field(default_factory=ErrorModel)
    transit_speed_mps: float = 5.0
    dwell_s: float = 30.0
    sample_rate_hz: float = 9.0
    gps_rate_hz: float | None = None
    home: GeodeticPosition | None = None
    nominal_yaw_deg: float = 0.0
    wind_direction_deg: float = 90.0
    log_yaw: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not self.dwell_s > 0:
            raise ValueError("dwell_s must be positive")
        if not self.transit_speed_mps > 0:
            raise ValueError("transit_speed_mps must be positive")
        if self.gps_rate_hz is not None and not self.gps_rate_hz > 0:
            raise ValueError("gps_rate_hz must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def home_position(self) -> GeodeticPosition:
        if self.home is not None:
            return self.home
        first = self.mission.waypoints[0]
        return GeodeticPosition(first.latitude_deg, first.longitude_deg, self.tx_position.altitude_m)


def line_mission(tx_position: GeodeticPosition, bearing_deg: float = 0.0, start_m: float = 25.0,
                 spacing_m: float = 30.0, count: int = 11, height_m: float = 15.0,
                 dwell_s: float = 30.0) -> WaypointMission:
    """Waypoints on a straight line away from the transmitter at a fixed height."""
    b = math.radians(bearing_deg)
    wps = [
        enu_to_geodetic(EnuVector(r * math.sin(b), r * math.cos(b), height_m), tx_position)
        for r in (start_m + k * spacing_m for k in range(count))
    ]
    return WaypointMission(tuple(wps), dwell_s)


@dataclass(eq=False)
class SimulationResult:
    scenario: SimulationScenario
    true_track: FlightTrack
    reported_track: FlightTrack
    samples: SampleSeries
    truth_t_s: np.ndarray
    truth_distance_m: np.ndarray
    truth_path_loss_db: np.ndarray
    hover_windows: list[tuple[float, float]]


def _timeline(scn: SimulationScenario) -> tuple[np.ndarray, np.ndarray, list[tuple[float, float]]]:
    """Knot times and ENU knot positions of the piecewise-linear true trajectory."""
    tx = scn.tx_position
    wd = math.radians(scn.wind_direction_deg)
    wind_dir = np.array([math.sin(wd), math.cos(wd), 0.0])
    home = geodetic_to_enu(scn.home_position, tx).as_array()
    stops = []
    for wp in scn.mission.waypoints:
        p = geodetic_to_enu(wp, tx).as_array()
        stops.append(p + scn.error_model.wind_drift_gain_per_m * max(p[2], 0.0) * wind_dir)

    times, knots, windows = [0.0], [home], []
    t = 0.0
    for p in stops:
        t += float(np.linalg.norm(p - knots[-1])) / scn.transit_speed_mps
        times.append(t)
        knots.append(p)
        windows.append((t, t + scn.dwell_s))
        t += scn.dwell_s
        times.append(t)
        knots.append(p)
    t += float(np.linalg.norm(home - knots[-1])) / scn.transit_speed_mps
    times.append(t)
    knots.append(home)
    return np.array(times), np.array(knots), windows


def _positions(times: np.ndarray, knot_t: np.ndarray, knots: np.ndarray) -> np.ndarray:
    return np.stack([np.interp(times, knot_t, knots[:, k]) for k in range(3)], axis=1)


def _to_track(t: np.ndarray, enu: np.ndarray, tx: GeodeticPosition, yaw) -> FlightTrack:
    ecef = enu_to_ecef(enu, tx)
    lat, lon, alt = kernels.ecef_to_geodetic(ecef[:, 0], ecef[:, 1], ecef[:, 2])
    return FlightTrack(t, lat, lon, alt, yaw)


def simulate(scn: SimulationScenario) -> SimulationResult:
    em = scn.error_model
    cfg = scn.cfg
    rng = np.random.Generator(np.random.PCG64(int(scn.seed)))
    knot_t, knots, windows = _timeline(scn)
    t_end = knot_t[-1]

    ns = int(math.floor(t_end * scn.sample_rate_hz + 1e-9)) + 1
    t_samp = np.arange(ns) / scn.sample_rate_hz
    gps_rate = scn.gps_rate_hz or scn.sample_rate_hz
    ng = int(math.floor(t_end * gps_rate + 1e-9)) + 1
    t_gps = np.arange(ng) / gps_rate

    # fixed draw order: bias, walk, jitter, yaw jitter, power noise
    bias = rng.standard_normal(3) * np.array(
        [em.gps_horizontal_sigma_m, em.gps_horizontal_sigma_m, em.gps_vertical_sigma_m])
    steps = rng.standard_normal((ng, 3)) * em.gps_bias_walk_sigma_mps * math.sqrt(1.0 / gps_rate)
    steps[0] = 0.0
    walk = np.cumsum(steps, axis=0)
    jitter = rng.standard_normal((ng, 3)) * em.gps_jitter_sigma_m
    yaw_noise = rng.standard_normal(ns) * em.yaw_jitter_sigma_deg
    power_noise = rng.standard_normal(ns) * em.power_noise_sigma_db

    true_gps = _positions(t_gps, knot_t, knots)
    reported_gps = true_gps + bias + walk + jitter
    logged_yaw = np.full(ng, scn.nominal_yaw_deg % 360.0) if scn.log_yaw else None
    true_track = _to_track(t_gps, true_gps, scn.tx_position, logged_yaw)
    reported_track = _to_track(t_gps, reported_gps, scn.tx_position, logged_yaw)

    rx_enu = _positions(t_samp, knot_t, knots)
    wobble = em.wobble_amplitude_deg * np.sin(2.0 * math.pi * em.wobble_rate_hz * t_samp)
    wobble_q = em.wobble_amplitude_deg * np.cos(2.0 * math.pi * em.wobble_rate_hz * t_samp)
    m = cfg.rx_mount
    rx_mats = mount_matrices(m.boresight_azimuth_deg + scn.nominal_yaw_deg + yaw_noise,
                             np.clip(m.uptilt_deg + wobble_q, -90.0, 90.0),
                             m.roll_deg + wobble)
    d, gtx, grx = antenna_gains_arrays(rx_enu, cfg, scn.tx_pattern, scn.rx_pattern, rx_mats)
    if np.any(d == 0):
        raise A2GError("simulated trajectory passes through the transmitter")
    pl = fspl(d, cfg.frequency_hz)
    amp = cfg.amplifier_gain_db - em.amp_droop_db_per_min * t_samp / 60.0
    power = (cfg.tx_power_dbm - cfg.tx_cable_loss_db + gtx + grx + amp - cfg.rx_cable_loss_db
             - pl + power_noise)

    return SimulationResult(
        scenario=scn,
        true_track=true_track,
        reported_track=reported_track,
        samples=SampleSeries(t_samp, power),
        truth_t_s=t_samp,
        truth_distance_m=d,
        truth_path_loss_db=pl,
        hover_windows=windows,
    )


def write_campaign(result: SimulationResult, directory) -> dict[str, Path]:
    """Write track, true track, samples, mission and truth CSVs; returns the paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "track": out / "track.csv",
        "true_track": out / "true_track.csv",
        "samples": out / "samples.csv",
        "mission": out / "mission.csv",
        "truth": out / "truth.csv",
    }
    write_flight_log(result.reported_track, paths["track"])
    write_flight_log(result.true_track, paths["true_track"])
    write_samples(result.samples, paths["samples"])
    write_mission(result.scenario.mission, paths["mission"])
    lines = ["t_s,d_true_m,pl_true_db"]
    lines += [f"{fmt_exact(t)},{fmt_exact(d)},{fmt_exact(p)}"
              for t, d, p in zip(result.truth_t_s, result.truth_distance_m, result.truth_path_loss_db)]
    paths["truth"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths


# --- Monte Carlo ----------------------------------------------------------


def run_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed; depends only on (base seed, index), never on scheduling."""
    return int(np.random.SeedSequence([int(base_seed), int(run_index)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RunOutcome:
    run_index: int
    seed: int
    alpha: float = math.nan
    beta_excess_db: float = math.nan
    rmse_db: float = math.nan
    n_segments: int = 0
    error: str | None = None


def _one_run(args) -> RunOutcome:
    scn, index, base_seed, options = args
    seed = run_seed(base_seed, index)
    try:
        res = simulate(replace(scn, seed=seed))
        proc = process_flight(res.reported_track, res.samples, scn.tx_position, scn.cfg,
                              scn.tx_pattern, scn.rx_pattern, scn.mission, options)
    except A2GError as exc:
        return RunOutcome(index, seed, error=f"{type(exc).__name__}: {exc}")
    f = proc.fit
    return RunOutcome(index, seed, f.alpha, f.beta_excess_db, f.rmse_db, len(proc.segments))


def _stats(values: np.ndarray) -> dict:
    if values.size == 0:
        return {"mean": math.nan, "std": math.nan, "quantiles": {}}
    q = np.quantile(values, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {
        "mean": float(values.mean()),
        "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
        "min": float(values.min()),
        "max": float(values.max()),
        "quantiles": dict(zip(("q05", "q25", "q50", "q75", "q95"), (float(v) for v in q))),
    }


@dataclass
class MonteCarloSummary:
    runs: list[RunOutcome]
    base_seed: int

    def _ok(self) -> list[RunOutcome]:
        return [r for r in self.runs if r.error is None]

    @property
    def n_failed(self) -> int:
        return sum(r.error is not None for r in self.runs)

    def values(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self._ok()])

    def stats(self, name: str) -> dict:
        return _stats(self.values(name))

    def as_dict(self) -> dict:
        return {
            "base_seed": self.base_seed,
            "n_runs": len(self.runs),
            "n_failed": self.n_failed,
            "alpha": self.stats("alpha"),
            "beta_excess_db": self.stats("beta_excess_db"),
            "rmse_db": self.stats("rmse_db"),
            "failures": [{"run_index": r.run_index, "error": r.error} for r in self.runs if r.error],
        }


def monte_carlo(scenario: SimulationScenario, n_runs: int, base_seed: int | None = None,
                options: ProcessOptions = ProcessOptions(), workers: int = 1) -> MonteCarloSummary:
    """Simulate and process ``n_runs`` independent campaigns.

    Results are identical for any ``workers`` count. Pipeline failures are
    recorded per run instead of aborting the batch.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    base = int(scenario.seed if base_seed is None else base_seed)
    jobs = [(scenario, i, base, options) for i in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one_run, jobs, chunksize=max(1, n_runs // (4 * workers))))
    else:
        runs = [_one_run(j) for j in jobs]
    return MonteCarloSummary(runs, base)
