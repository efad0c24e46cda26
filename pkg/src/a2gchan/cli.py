"""Command-line front end: ``a2gchan {process,simulate,montecarlo,sensitivity,pattern}``.

Each subcommand reads an INI file. Command-line flags override keys in the
file, which override built-in defaults. Failures print a one-line JSON error
object on stderr and exit with a category-specific status.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import Settings, load_settings
from .errors import A2GError, ConfigError
from .fitting import fit_report, round9, write_fit_json, write_plotdata_csv
from .geodesy import EnuVector, GeodeticPosition, enu_to_geodetic
from .ingest import fmt_exact, parse_flight_log, parse_samples
from .kernels import BACKEND
from .linkbudget import fmt9, write_pathloss_csv
from .patterns import AntennaPattern, builtin_pattern, load_pattern, pattern_diff, pattern_stats, write_pattern
from .pipeline import ProcessOptions, process_flight
from .segmentation import parse_mission
from .sensitivity import (
    DEFAULT_MAGNITUDES_M, attitude_sensitivity, default_displacements, position_sensitivity, write_sensitivity_csv,
)
from .simulator import SimulationScenario, line_mission, monte_carlo, simulate, write_campaign

__all__ = ["main", "build_parser", "EXIT_CODES"]

EXIT_CODES = {
    "config": 2,
    "ingest": 3,
    "pattern": 3,
    "geometry": 4,
    "segmentation": 4,
    "fit": 4,
    "io": 5,
    "internal": 1,
}

RUNS_COLUMNS = ("run_index", "seed", "alpha", "beta_excess_db", "rmse_db", "n_segments", "failed")


# --- helpers ------------------------------------------------------------


def _json_text(obj) -> str:
    return json.dumps(round9(obj), indent=2) + "\n"


def _out_dir(s: Settings, default: str) -> Path:
    out = s.path("output", "directory", default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _options(s: Settings) -> ProcessOptions:
    weighting = s.get("fit", "weighting", "none", kind=str)
    if weighting not in ("none", "samples"):
        raise ConfigError(f"fit.weighting must be 'none' or 'samples', got {weighting!r}")
    return ProcessOptions(
        hover=s.hover_params(),
        clock_offset_s=s.get("segmentation", "clock_offset_s", 0.0),
        weighting=weighting,
        mad_filter=s.get("fit", "mad_filter", False, kind=bool),
    )


def _scenario(s: Settings) -> SimulationScenario:
    tx = s.tx_position()
    cfg = s.link_budget()
    dwell = s.get("scenario", "dwell_s", 30.0)
    if s.has("mission", "file"):
        mission = parse_mission(s.input_path("mission", "file"), dwell)
    else:
        mission = line_mission(
            tx,
            bearing_deg=s.get("mission", "bearing_deg", cfg.tx_mount.boresight_azimuth_deg),
            start_m=s.get("mission", "start_m", 25.0),
            spacing_m=s.get("mission", "spacing_m", 30.0),
            count=s.get("mission", "count", 11, kind=int),
            height_m=s.get("mission", "height_m", 15.0),
            dwell_s=dwell,
        )
    try:
        return SimulationScenario(
            mission=mission,
            tx_position=tx,
            cfg=cfg,
            tx_pattern=s.pattern("tx", "builtin:isotropic"),
            rx_pattern=s.pattern("rx", "builtin:isotropic"),
            error_model=s.error_model(),
            transit_speed_mps=s.get("scenario", "transit_speed_mps", 5.0),
            dwell_s=dwell,
            sample_rate_hz=s.get("scenario", "sample_rate_hz", 9.0),
            gps_rate_hz=s.get("scenario", "gps_rate_hz", None),
            nominal_yaw_deg=s.get("scenario", "nominal_yaw_deg", 0.0),
            wind_direction_deg=s.get("scenario", "wind_direction_deg", 90.0),
            log_yaw=s.get("scenario", "log_yaw", True, kind=bool),
            seed=s.get("scenario", "seed", 0, kind=int),
        )
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None


def _segment_record(seg) -> dict:
    c = seg.centroid
    return {
        "segment_id": seg.segment_id,
        "start_s": seg.start_s,
        "end_s": seg.end_s,
        "sample_count": seg.sample_count,
        "centroid": {"lat_deg": c.latitude_deg, "lon_deg": c.longitude_deg, "alt_m": c.altitude_m},
        "mean_power_dbm": seg.mean_power_dbm,
        "mean_power_db_domain_dbm": seg.mean_power_db_domain,
        "yaw_deg": seg.yaw_deg,
        "matched_waypoint": seg.matched_waypoint,
        "drift_m": seg.drift_m,
    }


# --- subcommands ----------------------------------------------------------


def cmd_process(args) -> dict:
    s = load_settings(args.config, {
        ("segmentation", "clock_offset_s"): args.clock_offset_s,
        ("segmentation", "speed_threshold_mps"): args.speed_threshold,
        ("fit", "mad_filter"): args.mad_filter,
        ("output", "directory"): args.out,
    })
    track_path = s.input_path("inputs", "track")
    samples_path = s.input_path("inputs", "samples")
    mission_path = s.input_path("inputs", "mission", None)
    tx = s.tx_position()
    cfg = s.link_budget()
    tx_pat = s.pattern("tx")
    rx_pat = s.pattern("rx")
    options = _options(s)
    out = _out_dir(s, "results")

    track = parse_flight_log(track_path)
    samples = parse_samples(samples_path)
    mission = parse_mission(mission_path) if mission_path is not None else None
    result = process_flight(track, samples, tx, cfg, tx_pat, rx_pat, mission, options)

    assumptions = [
        "received power averaged per dwell in linear milliwatts; dB-domain mean reported alongside",
        "samples outside hover segments are treated as in-motion and discarded",
        "reference distance 1 m; beta_excess = intercept - fspl(1 m)",
        "rx antenna attitude follows logged yaw, with zero pitch and roll",
    ] + result.notes
    report = {
        "command": "process",
        "version": __version__,
        "backend": BACKEND,
        "inputs": {"track": str(track_path.name), "samples": str(samples_path.name),
                   "mission": None if mission_path is None else str(mission_path.name),
                   "tx_pattern": tx_pat.label, "rx_pattern": rx_pat.label},
        "parameters": s.used,
        "assumptions": assumptions,
        "counts": {"fixes": len(track), "samples": len(samples), "positioned": len(result.positioned),
                   "dropped": result.positioned.dropped, "segments": len(result.segments)},
        "segments": [_segment_record(seg) for seg in result.segments],
        "fit": {k: v for k, v in fit_report(result.fit).items() if k != "residuals"},
        "artifacts": ["pathloss.csv", "fit.json", "plotdata.csv", "run_report.json"],
    }
    write_pathloss_csv(result.points, out / "pathloss.csv")
    write_fit_json(result.fit, out / "fit.json")
    write_plotdata_csv(result.fit, out / "plotdata.csv")
    (out / "run_report.json").write_text(_json_text(report), encoding="utf-8")
    return {"out": str(out), "alpha": result.fit.alpha, "beta_excess_db": result.fit.beta_excess_db,
            "segments": len(result.segments)}


def _process_ini(scn: SimulationScenario) -> str:
    cp = configparser.ConfigParser()
    tx, cfg = scn.tx_position, scn.cfg
    cp["inputs"] = {"track": "track.csv", "samples": "samples.csv", "mission": "mission.csv"}
    cp["transmitter"] = {
        "lat_deg": fmt_exact(tx.latitude_deg), "lon_deg": fmt_exact(tx.longitude_deg),
        "alt_m": fmt_exact(tx.altitude_m),
        "boresight_azimuth_deg": fmt_exact(cfg.tx_mount.boresight_azimuth_deg),
        "uptilt_deg": fmt_exact(cfg.tx_mount.uptilt_deg), "roll_deg": fmt_exact(cfg.tx_mount.roll_deg),
    }
    cp["receiver"] = {
        "boresight_azimuth_deg": fmt_exact(cfg.rx_mount.boresight_azimuth_deg),
        "uptilt_deg": fmt_exact(cfg.rx_mount.uptilt_deg), "roll_deg": fmt_exact(cfg.rx_mount.roll_deg),
    }
    cp["linkbudget"] = {
        "tx_power_dbm": fmt_exact(cfg.tx_power_dbm), "tx_cable_loss_db": fmt_exact(cfg.tx_cable_loss_db),
        "rx_cable_loss_db": fmt_exact(cfg.rx_cable_loss_db),
        "amplifier_gain_db": fmt_exact(cfg.amplifier_gain_db), "frequency_hz": fmt_exact(cfg.frequency_hz),
    }
    cp["patterns"] = {"tx": "tx_pattern.csv", "rx": "rx_pattern.csv"}
    cp["output"] = {"directory": "results"}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def cmd_simulate(args) -> dict:
    s = load_settings(args.config, {("scenario", "seed"): args.seed, ("output", "directory"): args.out})
    scn = _scenario(s)
    out = _out_dir(s, "campaign")
    res = simulate(scn)
    paths = write_campaign(res, out)
    write_pattern(scn.tx_pattern, out / "tx_pattern.csv")
    write_pattern(scn.rx_pattern, out / "rx_pattern.csv")
    (out / "process.ini").write_text(_process_ini(scn), encoding="utf-8")
    report = {
        "command": "simulate",
        "version": __version__,
        "seed": scn.seed,
        "parameters": s.used,
        "counts": {"fixes": len(res.reported_track), "samples": len(res.samples), "waypoints": len(scn.mission)},
        "hover_windows_s": [list(w) for w in res.hover_windows],
        "artifacts": sorted([p.name for p in paths.values()]
                            + ["tx_pattern.csv", "rx_pattern.csv", "process.ini", "simulation_report.json"]),
    }
    (out / "simulation_report.json").write_text(_json_text(report), encoding="utf-8")
    return {"out": str(out), "samples": len(res.samples)}


def write_runs_csv(summary, dest) -> None:
    buf = io.StringIO()
    buf.write(",".join(RUNS_COLUMNS) + "\n")
    for r in summary.runs:
        vals = [fmt9(v) if r.error is None else "nan"
                for v in (r.alpha, r.beta_excess_db, r.rmse_db)]
        buf.write(f"{r.run_index},{r.seed},{','.join(vals)},{r.n_segments},{int(r.error is not None)}\n")
    Path(dest).write_text(buf.getvalue(), encoding="utf-8")


def parse_runs_csv(source) -> list[dict]:
    """Seeds are 64-bit integers, so they are parsed as ints rather than floats."""
    text = Path(source).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RUNS_COLUMNS:
        raise ValueError(f"unexpected runs header {reader.fieldnames}")
    rows = []
    for r in reader:
        rows.append({
            "run_index": int(r["run_index"]), "seed": int(r["seed"]), "alpha": float(r["alpha"]),
            "beta_excess_db": float(r["beta_excess_db"]), "rmse_db": float(r["rmse_db"]),
            "n_segments": int(r["n_segments"]), "failed": bool(int(r["failed"])),
        })
    return rows


def cmd_montecarlo(args) -> dict:
    s = load_settings(args.config, {
        ("scenario", "seed"): args.seed,
        ("montecarlo", "runs"): args.runs,
        ("montecarlo", "workers"): args.workers,
        ("segmentation", "clock_offset_s"): args.clock_offset_s,
        ("segmentation", "speed_threshold_mps"): args.speed_threshold,
        ("fit", "mad_filter"): args.mad_filter,
        ("output", "directory"): args.out,
    })
    scn = _scenario(s)
    options = _options(s)
    runs = s.get("montecarlo", "runs", 100, kind=int)
    workers = s.get("montecarlo", "workers", 1, kind=int)
    if runs < 1 or workers < 1:
        raise ConfigError("montecarlo.runs and montecarlo.workers must be at least 1")
    out = _out_dir(s, "montecarlo")
    summary = monte_carlo(scn, runs, options=options, workers=workers)
    doc = {"command": "montecarlo", "version": __version__, "parameters": s.used, **summary.as_dict()}
    (out / "montecarlo.json").write_text(_json_text(doc), encoding="utf-8")
    write_runs_csv(summary, out / "montecarlo_runs.csv")
    return {"out": str(out), "runs": runs, "failed": summary.n_failed}


def cmd_sensitivity(args) -> dict:
    s = load_settings(args.config, {("output", "directory"): args.out})
    tx = s.tx_position()
    cfg = s.link_budget()
    tx_pat = s.pattern("tx")
    rx_pat = s.pattern("rx")
    if s.has("nominal", "lat_deg"):
        nominal = GeodeticPosition(s.get("nominal", "lat_deg"), s.get("nominal", "lon_deg"),
                                   s.get("nominal", "alt_m"))
    else:
        # nominal point given as slant range and height above the transmitter along a bearing
        rng = s.get("nominal", "range_m", 50.0)
        height = s.get("nominal", "height_m", 30.0)
        if not 0 <= abs(height) <= rng:
            raise ConfigError("nominal.height_m must not exceed nominal.range_m")
        bearing = s.get("nominal", "bearing_deg", cfg.tx_mount.boresight_azimuth_deg)
        horiz = (rng * rng - height * height) ** 0.5
        b = math.radians(bearing)
        nominal = enu_to_geodetic(EnuVector(horiz * math.sin(b), horiz * math.cos(b), height), tx)
    yaw = s.get("nominal", "yaw_deg", None)
    mags = s.floats("grid", "magnitudes_m", DEFAULT_MAGNITUDES_M)
    yaw_errs = s.floats("grid", "yaw_errors_deg", (-10.0, -5.0, 0.0, 5.0, 10.0))
    roll_errs = s.floats("grid", "roll_errors_deg", (-10.0, -5.0, 0.0, 5.0, 10.0))
    out = _out_dir(s, "sensitivity")

    pos = position_sensitivity(tx, nominal, default_displacements(mags), cfg, tx_pat, rx_pat, yaw)
    att = attitude_sensitivity(tx, nominal, cfg, rx_pat, yaw_errs, roll_errs, yaw, tx_pat)
    write_sensitivity_csv([pos, att], out / "sensitivity.csv")
    lines = ["position errors", pos.summary_table()]
    for m in mags:
        w = pos.worst_for_magnitude(m)
        lines.append(f"worst offset at {m:g} m displacement: {w.pl_offset_db:+.3f} dB\n")
    lines += ["", "attitude errors", att.summary_table()]
    (out / "summary.txt").write_text("\n".join(lines), encoding="utf-8")
    return {"out": str(out), "worst_position_db": pos.worst.pl_offset_db,
            "worst_attitude_db": att.worst.pl_offset_db}


def _load_any_pattern(ref: str):
    if ref.startswith("builtin:"):
        try:
            return builtin_pattern(ref.split(":", 1)[1])
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    p = Path(ref)
    if not p.is_file():
        raise ConfigError(f"pattern file not found: {p}")
    return load_pattern(p)


def cmd_pattern(args) -> dict:
    if args.action == "inspect":
        pat = _load_any_pattern(args.files[0])
        doc = {"label": pat.label, "azimuth_points": len(pat.azimuth_grid_deg),
               "elevation_points": len(pat.elevation_grid_deg), **pattern_stats(pat).as_dict()}
    elif args.action == "diff":
        if len(args.files) != 2:
            raise ConfigError("pattern diff needs exactly two files")
        a, b = (_load_any_pattern(f) for f in args.files)
        d = pattern_diff(a, b)
        doc = {"a": a.label, "b": b.label, **d.summary()}
        if args.diff_csv:
            write_pattern(AntennaPattern(d.azimuth_grid_deg, d.elevation_grid_deg, d.difference_db,
                                         f"{a.label} - {b.label}"), args.diff_csv)
    else:
        if len(args.files) != 2:
            raise ConfigError("pattern synth needs a builtin name and an output path")
        write_pattern(_load_any_pattern(f"builtin:{args.files[0]}"), args.files[1])
        doc = {"written": args.files[1]}
    text = _json_text(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return doc


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="a2gchan", description="Air-to-ground path-loss post-processing toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seg=True):
        sp.add_argument("config", help="INI configuration file")
        sp.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        if seg:
            sp.add_argument("--clock-offset-s", type=float, default=None,
                            help="added to sample timestamps before alignment")
            sp.add_argument("--speed-threshold", type=float, default=None, help="hover speed threshold, m/s")
            sp.add_argument("--mad-filter", action=argparse.BooleanOptionalAction, default=None,
                            help="drop points beyond 3 MAD of the residuals and refit once")

    sp = sub.add_parser("process", help="fit a path-loss model to one recorded flight")
    common(sp)
    sp.set_defaults(func=cmd_process)

    sp = sub.add_parser("simulate", help="generate a synthetic campaign with known truth")
    common(sp, seg=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("montecarlo", help="repeat simulate+process over many seeds")
    common(sp)
    sp.add_argument("--seed", type=int, default=None, help="base seed")
    sp.add_argument("--runs", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_montecarlo)

    sp = sub.add_parser("sensitivity", help="tabulate path-loss offsets from position/attitude errors")
    common(sp, seg=False)
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("pattern", help="inspect, compare or synthesize antenna pattern files")
    sp.add_argument("action", choices=("inspect", "diff", "synth"))
    sp.add_argument("files", nargs="+", help="pattern files or builtin:<name>")
    sp.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    sp.add_argument("--diff-csv", default=None, help="write the difference map as a pattern file")
    sp.set_defaults(func=cmd_pattern)
    return p


def _fail(category: str, exc: BaseException) -> int:
    err = {"error": {"category": category, "type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(err) + "\n")
    return EXIT_CODES.get(category, 1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except A2GError as exc:
        return _fail(exc.category, exc)
    except OSError as exc:
        return _fail("io", exc)
    except ValueError as exc:
        # domain constructors reject out-of-range parameters with ValueError
        return _fail("config", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
