"""Least-squares fit of the log-distance path-loss model.

Model, with reference distance d0 = 1 m::

    PL(d) = intercept + 10 * alpha * log10(d / d0)

Only the intercept is identifiable from data. It is the sum of the loss at
d0 and any excess loss; ``beta_excess_db`` is reported as the intercept minus
the free-space loss at d0, so a pure free-space channel fits to alpha = 2 and
zero excess.
"""

from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateDesign
from .ingest import read_csv_table
from .linkbudget import fmt9, fspl

__all__ = ["PathLossFit", "fit_log_distance", "fit_report", "write_fit_json", "write_plotdata_csv",
           "parse_plotdata_csv", "round9"]

log = logging.getLogger(__name__)

REFERENCE_DISTANCE_M = 1.0


@dataclass(frozen=True)
class PathLossFit:
    alpha: float
    intercept_db: float
    beta_excess_db: float
    rmse_db: float
    residuals: tuple[float, ...]
    n_points: int
    frequency_hz: float
    x_db: tuple[float, ...] = ()
    path_loss_db: tuple[float, ...] = ()
    distances_m: tuple[float, ...] = ()
    segment_ids: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()
    excluded_segment_ids: tuple[int, ...] = ()
    weighting: str = "none"
    mad_filter: bool = False

    def predict(self, distance_m):
        return self.intercept_db + self.alpha * 10.0 * np.log10(np.asarray(distance_m) / REFERENCE_DISTANCE_M)


def _ols(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if not sxx > 0:
        raise DegenerateDesign("all path-loss points share one distance; slope is not identifiable")
    slope = (w * dx * (y - ym)).sum() / sxx
    return slope, ym - slope * xm


def fit_log_distance(points, frequency_hz: float, weighting: str = "none", mad_filter: bool = False,
                     mad_k: float = 3.0) -> PathLossFit:
    """Fit ``pl_db`` against ``10 log10(d)`` by (optionally weighted) least squares.

    ``weighting="samples"`` weights each point by its dwell sample count.
    With ``mad_filter`` points whose residual lies more than ``mad_k`` median
    absolute deviations from the median residual are dropped and the line is
    refit once.
    """
    points = list(points)
    if len(points) < 2:
        raise DegenerateDesign(f"need at least 2 points, got {len(points)}")
    d = np.array([p.distance3d_m for p in points], dtype=np.float64)
    y = np.array([p.path_loss_db for p in points], dtype=np.float64)
    ids = np.array([p.segment_id for p in points])
    if weighting == "none":
        w = np.ones_like(d)
    elif weighting == "samples":
        w = np.array([p.sample_count for p in points], dtype=np.float64)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    x = 10.0 * np.log10(d / REFERENCE_DISTANCE_M)

    slope, icpt = _ols(x, y, w)
    keep = np.ones(d.size, dtype=bool)
    if mad_filter:
        r = y - (icpt + slope * x)
        med = np.median(r)
        mad = np.median(np.abs(r - med))
        if mad > 0:
            keep = np.abs(r - med) <= mad_k * mad
            if not keep.all():
                log.info("MAD filter dropped %d of %d points", int((~keep).sum()), keep.size)
                slope, icpt = _ols(x[keep], y[keep], w[keep])

    xk, yk = x[keep], y[keep]
    resid = yk - (icpt + slope * xk)
    return PathLossFit(
        alpha=float(slope),
        intercept_db=float(icpt),
        beta_excess_db=float(icpt - fspl(REFERENCE_DISTANCE_M, frequency_hz)),
        rmse_db=float(math.sqrt(np.mean(resid * resid))),
        residuals=tuple(float(v) for v in resid),
        n_points=int(keep.sum()),
        frequency_hz=float(frequency_hz),
        x_db=tuple(float(v) for v in xk),
        path_loss_db=tuple(float(v) for v in yk),
        distances_m=tuple(float(v) for v in d[keep]),
        segment_ids=tuple(int(v) for v in ids[keep]),
        weights=tuple(float(v) for v in w[keep]),
        excluded_segment_ids=tuple(int(v) for v in ids[~keep]),
        weighting=weighting,
        mad_filter=mad_filter,
    )


def round9(obj):
    """Recursively round floats to 9 significant digits for stable output."""
    if isinstance(obj, float):
        return float(fmt9(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round9(v) for v in obj]
    if isinstance(obj, np.generic):
        return round9(obj.item())
    return obj


def fit_report(fit: PathLossFit) -> dict:
    r = np.asarray(fit.residuals)
    q = np.quantile(r, [0.0, 0.25, 0.5, 0.75, 1.0]) if r.size else np.zeros(5)
    return {
        "model": "pl_db = intercept_db + 10 * alpha * log10(d_m / 1 m)",
        "alpha": fit.alpha,
        "intercept_db": fit.intercept_db,
        "beta_excess_db": fit.beta_excess_db,
        "fspl_at_d0_db": fspl(REFERENCE_DISTANCE_M, fit.frequency_hz),
        "reference_distance_m": REFERENCE_DISTANCE_M,
        "frequency_hz": fit.frequency_hz,
        "rmse_db": fit.rmse_db,
        "n_points": fit.n_points,
        "weighting": fit.weighting,
        "mad_filter": fit.mad_filter,
        "excluded_segment_ids": list(fit.excluded_segment_ids),
        "residual_quartiles_db": dict(zip(("min", "q25", "median", "q75", "max"), (float(v) for v in q))),
        "residuals": [
            {"segment_id": sid, "d_m": dm, "pl_db": pl, "residual_db": res}
            for sid, dm, pl, res in zip(fit.segment_ids, fit.distances_m, fit.path_loss_db, fit.residuals)
        ],
    }


def write_fit_json(fit_or_report, dest) -> None:
    report = fit_report(fit_or_report) if isinstance(fit_or_report, PathLossFit) else fit_or_report
    text = json.dumps(round9(report), indent=2) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def write_plotdata_csv(fit: PathLossFit, dest) -> None:
    buf = io.StringIO()
    buf.write("x_10log10d,pl_db,fitline_db\n")
    for x, pl in zip(fit.x_db, fit.path_loss_db):
        buf.write(f"{fmt9(x)},{fmt9(pl)},{fmt9(fit.intercept_db + fit.alpha * x)}\n")
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")


def parse_plotdata_csv(source) -> np.ndarray:
    rows = [r for _, r in read_csv_table(source, ("x_10log10d", "pl_db", "fitline_db"))]
    return np.array([[r["x_10log10d"], r["pl_db"], r["fitline_db"]] for r in rows]).reshape(-1, 3)
