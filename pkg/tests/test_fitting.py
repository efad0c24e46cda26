import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from a2gchan.errors import DegenerateDesign
from a2gchan.fitting import fit_log_distance, fit_report, parse_plotdata_csv, write_fit_json, write_plotdata_csv
from a2gchan.linkbudget import PathLossPoint, fspl
from oracles import ols_oracle, quartiles_oracle

F = 28e9


def pts(d, pl, counts=None):
    counts = counts or [1] * len(d)
    return [PathLossPoint(float(a), float(b), 0.0, 0.0, segment_id=k, sample_count=c)
            for k, (a, b, c) in enumerate(zip(d, pl, counts))]


def test_exact_friis_points():
    d = [10.0, 50.0, 100.0, 300.0]
    fit = fit_log_distance(pts(d, [fspl(v, F) for v in d]), F)
    assert fit.alpha == pytest.approx(2.0, abs=1e-6)
    # intercept frozen from the high-precision fspl oracle at 1 m
    assert fit.intercept_db == pytest.approx(61.39094384872776, abs=1e-6)
    assert fit.beta_excess_db == pytest.approx(0.0, abs=1e-6)
    assert fit.rmse_db == pytest.approx(0.0, abs=1e-6)


def test_two_point_exact_fit():
    fit = fit_log_distance(pts([1.0, 10.0], [60.0, 82.0]), F)
    assert fit.alpha == pytest.approx(2.2, abs=1e-12)
    assert fit.intercept_db == pytest.approx(60.0, abs=1e-12)
    assert fit.rmse_db == pytest.approx(0.0, abs=1e-12)


@given(st.lists(st.tuples(st.floats(1, 1000), st.floats(40, 160)), min_size=3, max_size=40))
def test_matches_normal_equation_oracle(data):
    d = [a for a, _ in data]
    if max(d) / min(d) < 1.01:
        return
    pl = [b for _, b in data]
    fit = fit_log_distance(pts(d, pl), F)
    x = [10 * math.log10(v) for v in d]
    slope, icpt = ols_oracle(x, pl)
    assert fit.alpha == pytest.approx(slope, abs=1e-7)
    assert fit.intercept_db == pytest.approx(icpt, abs=1e-5)


@given(st.lists(st.tuples(st.floats(1, 1000), st.floats(40, 160)), min_size=3, max_size=40))
def test_residuals_orthogonal_to_design(data):
    d = np.array([a for a, _ in data])
    if d.max() / d.min() < 1.01:
        return
    fit = fit_log_distance(pts(d, [b for _, b in data]), F)
    r = np.array(fit.residuals)
    x = np.array(fit.x_db)
    assert abs(r.sum()) <= 1e-9 * max(1.0, np.abs(r).max() * r.size)
    assert abs((r * (x - x.mean())).sum()) <= 1e-9 * max(1.0, np.abs(r).max() * np.abs(x - x.mean()).sum())


@given(st.floats(0.01, 100.0))
@settings(max_examples=50)
def test_alpha_invariant_to_distance_rescaling(k):
    rng = np.random.default_rng(4)
    d = rng.uniform(20, 400, 12)
    pl = 61.4 + 22 * np.log10(d) + rng.normal(0, 2, 12)
    a = fit_log_distance(pts(d, pl), F)
    b = fit_log_distance(pts(k * d, pl), F)
    assert b.alpha == pytest.approx(a.alpha, abs=1e-9)
    assert b.rmse_db == pytest.approx(a.rmse_db, abs=1e-9)
    # only the intercept absorbs the rescaling
    assert b.intercept_db == pytest.approx(a.intercept_db - 10 * a.alpha * math.log10(k), abs=1e-7)


def test_sample_weighting_matches_lstsq():
    rng = np.random.default_rng(6)
    d = rng.uniform(20, 400, 10)
    pl = 60 + 21 * np.log10(d) + rng.normal(0, 3, 10)
    w = rng.integers(30, 300, 10)
    fit = fit_log_distance(pts(d, pl, list(w)), F, weighting="samples")
    x = 10 * np.log10(d)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(np.column_stack([x, np.ones_like(x)]) * sw[:, None], pl * sw, rcond=None)
    assert fit.alpha == pytest.approx(coef[0], abs=1e-10)
    assert fit.intercept_db == pytest.approx(coef[1], abs=1e-8)


def test_mad_filter_drops_outlier_and_refits():
    d = np.array([25.0, 55, 85, 115, 145, 175, 205, 235])
    pl = fspl(d, F)
    pl[3] += 15.0
    plain = fit_log_distance(pts(d, pl), F)
    gated = fit_log_distance(pts(d, pl), F, mad_filter=True)
    assert gated.excluded_segment_ids == (3,)
    assert gated.n_points == 7
    assert gated.alpha == pytest.approx(2.0, abs=1e-9)
    assert abs(plain.alpha - 2.0) > 0.01


def test_degenerate_designs():
    with pytest.raises(DegenerateDesign):
        fit_log_distance(pts([10.0], [80.0]), F)
    with pytest.raises(DegenerateDesign):
        fit_log_distance(pts([10.0, 10.0, 10.0], [80.0, 81.0, 79.0]), F)
    with pytest.raises(ValueError):
        fit_log_distance(pts([10.0, 20.0], [80.0, 81.0]), F, weighting="bogus")


def test_report_quartiles_match_sorting_oracle():
    rng = np.random.default_rng(12)
    d = rng.uniform(20, 400, 15)
    fit = fit_log_distance(pts(d, 60 + 20 * np.log10(d) + rng.normal(0, 2, 15)), F)
    q = fit_report(fit)["residual_quartiles_db"]
    ref = quartiles_oracle(fit.residuals)
    for got, want in zip((q["min"], q["q25"], q["median"], q["q75"], q["max"]), ref):
        assert got == pytest.approx(want, abs=1e-12)


def test_fit_json_and_plotdata_roundtrip(tmp_path):
    d = np.array([25.0, 55, 85, 115])
    fit = fit_log_distance(pts(d, 62 + 21 * np.log10(d) + np.array([0.3, -0.2, 0.1, -0.2])), F)
    write_fit_json(fit, tmp_path / "fit.json")
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["alpha"] == pytest.approx(fit.alpha, rel=1e-8)
    assert doc["n_points"] == 4 and len(doc["residuals"]) == 4
    buf = io.StringIO()
    write_plotdata_csv(fit, buf)
    arr = parse_plotdata_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_allclose(arr[:, 0], fit.x_db, rtol=1e-8)
    np.testing.assert_allclose(arr[:, 2], fit.predict(d), rtol=1e-8)


def test_predict():
    fit = fit_log_distance(pts([1.0, 10.0], [60.0, 82.0]), F)
    np.testing.assert_allclose(fit.predict([1.0, 100.0]), [60.0, 104.0])
