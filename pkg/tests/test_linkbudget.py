import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from a2gchan.geodesy import ORIGIN, EnuVector, GeodeticPosition, MountOrientation, enu_to_geodetic, ray_geometry
from a2gchan.linkbudget import (
    LinkBudgetConfig, PathLossPoint, antenna_gains, antenna_gains_arrays, extract_path_loss, fspl,
    parse_pathloss_csv, path_loss_from_power, received_power, rx_mount_for_yaw, write_pathloss_csv,
)
from a2gchan.geodesy import mount_matrix
from a2gchan.patterns import builtin_pattern, horn_pattern, uniform_pattern
from a2gchan.segmentation import HoverSegment
from oracles import fspl_oracle

TX = GeodeticPosition(60.3333, 24.2964, 100.0)


def test_fspl_matches_high_precision_oracle():
    for d in (1.0, 25.0, 123.456, 1e4):
        for f in (2.4e9, 28e9, 60e9):
            assert fspl(d, f) == pytest.approx(fspl_oracle(d, f), abs=1e-12)
    # frozen from the oracle above
    assert fspl(1.0, 28e9) == pytest.approx(61.39094384872776, abs=1e-12)


@given(st.floats(0.01, 1e5))
def test_fspl_decade_step_is_20_db(d):
    # equal up to the rounding of doubles near 100-200
    assert abs(fspl(10 * d, 28e9) - fspl(d, 28e9) - 20.0) <= 1e-13


@given(st.floats(0.01, 1e5), st.floats(1e8, 1e11))
def test_fspl_doubling_frequency(d, f):
    assert fspl(d, 2 * f) - fspl(d, f) == pytest.approx(20 * math.log10(2), abs=1e-12)


def test_fspl_rejects_nonpositive():
    with pytest.raises(ValueError):
        fspl(0.0, 28e9)
    with pytest.raises(ValueError):
        fspl(1.0, -1.0)


def test_budget_identity_with_campaign_constants():
    cfg = LinkBudgetConfig()
    pl = path_loss_from_power(-50.0, 14.7, 2.1, cfg)
    assert pl == 131.3
    assert abs(received_power(pl, 14.7, 2.1, cfg) - (-50.0)) <= 1e-12


@given(st.floats(-150, 20), st.floats(-30, 30), st.floats(-30, 30), st.floats(0, 80))
def test_budget_inversion(p, gt, gr, amp):
    cfg = LinkBudgetConfig()
    pl = path_loss_from_power(p, gt, gr, cfg, amplifier_gain_db=amp)
    assert received_power(pl, gt, gr, cfg, amplifier_gain_db=amp) == pytest.approx(p, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        LinkBudgetConfig(frequency_hz=0.0)
    with pytest.raises(ValueError):
        LinkBudgetConfig(tx_cable_loss_db=-1.0)


def test_horn_on_boresight_gives_peak_gain():
    cfg = LinkBudgetConfig(tx_mount=MountOrientation(40.0, 15.0, 0.0))
    from a2gchan.geodesy import unit_vector
    ray = ray_geometry(ORIGIN, EnuVector.from_array(50 * unit_vector(40.0, 15.0)))
    g = antenna_gains(ray, cfg, horn_pattern(), uniform_pattern(0.0), rx_mount_for_yaw(cfg, None))
    assert g.tx_gain_db == pytest.approx(14.7, abs=1e-9)
    assert g.rx_gain_db == 0.0


def test_receiver_sees_reversed_ray():
    # rx horn facing north while hovering north of the tx: it looks away from the tx
    cfg = LinkBudgetConfig(tx_mount=MountOrientation(0.0, 0.0, 0.0))
    ray = ray_geometry(ORIGIN, EnuVector(0.0, 50.0, 0.0))
    away = antenna_gains(ray, cfg, uniform_pattern(0.0), horn_pattern(), rx_mount_for_yaw(cfg, 0.0))
    facing = antenna_gains(ray, cfg, uniform_pattern(0.0), horn_pattern(), rx_mount_for_yaw(cfg, 180.0))
    assert facing.rx_gain_db == pytest.approx(14.7)
    assert away.rx_gain_db == pytest.approx(14.7 - 30.0)


def test_missing_yaw_means_nose_north():
    cfg = LinkBudgetConfig(rx_mount=MountOrientation(20.0, 5.0, 1.0))
    assert rx_mount_for_yaw(cfg, None) == MountOrientation(20.0, 5.0, 1.0)
    assert rx_mount_for_yaw(cfg, 90.0).boresight_azimuth_deg == 110.0


def test_vectorized_gains_match_scalar():
    cfg = LinkBudgetConfig()
    rng = np.random.default_rng(8)
    enu = rng.uniform(-200, 200, (50, 3))
    enu[:, 2] = np.abs(enu[:, 2]) + 1
    tx_p, rx_p = builtin_pattern("horn"), builtin_pattern("omni-on-uav")
    rx_m = rx_mount_for_yaw(cfg, 33.0)
    d, gtx, grx = antenna_gains_arrays(enu, cfg, tx_p, rx_p, mount_matrix(rx_m))
    for k in range(len(enu)):
        ray = ray_geometry(ORIGIN, EnuVector(*enu[k]))
        g = antenna_gains(ray, cfg, tx_p, rx_p, rx_m)
        assert d[k] == pytest.approx(ray.distance3d_m, abs=1e-9)
        assert gtx[k] == pytest.approx(g.tx_gain_db, abs=1e-9)
        assert grx[k] == pytest.approx(g.rx_gain_db, abs=1e-9)


def test_extract_isotropic_equals_fspl():
    cfg = LinkBudgetConfig()
    pos = enu_to_geodetic(EnuVector(0.0, 85.0, 15.0), TX)
    d = math.sqrt(85.0 ** 2 + 15.0 ** 2)
    p = cfg.tx_power_dbm - cfg.tx_cable_loss_db + cfg.amplifier_gain_db - cfg.rx_cable_loss_db - fspl(d, 28e9)
    seg = HoverSegment(0.0, 30.0, pos, p, 270, yaw_deg=None, segment_id=4)
    pt = extract_path_loss(seg, TX, cfg, uniform_pattern(0.0), uniform_pattern(0.0))
    assert pt.distance3d_m == pytest.approx(d, abs=1e-6)
    assert pt.path_loss_db == pytest.approx(fspl(d, 28e9), abs=1e-9)
    assert pt.segment_id == 4 and pt.yaw_assumed


def test_pathloss_csv_roundtrip():
    pts = [PathLossPoint(25.0 + k * 30.123456789, 90.0 + k / 3, 14.7 - k / 7, 2.1, 1.0, 31.0 / (k + 1), k)
           for k in range(5)]
    buf = io.StringIO()
    write_pathloss_csv(pts, buf)
    back = parse_pathloss_csv(io.StringIO(buf.getvalue()))
    for a, b in zip(pts, back):
        assert b.segment_id == a.segment_id
        for name in ("distance3d_m", "path_loss_db", "tx_gain_db_applied", "rx_gain_db_applied",
                     "azimuth_deg", "elevation_deg"):
            assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-8)
    # nine significant digits, so a second pass is a fixed point
    buf2 = io.StringIO()
    write_pathloss_csv(back, buf2)
    assert buf2.getvalue() == buf.getvalue()
