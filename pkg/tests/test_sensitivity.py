import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from a2gchan.geodesy import EnuVector, GeodeticPosition, MountOrientation, enu_to_geodetic
from a2gchan.linkbudget import LinkBudgetConfig
from a2gchan.patterns import builtin_pattern, horn_pattern, omni_pattern, uniform_pattern
from a2gchan.sensitivity import (
    attitude_sensitivity, default_displacements, parse_sensitivity_csv, position_sensitivity,
    write_sensitivity_csv,
)

TX = GeodeticPosition(60.3333, 24.2964, 100.0)
CFG = LinkBudgetConfig(tx_mount=MountOrientation(0.0, 15.0, 0.0))
ISO = uniform_pattern(0.0)


def nominal_at(range_m, height_m, bearing=0.0):
    h = math.sqrt(range_m ** 2 - height_m ** 2)
    b = math.radians(bearing)
    return enu_to_geodetic(EnuVector(h * math.sin(b), h * math.cos(b), height_m), TX)


def test_default_grid_shape():
    grid = default_displacements()
    assert len(grid) == 1 + 3 * 6 * 2
    assert grid[0] == EnuVector(0.0, 0.0, 0.0)
    assert {round(v.norm(), 9) for v in grid[1:]} == {0.5, 1.0, 2.0, 3.0, 5.0, 10.0}


def test_zero_grid_gives_zero_table():
    rep = position_sensitivity(TX, nominal_at(50, 30), [EnuVector(0, 0, 0)] * 3, CFG, horn_pattern(),
                               builtin_pattern("omni-on-uav"))
    assert all(e.pl_offset_db == 0.0 and e.fspl_term_db == 0.0 for e in rep.entries)
    att = attitude_sensitivity(TX, nominal_at(50, 30), CFG, builtin_pattern("omni-on-uav"))
    assert att.entries[0].pl_offset_db == 0.0


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_isotropic_closed_form(de, dn, du):
    nominal = nominal_at(50, 30)
    rep = position_sensitivity(TX, nominal, [EnuVector(de, dn, du)], CFG, ISO, ISO)
    n = np.array([0.0, 40.0, 30.0])
    # the ENU frame of the tx makes the nominal vector (0, 40, 30) up to ~1e-9 m
    expected = 20 * math.log10(np.linalg.norm(n + [de, dn, du]) / np.linalg.norm(n))
    e = rep.entries[0]
    assert e.pl_offset_db == pytest.approx(expected, abs=1e-8)
    assert e.tx_gain_error_db == 0.0 and e.rx_gain_error_db == 0.0


def test_offset_decomposes_into_terms():
    rep = position_sensitivity(TX, nominal_at(50, 30), default_displacements(), CFG, horn_pattern(),
                               builtin_pattern("omni-on-uav"), rx_yaw_deg=20.0)
    for e in rep.entries:
        assert e.pl_offset_db == pytest.approx(e.fspl_term_db + e.tx_gain_error_db + e.rx_gain_error_db,
                                               abs=1e-12)


def test_mirror_symmetric_geometry():
    # nominal point on the horn boresight plane; east and west displacements mirror each other
    rep = position_sensitivity(TX, nominal_at(50, 30), [EnuVector(m, 0, 0) for m in (3.0, -3.0)], CFG,
                               horn_pattern(), omni_pattern())
    a, b = rep.entries
    assert a.pl_offset_db == pytest.approx(b.pl_offset_db, abs=1e-9)


def test_horn_offset_exceeds_one_db_at_five_metres():
    rep = position_sensitivity(TX, nominal_at(50, 30), default_displacements(), CFG, horn_pattern(), ISO)
    assert abs(rep.worst_for_magnitude(5.0).pl_offset_db) >= 1.0
    with pytest.raises(KeyError):
        rep.worst_for_magnitude(7.0)


def test_attitude_with_azimuth_uniform_rx():
    # an azimuth-uniform antenna does not care about yaw, but roll tilts its horizon
    rep = attitude_sensitivity(TX, nominal_at(50, 30), CFG, omni_pattern(), yaw_errors_deg=(-10, 0, 10),
                               roll_errors_deg=(0.0,))
    assert all(abs(e.rx_gain_error_db) < 1e-12 for e in rep.entries)
    rolled = attitude_sensitivity(TX, nominal_at(50, 0.001, bearing=90.0), CFG, omni_pattern(),
                                  roll_errors_deg=(15.0,))
    assert abs(rolled.entries[0].rx_gain_error_db) > 0.1


def test_attitude_with_notched_rx():
    rep = attitude_sensitivity(TX, nominal_at(50, 30), CFG, builtin_pattern("omni-on-uav"),
                               yaw_errors_deg=(-20, -10, 0, 10, 20), rx_yaw_deg=0.0)
    assert rep.entries[2].rx_gain_error_db == 0.0
    assert max(abs(e.rx_gain_error_db) for e in rep.entries) > 0.1


def test_csv_roundtrip():
    pos = position_sensitivity(TX, nominal_at(50, 30), default_displacements(), CFG, horn_pattern(), ISO)
    att = attitude_sensitivity(TX, nominal_at(50, 30), CFG, builtin_pattern("omni-on-uav"), (-5, 0, 5), (-5, 5))
    buf = io.StringIO()
    write_sensitivity_csv([pos, att], buf)
    back = parse_sensitivity_csv(io.StringIO(buf.getvalue()))
    orig = list(pos.entries) + list(att.entries)
    assert len(back) == len(orig)
    for a, b in zip(orig, back):
        assert a.kind == b.kind
        assert b.pl_offset_db == pytest.approx(a.pl_offset_db, rel=1e-8, abs=1e-12)
        assert b.displacement.as_array() == pytest.approx(a.displacement.as_array())


def test_summary_table_mentions_worst_case():
    rep = position_sensitivity(TX, nominal_at(50, 30), default_displacements(), CFG, horn_pattern(), ISO)
    text = rep.summary_table()
    assert "worst case" in text and text.count("\n") == len(rep.entries) + 4
