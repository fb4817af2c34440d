import json
import math

import numpy as np
import pytest

from slfv.errors import FitUndefinedError
from slfv.experiments import (duality_check, estimate_nu, exponent_fit,
                              front_bulk_gap, loglog_slope, sector_persistence,
                              shape_scan, skeleton_check, tail_validator)
from slfv.measure import unit_model

M = unit_model()


def test_estimate_nu_small():
    res = estimate_nu([10.0, 20.0], reps=20, m=M, master_seed=1)
    assert res.aggregates["pathwise_hp_le_pt"] == res.aggregates["n_ok"] == 40
    assert res.fits["nu_hat"] > 0.0
    assert not res.flagged
    for row in res.records:
        assert row["tau_halfplane"] <= row["tau_point"]
        assert row["n_events"] >= math.ceil(row["x"] / 2.0)


def test_estimate_nu_csv_deterministic(tmp_path):
    a = estimate_nu([8.0], reps=10, m=M, master_seed=3, threads=4)
    b = estimate_nu([8.0], reps=10, m=M, master_seed=3, threads=1)
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    a.to_csv(pa)
    b.to_csv(pb)
    assert pa.read_bytes() == pb.read_bytes()
    a.to_json(tmp_path / "a.json")
    b.to_json(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_csv_formatting_handles_numpy_scalars(tmp_path):
    from slfv.experiments import _fmt

    assert _fmt(np.float64(1.5)) == "1.5"
    assert _fmt(np.int64(3)) == 3
    assert _fmt(0.1) == "0.1"
    assert _fmt(None) == ""
    res = shape_scan([2.0, 4.0], n_dir=8, reps=2, m=M, master_seed=21)
    p = tmp_path / "shape.csv"
    res.to_csv(p)
    assert "np.float" not in p.read_text()
    res.to_json(tmp_path / "shape.json")


def test_loglog_slope_guard():
    with pytest.raises(FitUndefinedError):
        loglog_slope([1.0, 2.0], [0.0, 1.0])
    assert loglog_slope([1.0, 10.0], [2.0, 20.0]) == pytest.approx(1.0)


def test_exponent_fit_validation():
    with pytest.raises(ValueError):
        exponent_fit([10.0, 20.0, 30.0], reps=5, m=M, master_seed=0)
    with pytest.raises(ValueError):
        exponent_fit([10.0, 20.0, 40.0, 80.0], reps=5, m=M, master_seed=0)


def test_exponent_fit_small():
    res = exponent_fit([4.0, 8.0, 16.0, 48.0], reps=30, m=M, master_seed=5)
    assert math.isfinite(res.fits["xi_hat"])
    for row in res.records:
        assert abs(row["y_end"]) <= row["max_abs_y"] + 1e-12
        assert row["max_abs_y"] <= row["strip_radius"] + 1e-12
    assert "ks_scaled_last_two" in res.diagnostics


def test_front_bulk_gap_point_seed():
    res = front_bulk_gap([8.0, 16.0], reps=20, m=M, master_seed=7)
    assert res.diagnostics["all_gaps_nonnegative"]
    assert all(r["gap"] >= 0.0 for r in res.records)


def test_front_bulk_gap_halfplane_mode():
    res = front_bulk_gap([8.0], reps=10, m=M, master_seed=8, mode="halfplane-window")
    assert res.diagnostics["all_gaps_nonnegative"]


def test_front_bulk_gap_bad_mode():
    with pytest.raises(ValueError):
        front_bulk_gap([8.0], reps=5, m=M, master_seed=0, mode="nope")


def test_duality_small():
    res = duality_check(12.0, reps=40, m=M, master_seed=9)
    d = res.diagnostics
    assert 0.0 <= d["ks_D"] <= 1.0
    assert d["truncation_rate"] <= 0.2
    assert res.aggregates["n_per_side"] == 40


def test_shape_scan_small():
    res = shape_scan([3.0, 6.0], n_dir=8, reps=4, m=M, master_seed=11)
    assert res.fits["nu_hat"] > 0.0
    # reach is non-decreasing in t for each (replica, direction)
    by_key = {}
    for r in res.records:
        by_key.setdefault((r["replica"], r["theta"]), []).append((r["t"], r["reach"]))
    for series in by_key.values():
        series.sort()
        reaches = [v for _, v in series]
        assert all(b >= a - 1e-9 for a, b in zip(reaches, reaches[1:]))


def test_shape_scan_validation():
    with pytest.raises(ValueError):
        shape_scan([3.0], n_dir=4, reps=2, m=M, master_seed=0)


def test_tail_validator_slow_skips_at_threshold():
    # beta exactly at 3/(eta*delta^2) must be skipped (lemma needs strict >)
    thr = 3.0 / (1.0 * 0.3**2)
    res = tail_validator(M, 0, {"slow": {"delta": 0.3, "x": 3.0,
                                         "betas": [thr], "n_samples": 1000}})
    assert res.records[0]["skipped"] == 1
    assert res.aggregates["n_checked"] == 0


def test_tail_validator_point_and_njumps():
    res = tail_validator(M, 1, {
        "point": {"delta": 0.3, "x": 3.0, "betas": [40.0], "reps": 50},
        "njumps": {"x": 10.0, "theta_factor": 4.0, "reps": 50},
    })
    rows = {r["check"]: r for r in res.records}
    assert rows["point"]["passed"] == 1  # the true process is far inside the bound
    assert rows["njumps"]["passed"] == 1
    assert res.aggregates["all_passed"]


def test_sector_persistence_small():
    res = sector_persistence(5, M, master_seed=13, t_horizon=4.0, disk_radius=5.0)
    assert 0.0 <= res.aggregates["survival_fraction"] <= 1.0
    for r in res.records:
        assert r["n_events"] > 0


def test_skeleton_check_exact():
    res = skeleton_check(20, M, master_seed=15, n_events=30, points_per_run=10)
    assert res.diagnostics["exact"]
    assert res.aggregates["agreement_rate"] == 1.0
