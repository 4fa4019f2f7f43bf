"""Battery plumbing: suite registry, rows, threading, forced trials."""

import numpy as np
import pytest

from anisopolya.batteries import (CSV_HEADER, SUITES, BatteryReport,
                                  run_battery, thread_count)
from anisopolya.errors import PreconditionError


def test_registry_and_validation():
    assert set(SUITES) == {"polya1", "polya2", "polya3", "bands", "hl",
                           "rayleigh"}
    with pytest.raises(PreconditionError):
        run_battery("nope", 10)
    with pytest.raises(PreconditionError):
        run_battery("hl", 0)


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_every_suite_clean_on_small_run(suite):
    rep = run_battery(suite, 40, seed=2024)
    assert isinstance(rep, BatteryReport)
    assert rep.violations == 0
    assert len(rep.rows) == 40
    assert [r.trial for r in rep.rows] == list(range(40))


def test_forced_monotone_trials_present():
    rep = run_battery("polya1", 30, seed=5)
    forced = [rep.rows[i] for i in (9, 19, 29)]
    for row in forced:
        assert row.monotone in ("decreasing", "increasing", "constant")
    kinds = {r.monotone for r in rep.rows}
    assert "none" in kinds


def test_rows_are_replayable_csv():
    rep = run_battery("polya2", 5, seed=88)
    line = rep.rows[3].csv()
    parts = line.split(",")
    assert len(parts) == len(CSV_HEADER)
    assert parts[0] == "3" and parts[1] == "88"
    assert float(parts[4]) == rep.rows[3].gap


def test_thread_pool_matches_serial(monkeypatch):
    monkeypatch.setenv("ANISO_THREADS", "1")
    serial = run_battery("polya3", 60, seed=3)
    monkeypatch.setenv("ANISO_THREADS", "4")
    pooled = run_battery("polya3", 60, seed=3)
    assert pooled.rows == serial.rows
    assert pooled.worst_gap == serial.worst_gap


def test_thread_count_validation(monkeypatch):
    monkeypatch.setenv("ANISO_THREADS", "abc")
    with pytest.raises(PreconditionError):
        thread_count()
    monkeypatch.setenv("ANISO_THREADS", "0")
    with pytest.raises(PreconditionError):
        thread_count()
    monkeypatch.setenv("ANISO_THREADS", "2")
    assert thread_count() == 2


def test_worst_gap_is_finite_minimum():
    rep = run_battery("rayleigh", 25, seed=41)
    gaps = [r.gap for r in rep.rows if np.isfinite(r.gap)]
    assert rep.worst_gap == min(gaps)
