#!/usr/bin/env python3
"""
Tests for necklace enumeration and pattern ranking
"""

import csv
import json
import math
from itertools import product

import pytest

import pattern_search
from conftest import gap_error_floor
from core import DecimationPattern, InvalidCounts, RiccatiFailure, canonical_rotation
from pattern_search import (
    PatternReport, all_rotations, consecutive_zero_run, enumerate_classes, format_table,
    reproduce_tables, search, write_reports_csv, write_reports_json,
)


def necklace_count(M: int, N: int) -> int:
    """Fixed-weight binary necklaces: (1/M) sum over d | gcd(M, N) of phi(d) C(M/d, N/d)"""
    def phi(d):
        return sum(1 for k in range(1, d + 1) if math.gcd(k, d) == 1)
    g = math.gcd(M, N)
    return sum(phi(d) * math.comb(M // d, N // d) for d in range(1, g + 1) if g % d == 0) // M


def test_enumerate_examples():
    assert [str(p) for p in enumerate_classes(4, 2)] == ["0011", "0101"]
    assert len(enumerate_classes(3, 2)) == 1
    assert len(enumerate_classes(7, 4)) == 5
    assert [str(p) for p in enumerate_classes(1, 1)] == ["1"]


@pytest.mark.parametrize("M", range(1, 13))
def test_class_counts_match_necklace_formula(M):
    for N in range(1, M + 1):
        classes = enumerate_classes(M, N)
        assert len(classes) == necklace_count(M, N)
        assert len(classes) <= math.comb(M, N)


@pytest.mark.parametrize("M", range(1, 11))
def test_classes_partition_all_patterns(M):
    for N in range(1, M + 1):
        reps = set(enumerate_classes(M, N))
        for bits in product((0, 1), repeat=M):
            if sum(bits) != N:
                continue
            assert canonical_rotation(DecimationPattern(bits)) in reps


@pytest.mark.parametrize("M,N", [(3, 0), (3, 4), (0, 0)])
def test_invalid_counts(M, N):
    with pytest.raises(InvalidCounts):
        enumerate_classes(M, N)


@pytest.mark.parametrize("literal,run", [
    ("1100", 2), ("1010", 1), ("1111", 0), ("1000", 3), ("0110", 2), ("0011101", 2),
])
def test_consecutive_zero_run(literal, run):
    assert consecutive_zero_run(DecimationPattern.from_string(literal)) == run


def test_all_rotations():
    assert [str(r) for r in all_rotations(DecimationPattern.from_string("1100"))] == \
        ["1100", "1001", "0011", "0110"]
    assert len(all_rotations(DecimationPattern.from_string("1010"))) == 2


def test_search_m4_n2(table_spec):
    reports = search(4, 2, table_spec)
    assert [str(r.canonical) for r in reports] == ["0101", "0011"]
    assert [r.consecutive_zero_run for r in reports] == [1, 2]
    for r in reports:
        assert r.J == pytest.approx(gap_error_floor(r.consecutive_zero_run + 1), rel=0.02)
    assert len(reports[1].rotations) == 4


def test_failed_class_is_reported(table_spec, monkeypatch):
    real_design = pattern_search.design

    def flaky_design(spec, **kwargs):
        if str(spec.pattern) == "0101":
            raise RiccatiFailure(0.5, "forced")
        return real_design(spec, **kwargs)

    monkeypatch.setattr(pattern_search, "design", flaky_design)
    reports = search(4, 2, table_spec, workers=1)
    assert [str(r.canonical) for r in reports] == ["0011", "0101"]
    assert reports[0].ok
    assert not reports[1].ok
    assert "RiccatiFailure" in reports[1].error
    assert "failed" in format_table(reports)


def test_report_exports(tmp_path):
    reports = [
        PatternReport(DecimationPattern.from_string("0101"),
                      all_rotations(DecimationPattern.from_string("0101")), 0.15, 1, gamma=0.1501),
        PatternReport(DecimationPattern.from_string("0011"),
                      all_rotations(DecimationPattern.from_string("0011")), math.nan, 2, error="boom"),
    ]
    write_reports_csv(tmp_path / "r.csv", reports)
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "pattern,rotations,consecutive_zero_run,J,error"
    assert lines[1].startswith("0101,2,1,0.14999")
    assert lines[2] == "0011,4,2,,boom"

    reports[1].error = "RiccatiFailure: residual 1e-3, tolerance 1e-8"
    write_reports_csv(tmp_path / "quoted.csv", reports)
    with open(tmp_path / "quoted.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert all(len(row) == 5 for row in rows)
    assert rows[2][4] == reports[1].error

    write_reports_json(tmp_path / "r.json", reports, {"solver": {}})
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["reports"][0]["rotations"] == ["0101", "1010"]
    assert data["reports"][1]["J"] is None
    assert "config" in data


@pytest.mark.slow
def test_search_is_worker_independent(table_spec):
    serial = search(7, 4, table_spec, workers=1)
    parallel = search(7, 4, table_spec, workers=2)
    assert [(str(r.canonical), r.J) for r in serial] == [(str(r.canonical), r.J) for r in parallel]


@pytest.mark.slow
def test_m5_sweep(table_spec):
    J = {}
    for N in range(1, 5):
        for r in search(5, N, table_spec):
            J[str(r.canonical)] = r.J
    # longest zero run plus one is the widest gap between retained samples
    expected = {
        "00001": gap_error_floor(5), "00011": gap_error_floor(4), "00101": gap_error_floor(3),
        "00111": gap_error_floor(3), "01011": gap_error_floor(2), "01111": gap_error_floor(2),
    }
    assert set(J) == set(expected)
    for pattern, value in expected.items():
        assert J[pattern] == pytest.approx(value, rel=0.02)
    assert abs(J["00101"] - J["00111"]) < 1e-4
    assert abs(J["01011"] - J["01111"]) < 1e-4


@pytest.mark.slow
def test_m7_n4_sweep(table_spec):
    reports = search(7, 4, table_spec)
    J = {str(r.canonical): r.J for r in reports}
    assert len(reports) == 5
    assert str(reports[0].canonical) == "0101011"
    assert J["0101011"] == pytest.approx(gap_error_floor(2), rel=0.02)
    assert J["0001111"] == pytest.approx(gap_error_floor(4), rel=0.02)
    middle = [J["0011101"], J["0010111"], J["0011011"]]
    for value in middle:
        assert value == pytest.approx(gap_error_floor(3), rel=0.02)
    assert max(middle) - min(middle) < 1e-4


@pytest.mark.slow
def test_reproduce_tables(table_spec):
    tables = reproduce_tables(table_spec, workers=2)
    assert list(tables) == ["m4_n2", "m5", "m7_n4"]
    assert [len(rows) for rows in tables.values()] == [2, 6, 5]
