import numpy as np
import pytest

from hfnewton.bench.profiles import (
    FAILURE_TIME,
    betas_grid,
    performance_profile,
    profile_violations,
    read_times_csv,
    taus_grid,
    write_profile_tsv,
    write_times_csv,
)


def test_grids():
    betas = betas_grid()
    assert len(betas) == 50
    assert betas[0] == pytest.approx(0.01)
    assert betas[1] == pytest.approx(0.02)
    assert betas[49] == pytest.approx(0.5)
    taus = taus_grid()
    assert len(taus) == 50
    assert taus[0] == 1.0 and taus[49] == 5.0
    assert taus[7] == pytest.approx(1 + 28 / 49)


def test_symmetric_two_solver_example():
    table = performance_profile([[1, 2], [2, 1]], taus=[1.0, 2.0], solvers=["a", "b"])
    assert table.ratios == [[1.0, 2.0], [2.0, 1.0]]
    assert table.curves["a"] == [(1.0, 0.5), (2.0, 1.0)]
    assert table.curves["b"] == [(1.0, 0.5), (2.0, 1.0)]
    assert profile_violations(table) == []


def test_failure_sentinel_keeps_curve_below_one():
    times = [[1.0, FAILURE_TIME], [2.0, 3.0], [1.5, 1.0]]
    table = performance_profile(times, solvers=["ok", "flaky"])
    assert table.ratios[0][1] > 5
    assert max(table.curve_values("flaky")) < 1.0
    assert table.curve_values("ok")[-1] == 1.0
    assert profile_violations(table) == []


def test_single_solver_profile_is_one():
    table = performance_profile([[3.0], [0.5], [7.0]])
    assert table.ratios == [[1.0], [1.0], [1.0]]
    assert set(table.curve_values("solver0")) == {1.0}


def test_invalid_times_are_rejected():
    with pytest.raises(ValueError):
        performance_profile(np.empty((0, 2)))
    with pytest.raises(ValueError):
        performance_profile([[1.0, 0.0]])
    with pytest.raises(ValueError):
        performance_profile([[1.0, 2.0]], solvers=["only-one"])


def test_profile_violations_detects_bad_tables():
    table = performance_profile([[1.0, 2.0]], solvers=["a", "b"])
    broken = table.model_copy(update={"ratios": [[1.5, 0.5]]})
    problems = profile_violations(broken)
    assert "ratio below 1" in problems
    assert any("no best solver" in p for p in problems)


def test_tsv_and_csv_outputs(tmp_path):
    table = performance_profile(
        [[1.0, 2.0], [4.0, 1.0]], taus=[1.0, 3.0], solvers=["a", "b"], problems=["p1", "p2"]
    )
    tsv = write_profile_tsv(table, tmp_path / "profile.tsv")
    lines = tsv.read_text().splitlines()
    assert lines[0] == "tau\tP_a\tP_b"
    assert lines[1] == "1.0\t0.5\t0.5"
    assert lines[2] == "3.0\t0.5\t1.0"

    csv_path = write_times_csv(table, tmp_path / "times.csv")
    problems, solvers, times = read_times_csv(csv_path)
    assert problems == ["p1", "p2"]
    assert solvers == ["a", "b"]
    np.testing.assert_array_equal(times, [[1.0, 2.0], [4.0, 1.0]])


def test_read_times_csv_errors(tmp_path):
    bad_header = tmp_path / "header.csv"
    bad_header.write_text("name,a\np,1\n")
    with pytest.raises(ValueError):
        read_times_csv(bad_header)
    short_row = tmp_path / "short.csv"
    short_row.write_text("problem,a,b\np,1\n")
    with pytest.raises(ValueError, match="line 2"):
        read_times_csv(short_row)
    text = tmp_path / "text.csv"
    text.write_text("problem,a\np,fast\n")
    with pytest.raises(ValueError, match="non-numeric"):
        read_times_csv(text)
