import io

import numpy as np
import pytest

from hfnewton.errors import DataError, LibsvmParseError
from hfnewton.problems.libsvm import dump_libsvm, load_libsvm, parse_libsvm
from hfnewton.problems.logistic import LogisticRegressionProblem
from hfnewton.settings import settings


def test_parse_basic_file():
    text = "+1 1:0.5 3:2\n-1 2:1\n\n+1 1:-1 2:1e-3 3:4\n"
    A, labels = parse_libsvm(io.StringIO(text))
    assert A.shape == (3, 3)
    np.testing.assert_array_equal(
        A.toarray(), [[0.5, 0.0, 2.0], [0.0, 1.0, 0.0], [-1.0, 1e-3, 4.0]]
    )
    np.testing.assert_array_equal(labels, [1.0, 0.0, 1.0])


def test_zero_one_labels_are_kept():
    _, labels = parse_libsvm(["0 1:1", "1 1:2"])
    np.testing.assert_array_equal(labels, [0.0, 1.0])


def test_two_label_values_larger_becomes_one():
    _, labels = parse_libsvm(["2 1:1", "1 1:2"])
    np.testing.assert_array_equal(labels, [1.0, 0.0])


def test_n_features_pads_columns():
    A, _ = parse_libsvm(["1 2:1"], n_features=5)
    assert A.shape == (1, 5)


def test_n_features_smaller_than_data_is_an_error():
    with pytest.raises(DataError):
        parse_libsvm(["1 4:1"], n_features=2)


@pytest.mark.parametrize(
    "bad_line",
    ["1 1:1 1:2", "1 3:1 2:1", "1 0:1", "1 1:abc", "1 1-2", "x 1:1", "1 a:1"],
    ids=[
        "duplicate", "decreasing", "zero-index", "bad-value", "no-colon", "bad-label", "bad-index"
    ],
)
def test_malformed_lines_report_line_number(bad_line):
    with pytest.raises(LibsvmParseError) as excinfo:
        parse_libsvm(["1 1:1", bad_line])
    assert excinfo.value.line == 2
    assert "line 2" in str(excinfo.value)


def test_more_than_two_labels_rejected():
    with pytest.raises(DataError):
        parse_libsvm(["1 1:1", "2 1:1", "3 1:1"])


def test_empty_input_rejected():
    with pytest.raises(DataError):
        parse_libsvm(io.StringIO("\n\n"))


def test_dump_then_parse_preserves_matrix():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 3)) * (rng.random((4, 3)) < 0.6)
    labels = np.array([1.0, 0.0, 1.0, 0.0])
    buffer = io.StringIO()
    dump_libsvm(A, labels, buffer)
    buffer.seek(0)
    parsed, parsed_labels = parse_libsvm(buffer, n_features=3)
    np.testing.assert_array_equal(parsed.toarray(), A)
    np.testing.assert_array_equal(parsed_labels, labels)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_libsvm(tmp_path / "nope")


def test_logistic_from_libsvm_file(tmp_path):
    path = tmp_path / "tiny"
    path.write_text("+1 1:1 2:0.5\n-1 1:-1\n+1 2:2\n")
    problem = LogisticRegressionProblem.from_libsvm(path, ell=1e-2)
    assert (problem.n, problem.m) == (2, 3)
    assert "tiny" in problem.describe()


@pytest.mark.skipif(
    not (settings.DATA_DIR / "mushrooms").is_file(), reason="mushrooms dataset not available"
)
def test_mushrooms_shape():
    A, labels = load_libsvm(settings.DATA_DIR / "mushrooms")
    assert A.shape == (8124, 112)
    assert set(np.unique(labels)) == {0.0, 1.0}


def test_dump_writes_shortest_exact_values():
    buffer = io.StringIO()
    dump_libsvm(np.array([[0.0, 0.0, 0.5], [0.1, 0.0, 1.0 / 3.0]]), np.array([1, 0]), buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "1 3:0.5"
    assert lines[1] == f"0 1:0.1 3:{1.0 / 3.0!r}"
    buffer.seek(0)
    parsed, _ = parse_libsvm(buffer, n_features=3)
    assert parsed[1, 2] == 1.0 / 3.0


def test_label_only_line_is_zero_row():
    A, labels = parse_libsvm(["-1"], n_features=2)
    np.testing.assert_array_equal(A.toarray(), [[0.0, 0.0]])
    np.testing.assert_array_equal(labels, [0.0])
