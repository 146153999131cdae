import pytest

from otdiag.errors import ConfigError, ParseError
from otdiag.pivots import Ordering, check_cycle, cycle, read_ordering


def one_based(pairs):
    return [(i + 1, j + 1) for i, j in pairs]


@pytest.mark.parametrize("ordering", list(Ordering))
@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_every_pair_once(ordering, n):
    pairs = cycle(ordering, n)
    assert check_cycle(pairs, n) == pairs
    assert all(i < j for i, j in pairs)


def test_row_n4():
    assert one_based(cycle("row", 4)) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_col_n4():
    assert one_based(cycle("col", 4)) == [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]


def test_row_rev_n4():
    assert one_based(cycle("row-rev", 4)) == [(3, 4), (2, 3), (2, 4), (1, 2), (1, 3), (1, 4)]


def test_col_rev_n4():
    assert one_based(cycle("col-rev", 4)) == [(1, 4), (2, 4), (3, 4), (1, 3), (2, 3), (1, 2)]


def test_diag_n4():
    assert one_based(cycle("diag", 4)) == [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)]


def test_n_too_small():
    with pytest.raises(ValueError):
        cycle("row", 1)


def test_check_cycle_rejects():
    with pytest.raises(ConfigError):
        check_cycle([(0, 1), (0, 1), (1, 2)], 3)


def test_read_ordering(tmp_path):
    p = tmp_path / "ord.txt"
    p.write_text("# custom\n2 3\n1 3  # trailing\n\n1 2\n")
    assert read_ordering(p, 3) == [(1, 2), (0, 2), (0, 1)]


@pytest.mark.parametrize("text,line", [
    ("1 2\n1 3\n2\n", 3),
    ("1 2\nx y\n2 3\n", 2),
    ("1 2\n3 1\n2 3\n", 2),
    ("1 2\n1 4\n2 3\n", 2),
])
def test_read_ordering_errors(tmp_path, text, line):
    p = tmp_path / "ord.txt"
    p.write_text(text)
    with pytest.raises(ParseError, match=f"line {line}"):
        read_ordering(p, 3)


def test_read_ordering_incomplete(tmp_path):
    p = tmp_path / "ord.txt"
    p.write_text("1 2\n1 3\n")
    with pytest.raises(ParseError, match="permutation"):
        read_ordering(p, 3)
