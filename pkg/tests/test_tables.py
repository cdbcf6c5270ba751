import math

import pytest

from zenosim.tables import Table, read_csv, write_csv


def test_rejects_ragged_rows():
    with pytest.raises(ValueError, match="columns"):
        Table(("a", "b"), [(1.0,)])


def test_column_lookup():
    table = Table(("a", "b"), [(1.0, 2.0), (3.0, 4.0)])
    assert table.column("b") == [2.0, 4.0]


def test_empty_table_writes_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(Table(("t", "value")), path)
    assert path.read_bytes() == b"t,value\n"


def test_roundtrip_is_bit_exact(tmp_path):
    awkward = [0.1, 1.0 / 3.0, 1e-300, 1e300, -0.0, 2.0 ** -52, math.pi,
               0.30000000000000004, 123456789.123456789]
    table = Table(("x", "y"), [(v, -v) for v in awkward])
    path = tmp_path / "roundtrip.csv"
    write_csv(table, path)
    parsed = read_csv(path)
    assert parsed.columns == table.columns
    for original, recovered in zip(table.rows, parsed.rows):
        for a, b in zip(original, recovered):
            assert a == b and math.copysign(1.0, a) == math.copysign(1.0, b)


def test_missing_cells_roundtrip_as_none(tmp_path):
    table = Table(("t", "N", "P_analytic", "P_mc", "P_mc_stderr"),
                  [(20.0, 1, 0.5, None, None)])
    path = tmp_path / "missing.csv"
    write_csv(table, path)
    text = path.read_text()
    assert text.splitlines()[1].endswith(",,")
    parsed = read_csv(path)
    assert parsed.rows[0][3] is None and parsed.rows[0][4] is None


def test_lf_line_endings(tmp_path):
    path = tmp_path / "lines.csv"
    write_csv(Table(("a",), [(1.0,), (2.0,)]), path)
    assert b"\r" not in path.read_bytes()


def test_integers_written_without_exponent(tmp_path):
    path = tmp_path / "ints.csv"
    write_csv(Table(("t", "N"), [(20.0, 17)]), path)
    assert path.read_text().splitlines()[1] == "20,17"
