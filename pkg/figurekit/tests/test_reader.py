import math

import pytest

from figurekit.reader import (
    CSV_V1_COLUMNS,
    NoRowsError,
    SchemaError,
    read_scan,
)

from conftest import ETA_ROWS, MU_ROWS, row


def test_parses_full_scan(write_csv):
    table = read_scan(write_csv(ETA_ROWS))
    assert table.scan_var == "eta"
    assert len(table) == 5
    assert table.rows[0].lp_min == pytest.approx(0.241479)
    assert table.rows[0].lp_max == pytest.approx(9.939236)
    assert table.rows[0].seed == 0
    assert table.rows[0].eta == pytest.approx(10.0)
    assert table.rows[-1].status == "optimal"
    assert table.column("value") == pytest.approx([10, 1, 0.5, 0.2, 0.001])


def test_widths_follow_bounds(write_csv):
    table = read_scan(write_csv(ETA_ROWS))
    widths = table.widths()
    assert widths[0] == pytest.approx(9.939236 - 0.241479)
    # ladder narrows monotonically in this fixture
    assert all(a >= b for a, b in zip(widths, widths[1:]))


def test_header_only_raises_no_rows(write_csv):
    with pytest.raises(NoRowsError, match="no rows"):
        read_scan(write_csv([]))


def test_empty_file_is_schema_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaError, match="no header"):
        read_scan(path)


def test_renamed_header_names_offending_column(write_csv):
    header = list(CSV_V1_COLUMNS)
    header[header.index("lp_min")] = "lpmin"
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv(ETA_ROWS, header=header))
    assert err.value.column == "lp_min"
    assert "lp_min" in str(err.value)


def test_extra_header_column_is_named(write_csv):
    header = list(CSV_V1_COLUMNS) + ["note"]
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv(ETA_ROWS, header=header))
    assert err.value.column == "note"


def test_missing_header_column_is_named(write_csv):
    header = list(CSV_V1_COLUMNS)[:-1]
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv(ETA_ROWS, header=header))
    assert err.value.column == "runtime_ms"


def test_bad_float_names_column(write_csv):
    bad = [row("eta", "oops", eta="1", lp_min="1", lp_max="2")]
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv(bad))
    assert err.value.column == "value"


def test_required_cell_must_not_be_empty(write_csv):
    bad = [row("eta", "", eta="1", lp_min="1", lp_max="2")]
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv(bad))
    assert err.value.column == "value"


def test_short_row_is_schema_error(write_csv):
    bad = [row("eta", "1", eta="1")[:-1]]
    with pytest.raises(SchemaError, match="10 cells"):
        read_scan(write_csv(bad))


def test_mixed_scan_vars_rejected(write_csv):
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv([ETA_ROWS[0], MU_ROWS[0]]))
    assert err.value.column == "scan_var"


def test_unknown_scan_var_rejected(write_csv):
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv([row("zeta", "1")]))
    assert err.value.column == "scan_var"


def test_failed_row_becomes_gap(write_csv):
    rows = [
        ETA_ROWS[0],
        row("eta", "1", eta="1", status="error"),
        ETA_ROWS[2],
    ]
    table = read_scan(write_csv(rows))
    assert table.rows[1].lp_min is None
    assert not table.rows[1].solved
    lo = table.column("lp_min")
    assert math.isnan(lo[1]) and math.isfinite(lo[0]) and math.isfinite(lo[2])
    assert math.isnan(table.widths()[1])


def test_non_optimal_row_masked_even_with_cells(write_csv):
    # a bound written next to a failure status must still read as a gap
    rows = [row("eta", "1", eta="1", lp_min="1.0", lp_max="2.0", status="cycled")]
    table = read_scan(write_csv(rows))
    assert math.isnan(table.column("lp_min")[0])
    assert table.rows[0].lp_min == pytest.approx(1.0)


def test_bad_seed_names_column(write_csv):
    with pytest.raises(SchemaError) as err:
        read_scan(write_csv([row("eta", "1", eta="1", seed="x")]))
    assert err.value.column == "seed"
