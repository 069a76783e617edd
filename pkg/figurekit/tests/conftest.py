import csv

import pytest

from figurekit.reader import CSV_V1_COLUMNS


def row(
    scan_var: str,
    value: str,
    *,
    eta: str = "",
    solver: str = "simplex",
    lp_min: str = "",
    lp_max: str = "",
    analytic_discrete: str = "3.8285418665211",
    analytic_closed: str = "3.82924922548",
    seed: str = "0",
    status: str = "optimal",
    runtime_ms: str = "12.000",
) -> list[str]:
    return [
        scan_var,
        value,
        eta,
        solver,
        lp_min,
        lp_max,
        analytic_discrete,
        analytic_closed,
        seed,
        status,
        runtime_ms,
    ]


# A regularization ladder: the band tightens left to right, the interval
# narrows onto the analytic value.
ETA_ROWS = [
    row("eta", "10", eta="10", lp_min="0.241479", lp_max="9.939236"),
    row("eta", "1", eta="1", lp_min="0.613007", lp_max="9.882799"),
    row("eta", "0.5", eta="0.5", lp_min="1.09448", lp_max="9.584369"),
    row("eta", "0.2", eta="0.2", lp_min="2.061627", lp_max="7.11652"),
    row("eta", "0.001", eta="0.001", lp_min="3.815471", lp_max="3.841666"),
]

MU_ROWS = [
    row("mu", "0", lp_min="0.166610", lp_max="9.876664"),
    row("mu", "0.5", lp_min="0.166610", lp_max="9.876664"),
    row("mu", "1", lp_min="0.166610", lp_max="9.876664"),
]

STRIKE_ROWS = [
    row("strike", "5", lp_min="5.0", lp_max="9.9", analytic_discrete="6.1"),
    row("strike", "10", lp_min="0.17", lp_max="9.88", analytic_discrete="3.83"),
    row("strike", "15", lp_min="0.0", lp_max="9.5", analytic_discrete="2.4"),
]


@pytest.fixture
def write_csv(tmp_path):
    """Write rows the way the producer does: csv module, CRLF, UTF-8."""

    def _write(rows, header=None, name="scan.csv"):
        path = tmp_path / name
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(list(CSV_V1_COLUMNS) if header is None else header)
            writer.writerows(rows)
        return path

    return _write
