"""
Result tables
"""

import json
import math

import numpy as np
import pytest

from results import ResultTable, json_ready


@pytest.fixture
def table():
    table = ResultTable(columns=("probe", "s", "qfi", "ok", "note"), name="demo")
    table.add_row(probe="coherent", s=0, qfi=np.float64(0.1) + np.float64(0.2), ok=True)
    table.add_row(probe="squeezed", s=1.73, qfi=1.2345678901234567e13, ok=np.bool_(False), note="x")
    return table


@pytest.mark.unit
class TestResultTable:
    def test_rows_keep_column_order(self, table):
        assert list(table.rows[0]) == ["probe", "s", "qfi", "ok", "note"]
        assert table.rows[0]["note"] is None
        assert table.column("probe") == ["coherent", "squeezed"]

    def test_numpy_scalars_become_builtins(self, table):
        assert type(table.rows[0]["qfi"]) is float
        assert table.rows[1]["ok"] is False

    def test_unknown_column(self, table):
        with pytest.raises(ValueError):
            table.add_row(colour="red")

    def test_csv_layout(self, table):
        lines = table.to_csv().split("\n")
        assert lines[0] == "probe,s,qfi,ok,note"
        assert lines[1] == "coherent,0,0.30000000000000004,true,"
        assert lines[-1] == ""
        assert "\r" not in table.to_csv()

    def test_csv_reads_back_exactly(self, table):
        parsed = ResultTable.from_csv(table.to_csv())
        assert parsed.rows == table.rows

    def test_json_payload(self, table):
        payload = json.loads(table.render("json"))
        assert payload["name"] == "demo"
        assert payload["columns"] == ["probe", "s", "qfi", "ok", "note"]
        assert payload["rows"][1]["qfi"] == 1.2345678901234567e13

    def test_unknown_format(self, table):
        with pytest.raises(ValueError):
            table.render("xlsx")

    def test_write(self, table, tmp_path):
        path = tmp_path / "out.csv"
        table.write(path)
        assert path.read_bytes().decode("utf-8") == table.to_csv()

    def test_json_writes_non_finite_values_as_null(self):
        table = ResultTable(columns=("crb", "ratio", "note"))
        table.add_row(crb=math.inf, ratio=np.float64("nan"), note="degenerate")
        text = table.to_json()
        assert "Infinity" not in text and "NaN" not in text
        row = json.loads(text)["rows"][0]
        assert row == {"crb": None, "ratio": None, "note": "degenerate"}

    def test_csv_keeps_non_finite_values(self):
        table = ResultTable(columns=("crb",))
        table.add_row(crb=math.inf)
        assert ResultTable.from_csv(table.to_csv()).rows == [{"crb": math.inf}]


@pytest.mark.unit
def test_json_ready_walks_nested_payloads():
    payload = {"runs": [{"qcrb": -math.inf, "trials": np.int64(3)}], "pair": (1.5, math.nan)}
    assert json_ready(payload) == {"runs": [{"qcrb": None, "trials": 3}], "pair": [1.5, None]}
