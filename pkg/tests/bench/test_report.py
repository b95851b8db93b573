import json

from vcstack.bench import analytic
from vcstack.bench.report import ExperimentReport, ReportRow, format_report


def sample_report():
    return ExperimentReport(
        title="sample",
        rows=[
            ReportRow(
                nu_or_c="0.5",
                published_nodes=3,
                update_info_bytes=153.0,
                ops=4,
                seconds=0.25,
                display={"nu": "0.5", "time (s)": "0.25"},
            )
        ],
        notes=["a note"],
    )


def test_csv_and_json_carry_the_same_values():
    report = analytic.analytic_table2()
    data = json.loads(format_report(report, "json"))
    lines = format_report(report, "csv").strip().splitlines()

    assert lines[0] == "nu_or_c,published_nodes,update_info_bytes,ops,seconds"
    assert len(lines) == len(data["rows"]) + 1
    for line, row in zip(lines[1:], data["rows"]):
        cells = line.split(",")
        assert float(cells[0]) == float(row["nu_or_c"])
        assert int(cells[1]) == row["published_nodes"]
        assert float(cells[2]) == row["update_info_bytes"]
        assert int(cells[3]) == row["ops"]
        assert float(cells[4]) == row["seconds"]


def test_render_keeps_printed_cells():
    text = analytic.analytic_table3().render()
    assert "25.20" in text
    assert "504.00" in text
    assert text.startswith("### Homomorphic tree (lattice)")


def test_sample_report():
    report = sample_report()
    text = format_report(report, "table")
    assert "| nu" in text
    assert "  * a note" in text
    assert "passed" not in json.loads(report.to_json_report())

    report.passed = True
    assert json.loads(report.to_json_report())["passed"] is True
