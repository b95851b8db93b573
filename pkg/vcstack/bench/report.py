from dataclasses import dataclass, field
import json
import logging
from typing import List, Optional

from dataclasses_json import dataclass_json
import pandas as pd

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["nu_or_c", "published_nodes", "update_info_bytes", "ops", "seconds"]


@dataclass_json
@dataclass
class ReportRow:
    """One row of an analytic table or experiment.

    Attributes:
        nu_or_c: The tradeoff parameter, or the Verkle degree.
        published_nodes: Nodes broadcast in U.
        update_info_bytes: Size of U in bytes.
        ops: Group exponentiations or hash evaluations per proof update.
        seconds: Estimated or measured seconds per proof update.
        proof_bytes: Opening proof size where it varies by row.
        display: Printed cells keyed by column header.
    """

    nu_or_c: str
    published_nodes: int
    update_info_bytes: float
    ops: int
    seconds: float
    proof_bytes: Optional[int] = None
    display: dict = field(default_factory=dict)


@dataclass_json
@dataclass
class ExperimentReport:
    title: str
    rows: List[ReportRow] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    passed: Optional[bool] = None

    def columns(self) -> List[str]:
        if any(row.proof_bytes is not None for row in self.rows):
            return CSV_COLUMNS + ["proof_bytes"]
        return list(CSV_COLUMNS)

    def records(self) -> List[dict]:
        columns = self.columns()
        return [{c: getattr(row, c) for c in columns} for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(self.records(), columns=self.columns())

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False)

    def to_json_report(self) -> str:
        data = {
            "title": self.title,
            "rows": self.records(),
            "notes": self.notes,
        }
        if self.passed is not None:
            data["passed"] = self.passed
        return json.dumps(data, indent=2)

    def render(self) -> str:
        """Human table with the printed cells of each row."""
        headers: List[str] = []
        for row in self.rows:
            for key in row.display:
                if key not in headers:
                    headers.append(key)
        if headers:
            df = pd.DataFrame.from_records(
                [[row.display.get(h, "") for h in headers] for row in self.rows],
                columns=headers,
            )
        else:
            df = self.to_frame()
        table = df.to_markdown(index=False, disable_numparse=True)
        lines = [f"### {self.title}", "", table]
        if self.notes:
            lines.append("")
            lines.extend(f"  * {note}" for note in self.notes)
        return "\n".join(lines)


def format_report(report: ExperimentReport, output: str) -> str:
    if output == "json":
        return report.to_json_report()
    if output == "csv":
        return report.to_csv()
    return report.render()
