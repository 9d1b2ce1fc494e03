import csv
import json
from unittest.mock import patch

import pytest

from exceptions import ReportWriteError
from schemas import ErrorBarSchema


@pytest.mark.unit
class TestLocalReportStorage:
    def test_write_json(self, storage):
        """
        Test writing a report model as JSON.

        Ensures the file holds the model's fields and is listed as an artifact.
        """
        path = storage.write_json("nested/bar.json", ErrorBarSchema(value=0.5, coarse_value=0.52, error=0.02))

        assert json.loads(path.read_text(encoding="utf-8"))["coarse_value"] == 0.52, "JSON content is wrong."
        assert storage.artifacts() == ["nested/bar.json"], "Artifact was not recorded."

    def test_write_csv_keeps_precision(self, storage):
        """
        Test writing a table.

        Ensures the header comes first and floats keep their full repr.
        """
        path = storage.write_csv("table.csv", ("index", "value"), [[0, 0.1 + 0.2], [1, 1.0]])

        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))

        assert rows[0] == ["index", "value"], "Header must come first."
        assert float(rows[1][1]) == 0.1 + 0.2, "Float lost precision."

    def test_artifacts_in_write_order(self, storage):
        """
        Test the artifact list after repeated writes.

        Ensures names appear once, in first-write order.
        """
        storage.write_text("b.md", "first")
        storage.write_text("a.md", "second")
        storage.write_text("b.md", "third")

        assert storage.artifacts() == ["b.md", "a.md"], "Unexpected artifact order."
        assert (storage.root / "b.md").read_text(encoding="utf-8") == "third"

    def test_write_failure(self, storage):
        """
        Test a write that fails at the file system.

        Ensures the OSError is wrapped in ReportWriteError and nothing is recorded.
        """
        with patch("builtins.open", side_effect=OSError("disk full")):
            with pytest.raises(ReportWriteError):
                storage.write_text("summary.md", "text")

        assert storage.artifacts() == [], "Failed writes must not be recorded."
