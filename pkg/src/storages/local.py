import csv
import logging
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel

from exceptions import ReportWriteError
from storages.interfaces import ReportStorageInterface


logger = logging.getLogger(__name__)


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class LocalReportStorage(ReportStorageInterface):
    def __init__(self, root: Path):
        """
        Initialize a storage that writes artifacts below one output directory.

        :param root: Output directory; created on first write.
        """
        self._root = Path(root)
        self._written: list[str] = []

    @property
    def root(self) -> Path:
        return self._root

    def _write(self, name: str, content: str) -> Path:
        path = self._root / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(content)
        except OSError as e:
            raise ReportWriteError(f"Failed to write {path}: {e}") from e
        if name not in self._written:
            self._written.append(name)
        logger.debug("Wrote %s.", path)
        return path

    def write_json(self, name: str, report: BaseModel) -> Path:
        return self._write(name, report.model_dump_json(indent=2) + "\n")

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
        path = self._root / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_cell(value) for value in row])
        except OSError as e:
            raise ReportWriteError(f"Failed to write {path}: {e}") from e
        if name not in self._written:
            self._written.append(name)
        return path

    def write_text(self, name: str, text: str) -> Path:
        return self._write(name, text)

    def artifacts(self) -> list[str]:
        return list(self._written)
