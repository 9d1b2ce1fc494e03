from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel


class ReportStorageInterface(ABC):
    @abstractmethod
    def write_json(self, name: str, report: BaseModel) -> Path:
        """
        Stores a report model as indented JSON.

        :param name: File name relative to the storage root.
        :param report: The pydantic report to serialize.
        :return: Path of the written artifact.
        """
        pass

    @abstractmethod
    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
        """
        Stores a table with a fixed column order.

        :param name: File name relative to the storage root.
        :param header: Column names.
        :param rows: Table rows, one value per column.
        :return: Path of the written artifact.
        """
        pass

    @abstractmethod
    def write_text(self, name: str, text: str) -> Path:
        """
        Stores rendered text such as a summary.

        :param name: File name relative to the storage root.
        :param text: The text to write.
        :return: Path of the written artifact.
        """
        pass

    @abstractmethod
    def artifacts(self) -> list[str]:
        """
        Names of the artifacts written so far, in write order.

        :return: File names relative to the storage root.
        """
        pass
