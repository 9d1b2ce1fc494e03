import logging
import time
from concurrent.futures import Executor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator

from config import BaseAppSettings
from metric import MetricField, SpacetimePoint
from schemas import ErrorBarSchema, ScenarioSchema, VerdictRow
from storages import ReportStorageInterface


logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Everything one command run shares: the loaded scenario, its metric and where reports go."""

    command: str
    scenario: ScenarioSchema
    metric: MetricField
    points: list[SpacetimePoint]
    settings: BaseAppSettings
    storage: ReportStorageInterface
    executor: Executor
    force: bool = False
    wall_times: dict[str, float] = field(default_factory=dict)
    error_bars: dict[str, ErrorBarSchema] = field(default_factory=dict)
    verdicts: list[VerdictRow] = field(default_factory=list)

    @contextmanager
    def timed(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        logger.info("Running %s.", name)
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.wall_times[name] = self.wall_times.get(name, 0.0) + elapsed
            logger.info("Finished %s in %.2fs.", name, elapsed)

    def record_error_bars(self, prefix: str, error_bars: dict[str, ErrorBarSchema]) -> None:
        for name, bar in error_bars.items():
            self.error_bars[f"{prefix}.{name}"] = bar
