import os
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path

from dotenv import load_dotenv

from config.settings import TestingSettings, Settings, BaseAppSettings
from storages import ReportStorageInterface, LocalReportStorage
from summary_service.renderer import SummaryRenderer


load_dotenv()


class InlineExecutor(Executor):
    """Runs submitted work in the calling process; keeps `map` ordering semantics."""

    def map(self, fn, *iterables, timeout=None, chunksize=1):
        return map(fn, *iterables)

    def submit(self, fn, /, *args, **kwargs):
        raise NotImplementedError("InlineExecutor only supports map().")


def get_settings() -> BaseAppSettings:
    environment = os.getenv("ENVIRONMENT", "developing")
    if environment == "testing":
        return TestingSettings()
    return Settings()


def get_worker_pool(workers: int | None = None, settings: BaseAppSettings | None = None) -> Executor:
    settings = settings or get_settings()
    workers = workers if workers is not None else settings.WORKERS
    if workers <= 1:
        return InlineExecutor()
    return ProcessPoolExecutor(max_workers=workers)


def get_report_storage(out_dir: str | Path) -> ReportStorageInterface:
    return LocalReportStorage(root=Path(out_dir))


def get_summary_renderer(settings: BaseAppSettings | None = None) -> SummaryRenderer:
    settings = settings or get_settings()
    return SummaryRenderer(templates_dir=settings.TEMPLATES_DIR)
