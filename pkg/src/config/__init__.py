from config.settings import BaseAppSettings
from config.dependencies import (
    get_settings,
    get_worker_pool,
    get_report_storage,
    get_summary_renderer,
    InlineExecutor,
)
