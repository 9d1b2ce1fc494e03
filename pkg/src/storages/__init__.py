from storages.interfaces import ReportStorageInterface
from storages.local import LocalReportStorage
