import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings


load_dotenv()


class BaseAppSettings(BaseSettings):
    BASE_DIR: Path = Path(__file__).parent.parent
    TEMPLATES_DIR: Path = BASE_DIR / "summary_service" / "templates"
    SCENARIOS_DIR: Path = BASE_DIR / "scenarios"
    OUTPUT_DIR: Path = Path(os.getenv("NULLCONE_OUTPUT_DIR", "out"))

    TOOL_VERSION: str = "0.1.0"
    LOG_LEVEL: str = os.getenv("NULLCONE_LOG_LEVEL", "INFO")

    WORKERS: int = int(os.getenv("NULLCONE_WORKERS", 1))

    S_FLOOR: float = 1e-3
    SIMPSON_PANELS: int = 8

    # 3/2 from the deformation contraction, 4 from the component bound of the Bel-Robinson tensor
    GRONWALL_CONSTANT: float = 6.0


class Settings(BaseAppSettings):
    pass


class TestingSettings(BaseAppSettings):
    WORKERS: int = 1
    SIMPSON_PANELS: int = 6
