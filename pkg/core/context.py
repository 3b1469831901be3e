# core/context.py

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel

from core.log import log

load_dotenv()

ROOT = Path(__file__).parent.parent
PROFILE_YAML = ROOT / "config" / "profiles.yaml"
CACHE_ENV = "UCOVER_CACHE_DIR"


class SearchProfile(BaseModel):
    seed: int = 0
    stall_factor: int = 200
    max_iterations: int = 2_000_000
    restarts: int = 50
    time_limit: float = 60.0
    threads: int = 1


class ConstructProfile(BaseModel):
    seed: int = 0
    validated_max_n: int = 100
    assemble_budget: int = 100_000
    cycle_search_budget: int = 200_000
    gdd_search_budget: int = 2_000_000


class CatalogProfile(BaseModel):
    fixtures_dir: str = "catalog/fixtures"
    cache_dir: str = ".ucover-cache"
    repair_seed: int = 0
    repair_budget: int = 200_000
    repair_max_remove: int = 3


class OracleProfile(BaseModel):
    max_n: int = 6


def _read_profiles(path: Path) -> Dict[str, Any]:
    if not path.exists():
        log("config", f"{path} not found, using defaults")
        return {}
    try:
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except Exception as e:
        log("config", f"Failed to read {path.name}: {e}")
        return {}
    return data if isinstance(data, dict) else {}


class ToolkitProfile:
    def __init__(self, path: Optional[Path] = None):
        config = _read_profiles(path or PROFILE_YAML)
        toolkit = config.get("toolkit") or {}

        self.name = toolkit.get("name", "ucover")
        self.description = toolkit.get("description", "")

        self.search = SearchProfile(**(config.get("search") or {}))
        self.construct = ConstructProfile(**(config.get("construct") or {}))
        self.catalog = CatalogProfile(**(config.get("catalog") or {}))
        self.oracle = OracleProfile(**(config.get("oracle") or {}))
        self.custom_config = config.get("custom_config") or {}

    @property
    def verbose_logging(self) -> bool:
        return bool(self.custom_config.get("verbose_logging", False))

    @property
    def fixtures_dir(self) -> Path:
        p = Path(self.catalog.fixtures_dir)
        return p if p.is_absolute() else ROOT / p

    @property
    def cache_dir(self) -> Path:
        # env wins over YAML
        return Path(os.getenv(CACHE_ENV) or self.catalog.cache_dir)

    def __repr__(self):
        return f"<ToolkitProfile {self.name} ({self.search})>"


@lru_cache(maxsize=1)
def get_profile() -> ToolkitProfile:
    return ToolkitProfile()
