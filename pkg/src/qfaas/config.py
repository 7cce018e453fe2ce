"""Platform configuration: JSON config file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

DEFAULT_MAX_QUBITS = 20
DEFAULT_MAX_REPLICAS = 64
DEFAULT_COLD_START_MILLIS = 500
DEFAULT_WAIT_TIMEOUT_SECONDS = 300.0

# Config-file key -> dataclass field.  Keys are the documented stable names.
_KEY_MAP = {
    "dataDir": "data_dir",
    "addr": "addr",
    "maxQubits": "max_qubits",
    "maxReplicas": "max_replicas",
    "coldStartMillis": "cold_start_millis",
    "replicaOverheadMillis": "replica_overhead_millis",
    "waitTimeoutSeconds": "wait_timeout_seconds",
    "catalogPath": "catalog_path",
    "queueSeed": "queue_seed",
    "adminToken": "admin_token",
    "uiDir": "ui_dir",
}


@dataclass
class PlatformConfig:
    data_dir: Path = field(default_factory=lambda: Path("qfaas-data"))
    addr: str = "127.0.0.1:8000"
    max_qubits: int = DEFAULT_MAX_QUBITS
    max_replicas: int = DEFAULT_MAX_REPLICAS
    cold_start_millis: int = DEFAULT_COLD_START_MILLIS
    replica_overhead_millis: int = 0
    wait_timeout_seconds: float = DEFAULT_WAIT_TIMEOUT_SECONDS
    catalog_path: Optional[Path] = None
    queue_seed: int = 0
    admin_token: Optional[str] = None
    ui_dir: Optional[Path] = None

    @classmethod
    def load(
        cls,
        path: Optional[os.PathLike] = None,
        env: Optional[Mapping[str, str]] = None,
        **overrides: Any,
    ) -> "PlatformConfig":
        """Build a config from an optional JSON file, the environment, and kwargs.

        Precedence (lowest to highest): defaults, config file, QFAAS_* environment
        variables, explicit keyword overrides.
        """
        env = os.environ if env is None else env
        values: Dict[str, Any] = {}
        if path is not None:
            raw = json.loads(Path(path).read_text())
            for key, val in raw.items():
                if key not in _KEY_MAP:
                    raise ValueError(f"unknown config key: {key}")
                values[_KEY_MAP[key]] = val
        if env.get("QFAAS_DATA"):
            values["data_dir"] = env["QFAAS_DATA"]
        if env.get("QFAAS_ADDR"):
            values["addr"] = env["QFAAS_ADDR"]
        values.update(overrides)

        cfg = cls(**values)
        cfg.data_dir = Path(cfg.data_dir)
        if cfg.catalog_path is not None:
            cfg.catalog_path = Path(cfg.catalog_path)
        if cfg.ui_dir is not None:
            cfg.ui_dir = Path(cfg.ui_dir)
        return cfg

    @property
    def host(self) -> str:
        return self.addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.addr.rsplit(":", 1)[1])


def config_field_names() -> Dict[str, str]:
    """Documented config-file keys mapped to their internal names."""
    assert set(_KEY_MAP.values()) == {f.name for f in fields(PlatformConfig)}
    return dict(_KEY_MAP)
