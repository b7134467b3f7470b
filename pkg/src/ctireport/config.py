"""Runtime configuration.

Defaults ship as package data; deployments can point CTIREPORT_CONFIG (or
the CLI --config flag) at an overriding JSON file. The routing section is
versioned so rule changes do not require code changes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

CONFIG_ENV = "CTIREPORT_CONFIG"


@dataclass(frozen=True)
class RewriteConfig:
    provider: str = "passthrough"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "CTIREPORT_API_KEY"
    rate_in: str = "0.0000015"
    rate_out: str = "0.000002"
    threshold: float = 0.98
    retries: int = 1
    max_in_flight: int = 4
    transcript_path: str = ""


@dataclass(frozen=True)
class Config:
    version: int = 1
    ioc_route_types: tuple[str, ...] = ()
    ttp_route_types: tuple[str, ...] = ("attack-pattern",)
    rewrite: RewriteConfig = field(default_factory=RewriteConfig)


def _default_payload() -> dict:
    text = resources.files("ctireport").joinpath("config", "default.json") \
        .read_text("utf-8")
    return json.loads(text)


def load_config(path: Optional[str | Path] = None) -> Config:
    payload = _default_payload()
    override_path = path or os.environ.get(CONFIG_ENV)
    if override_path:
        override = json.loads(Path(override_path).read_text(encoding="utf-8"))
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(payload.get(key), dict):
                payload[key].update(value)
            else:
                payload[key] = value

    routing = payload.get("routing", {})
    rewrite_raw = dict(payload.get("rewrite", {}))
    rewrite = RewriteConfig(**{
        k: rewrite_raw[k] for k in RewriteConfig.__dataclass_fields__
        if k in rewrite_raw
    })
    return Config(
        version=payload.get("version", 1),
        ioc_route_types=tuple(routing.get("ioc_route_types", ())),
        ttp_route_types=tuple(routing.get("ttp_route_types", ("attack-pattern",))),
        rewrite=rewrite,
    )
