"""Configuration: a single TOML file with TUTOR_* / PROVIDER_* env overrides.

Invalid values fail fast with a field-level report rather than surfacing
mid-request.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .analysis import AnalysisPolicy
from .scoring import FusionWeights


class ConfigError(Exception):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    idle_timeout_minutes: int = 30
    data_dir: str = "./tutor-data"
    provider_kind: str = "mock"  # mock | http
    provider_base_url: str = ""
    provider_api_key: str = ""
    provider_model: str = ""
    w_wb: float = 0.4
    w_llm: float = 0.6
    wb_statistic: str = "median"
    min_new_learner_messages: int = 3
    confidence_threshold: float = 0.3
    max_areas: int = 3
    wordbank_path: Optional[str] = None
    resources_path: Optional[str] = None

    def weights(self) -> FusionWeights:
        return FusionWeights(w_wb=self.w_wb, w_llm=self.w_llm)

    def policy(self) -> AnalysisPolicy:
        return AnalysisPolicy(
            min_new_learner_messages=self.min_new_learner_messages,
            confidence_threshold=self.confidence_threshold,
            max_areas=self.max_areas,
        )


_ENV_OVERRIDES = {
    "TUTOR_HOST": ("host", str),
    "TUTOR_PORT": ("port", int),
    "TUTOR_DATA_DIR": ("data_dir", str),
    "TUTOR_PROVIDER": ("provider_kind", str),
    "TUTOR_WORDBANK": ("wordbank_path", str),
    "TUTOR_RESOURCES": ("resources_path", str),
    "PROVIDER_BASE_URL": ("provider_base_url", str),
    "PROVIDER_API_KEY": ("provider_api_key", str),
    "PROVIDER_MODEL": ("provider_model", str),
}


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> AppConfig:
    """Load config from a TOML file plus env overrides; validate all fields."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)

    config = AppConfig()
    problems: list[str] = []

    def take(section: str, key: str, attr: str, cast):
        value = raw.get(section, {}).get(key)
        if value is None:
            return
        try:
            setattr(config, attr, cast(value))
        except (TypeError, ValueError):
            problems.append(f"{section}.{key}: bad value {value!r}")

    take("server", "host", "host", str)
    take("server", "port", "port", int)
    take("server", "idle_timeout_minutes", "idle_timeout_minutes", int)
    take("data", "dir", "data_dir", str)
    take("data", "wordbank", "wordbank_path", str)
    take("data", "resources", "resources_path", str)
    take("provider", "kind", "provider_kind", str)
    take("provider", "base_url", "provider_base_url", str)
    take("provider", "api_key", "provider_api_key", str)
    take("provider", "model", "provider_model", str)
    take("scoring", "w_wb", "w_wb", float)
    take("scoring", "w_llm", "w_llm", float)
    take("scoring", "wb_statistic", "wb_statistic", str)
    take("analysis", "min_new_learner_messages", "min_new_learner_messages", int)
    take("analysis", "confidence_threshold", "confidence_threshold", float)
    take("analysis", "max_areas", "max_areas", int)

    for env_key, (attr, cast) in _ENV_OVERRIDES.items():
        if env_key in env and env[env_key] != "":
            try:
                setattr(config, attr, cast(env[env_key]))
            except (TypeError, ValueError):
                problems.append(f"env {env_key}: bad value {env[env_key]!r}")

    # field-level validation
    if not 1 <= config.port <= 65535:
        problems.append(f"server.port: {config.port} outside 1-65535")
    if config.provider_kind not in ("mock", "http"):
        problems.append(f"provider.kind: {config.provider_kind!r} not mock|http")
    if config.provider_kind == "http" and not config.provider_base_url:
        problems.append("provider.base_url: required when provider.kind = http")
    if config.wb_statistic not in ("median", "average"):
        problems.append(f"scoring.wb_statistic: {config.wb_statistic!r} not median|average")
    if config.w_wb < 0 or config.w_llm < 0 or abs(config.w_wb + config.w_llm - 1.0) > 1e-9:
        problems.append(f"scoring weights: ({config.w_wb}, {config.w_llm}) must be >= 0 and sum to 1")
    if config.min_new_learner_messages < 1:
        problems.append("analysis.min_new_learner_messages: must be >= 1")
    if not 0.0 <= config.confidence_threshold <= 1.0:
        problems.append("analysis.confidence_threshold: must be in [0, 1]")
    if config.max_areas < 1:
        problems.append("analysis.max_areas: must be >= 1")
    if config.idle_timeout_minutes < 1:
        problems.append("server.idle_timeout_minutes: must be >= 1")

    if problems:
        raise ConfigError(problems)
    return config
