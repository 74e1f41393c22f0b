"""
Run configuration: defaults < config file (YAML or JSON) < environment < command-line flags.
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .errors import ConfigError
from .llm import LiveBackend, LLMBackend, LLMGateway, PromptLibrary, RetryPolicy, ScriptedBackend
from .llm.backends import DEFAULT_MODEL
from .reasoning import EngineConfig

logger = logging.getLogger("kgtrail.config")

BACKENDS = ("live", "scripted")

PRESETS: Dict[str, Dict[str, Any]] = {
    "webqsp": {"candidates_k": 3},
    "cwq": {"candidates_k": 4},
}

ABLATIONS: Dict[str, Dict[str, bool]] = {
    "none": {"use_context": True, "use_priors": True},
    "no-context": {"use_context": False, "use_priors": True},
    "no-priors": {"use_context": True, "use_priors": False},
    "no-all": {"use_context": False, "use_priors": False},
}

ENV_VARS = {
    "base_url": "KGTRAIL_BASE_URL",
    "model": "KGTRAIL_MODEL",
    "backend": "KGTRAIL_BACKEND",
    "scripted_rules": "KGTRAIL_SCRIPTED_RULES",
    "database_url": "KGTRAIL_DATABASE_URL",
}

_ENGINE_KEYS = {f.name for f in fields(EngineConfig)}
_RETRY_KEYS = {f.name for f in fields(RetryPolicy)}


@dataclass(frozen=True)
class RunConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    backend: str = "live"
    scripted_rules: Optional[str] = None
    model: str = DEFAULT_MODEL
    base_url: Optional[str] = None
    api_key: Optional[str] = None
    templates_dir: Optional[str] = None
    database_url: Optional[str] = None
    hits_mode: str = "top1"
    preset: Optional[str] = None
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.backend == "scripted" and not self.scripted_rules:
            raise ConfigError("scripted backend needs a rules file (--scripted-rules or KGTRAIL_SCRIPTED_RULES)")
        if self.hits_mode not in ("top1", "any"):
            raise ConfigError(f"hits_mode must be 'top1' or 'any', got {self.hits_mode!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")

    def to_dict(self) -> dict:
        """Effective configuration as embedded in reports and traces (API key redacted)."""
        data = asdict(self)
        data["api_key"] = "***" if self.api_key else None
        return data


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    return data


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    values: Dict[str, Any] = {}
    for key, var in ENV_VARS.items():
        if environ.get(var):
            values[key] = environ[var]
    api_key = environ.get("KGTRAIL_API_KEY") or environ.get("OPENAI_API_KEY")
    if api_key:
        values["api_key"] = api_key
    return values


def _split(layer: Mapping[str, Any], source: str):
    top: Dict[str, Any] = {}
    engine: Dict[str, Any] = {}
    retry: Dict[str, Any] = {}
    top_keys = {f.name for f in fields(RunConfig)} - {"engine", "retry"}
    for key, value in layer.items():
        if value is None:
            continue
        if key == "engine":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: 'engine' must be a mapping")
            unknown = set(value) - _ENGINE_KEYS
            if unknown:
                raise ConfigError(f"{source}: unknown engine keys {sorted(unknown)}")
            engine.update({k: v for k, v in value.items() if v is not None})
        elif key == "retry":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: 'retry' must be a mapping")
            unknown = set(value) - _RETRY_KEYS
            if unknown:
                raise ConfigError(f"{source}: unknown retry keys {sorted(unknown)}")
            retry.update(value)
        elif key in _ENGINE_KEYS:
            engine[key] = value
        elif key == "ablation":
            if value not in ABLATIONS:
                raise ConfigError(f"{source}: unknown ablation {value!r}; choose from {sorted(ABLATIONS)}")
            engine.update(ABLATIONS[value])
        elif key in top_keys:
            top[key] = value
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return top, engine, retry


def resolve_run_config(
    config_path: Optional[Union[str, Path]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Merge the layers. `flags` may mix top-level keys, engine field names and 'ablation';
    None values mean "not given".
    """
    layers = [
        (load_config_file(config_path) if config_path else {}, f"config file {config_path}"),
        (env_overrides(environ), "environment"),
        (dict(flags or {}), "flags"),
    ]
    top: Dict[str, Any] = {}
    engine: Dict[str, Any] = {}
    retry: Dict[str, Any] = {}
    for layer, source in layers:
        t, e, r = _split(layer, source)
        top.update(t)
        engine.update(e)
        retry.update(r)

    preset = top.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    engine_values = {**PRESETS.get(preset, {}), **engine}
    try:
        engine_config = EngineConfig(**engine_values)
        retry_policy = RetryPolicy(**retry)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    config = RunConfig(engine=engine_config, retry=retry_policy, **top)
    logger.debug("Effective config: %s", config.to_dict())
    return config


def with_engine(config: RunConfig, **changes) -> RunConfig:
    return replace(config, engine=replace(config.engine, **changes))


def build_backend(config: RunConfig) -> LLMBackend:
    if config.backend == "scripted":
        return ScriptedBackend.from_file(config.scripted_rules)
    return LiveBackend(api_key=config.api_key, base_url=config.base_url, model=config.model)


def build_gateway(config: RunConfig, backend: Optional[LLMBackend] = None) -> LLMGateway:
    library = PromptLibrary(config.templates_dir) if config.templates_dir else None
    return LLMGateway(backend or build_backend(config), library=library, policy=config.retry)
