from pathlib import Path

import pytest

from src.config import build_backend, build_gateway, env_overrides, resolve_run_config, with_engine
from src.errors import ConfigError
from src.llm import ScriptedBackend


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "kgtrail.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults() -> None:
    config = resolve_run_config(environ={})
    assert config.backend == "live"
    assert config.engine.max_depth == 4
    assert config.engine.candidates_k == 3
    assert config.engine.max_iterations == 30
    assert config.engine.threshold == 0.5
    assert config.retry.max_retries == 3


def test_flags_beat_environment_beat_file(tmp_path: Path) -> None:
    path = _write(tmp_path, "model: from-file\nbase_url: http://file\nengine:\n  max_depth: 3\n  threshold: 0.6\n")
    environ = {"KGTRAIL_MODEL": "from-env"}
    config = resolve_run_config(path, {"threshold": 0.7}, environ)
    assert config.model == "from-env"
    assert config.base_url == "http://file"
    assert config.engine.max_depth == 3
    assert config.engine.threshold == 0.7


def test_presets_and_explicit_k(tmp_path: Path) -> None:
    assert resolve_run_config(flags={"preset": "cwq"}, environ={}).engine.candidates_k == 4
    assert resolve_run_config(flags={"preset": "webqsp"}, environ={}).engine.candidates_k == 3
    assert resolve_run_config(flags={"preset": "cwq", "candidates_k": 2}, environ={}).engine.candidates_k == 2


def test_ablations() -> None:
    config = resolve_run_config(flags={"ablation": "no-all"}, environ={})
    assert (config.engine.use_context, config.engine.use_priors) == (False, False)
    config = resolve_run_config(flags={"ablation": "no-priors"}, environ={})
    assert (config.engine.use_context, config.engine.use_priors) == (True, False)


def test_unknown_keys_are_rejected(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        resolve_run_config(_write(tmp_path, "temperature: 0.2\n"), environ={})
    with pytest.raises(ConfigError):
        resolve_run_config(_write(tmp_path, "engine:\n  beam_width: 3\n"), environ={})
    with pytest.raises(ConfigError):
        resolve_run_config(flags={"preset": "freebase"}, environ={})


def test_invalid_values_are_config_errors(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        resolve_run_config(flags={"threshold": 2.0}, environ={})
    with pytest.raises(ConfigError):
        resolve_run_config(flags={"backend": "scripted"}, environ={})
    with pytest.raises(ConfigError):
        resolve_run_config(_write(tmp_path, "- just\n- a list\n"), environ={})


def test_api_key_fallback_and_redaction() -> None:
    assert env_overrides({"OPENAI_API_KEY": "sk-openai"})["api_key"] == "sk-openai"
    assert env_overrides({"OPENAI_API_KEY": "sk-openai", "KGTRAIL_API_KEY": "sk-own"})["api_key"] == "sk-own"
    config = resolve_run_config(environ={"KGTRAIL_API_KEY": "sk-secret"})
    assert config.api_key == "sk-secret"
    assert config.to_dict()["api_key"] == "***"
    assert "sk-secret" not in str(config.to_dict())


def test_scripted_backend_from_demo_config(demo_dir: Path) -> None:
    config = resolve_run_config(
        demo_dir / "config.yaml", {"scripted_rules": str(demo_dir / "rules.json")}, environ={}
    )
    assert config.backend == "scripted"
    assert isinstance(build_backend(config), ScriptedBackend)
    gateway = build_gateway(config)
    assert gateway.policy.max_retries == 3


def test_with_engine_replaces_only_engine_fields() -> None:
    config = resolve_run_config(environ={})
    changed = with_engine(config, max_depth=2)
    assert changed.engine.max_depth == 2
    assert changed.model == config.model
    assert config.engine.max_depth == 4
