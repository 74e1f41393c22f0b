import json
from pathlib import Path
from typing import Callable, List, Sequence

import pytest

from src.graph import KnowledgeGraph, load_graph
from src.llm import LLMGateway, ScriptedBackend, ScriptedRule
from src.reasoning import EngineConfig

FIXTURES_DIR = Path(__file__).parent / "fixtures"
DEMO_DIR = Path(__file__).resolve().parent.parent / "data" / "demo"


def _no_sleep(_: float) -> None:
    pass


def _build_gateway(rules: Sequence[dict], question_id: str = "q") -> LLMGateway:
    backend = ScriptedBackend([ScriptedRule.from_dict(r, i) for i, r in enumerate(rules)])
    return LLMGateway(backend, sleep=_no_sleep).for_question(question_id)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def demo_dir() -> Path:
    return DEMO_DIR


@pytest.fixture
def titanic_graph() -> KnowledgeGraph:
    return load_graph(FIXTURES_DIR / "titanic.tsv")


@pytest.fixture
def titanic_rules() -> List[dict]:
    with open(FIXTURES_DIR / "titanic_rules.json", encoding="utf-8") as fh:
        return json.load(fh)["rules"]


@pytest.fixture
def titanic_config() -> EngineConfig:
    return EngineConfig(max_depth=2, candidates_k=3, threshold=0.5)


@pytest.fixture
def scripted_gateway() -> Callable[..., LLMGateway]:
    """Factory: scripted_gateway(rules, question_id="q") -> gateway with a fresh ledger and no backoff sleep."""
    return _build_gateway


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, object], Path]:
    def _write(name: str, payload: object) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
