from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from src.api import create_app
from src.config import RunConfig
from src.graph import load_graph
from src.llm import ScriptedBackend
from src.memory import PriorsStore
from src.reasoning import EngineConfig

DEMO_QUESTION = "What guitar does Corey Taylor play?"


@pytest.fixture
def client(tmp_path: Path, demo_dir: Path) -> TestClient:
    rules = demo_dir / "rules.json"
    config = RunConfig(engine=EngineConfig(), backend="scripted", scripted_rules=str(rules))
    store = PriorsStore(f"sqlite:///{tmp_path / 'api.db'}")
    app = create_app(load_graph(demo_dir / "graph.tsv"), config, backend=ScriptedBackend.from_file(rules), priors_store=store)
    return TestClient(app)


def test_status(client: TestClient) -> None:
    resp = client.get("/api/status")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["graph"]["triples"] == 12
    assert client.get("/status").status_code == 200


def test_ask_returns_answer_and_ledger(client: TestClient) -> None:
    resp = client.post("/api/ask", json={"question": DEMO_QUESTION, "topics": ["Corey Taylor"], "id": "demo-1"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["entities"] == ["Bass guitar"]
    assert body["id"] == "demo-1"
    assert body["ledger"]["llm_calls"] == 6
    assert body["config"]["engine"]["max_depth"] == 4
    assert client.get("/api/status").json()["questions_answered"] == 1


def test_ask_with_overrides(client: TestClient) -> None:
    resp = client.post("/api/ask", json={"question": DEMO_QUESTION, "topics": ["Corey Taylor"], "iters": 0})
    assert resp.status_code == 200
    assert resp.json()["entities"] == []
    assert resp.json()["diagnostic"] == "no iterations run"

    resp = client.post("/api/ask", json={"question": DEMO_QUESTION, "topics": ["Corey Taylor"], "threshold": 3})
    assert resp.status_code == 400


def test_ask_input_errors(client: TestClient) -> None:
    resp = client.post("/api/ask", json={"question": DEMO_QUESTION, "topics": ["Nobody"]})
    assert resp.status_code == 400
    assert "topic not in graph" in resp.json()["error"]
    assert client.post("/api/ask", json={"question": DEMO_QUESTION, "topics": []}).status_code == 400
    assert client.post("/api/ask", json={"topics": ["Corey Taylor"]}).status_code == 422


def test_priors_are_saved_under_name(client: TestClient) -> None:
    assert client.get("/api/priors/demo").status_code == 404
    payload = {"question": DEMO_QUESTION, "topics": ["Corey Taylor"], "priors_name": "demo"}
    assert client.post("/api/ask", json=payload).status_code == 200
    assert client.get("/api/priors").json() == {"priors": ["demo"], "count": 1}
    priors = client.get("/api/priors/demo").json()
    assert priors["version"] == 1
    assert priors["summaries"][0]["reason"] == "No expandable relations"


def test_priors_endpoints_without_store(demo_dir: Path) -> None:
    rules = demo_dir / "rules.json"
    config = RunConfig(backend="scripted", scripted_rules=str(rules))
    app = create_app(load_graph(demo_dir / "graph.tsv"), config, backend=ScriptedBackend.from_file(rules))
    client = TestClient(app)
    assert client.get("/api/priors").status_code == 503
    payload = {"question": DEMO_QUESTION, "topics": ["Corey Taylor"], "priors_name": "demo"}
    assert client.post("/api/ask", json=payload).status_code == 503
