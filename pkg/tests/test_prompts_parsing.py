import random
import string
from pathlib import Path

import pytest

from src.errors import ConfigError, ParseError, TemplateError
from src.llm import (
    PLACEHOLDERS,
    PromptKind,
    PromptLibrary,
    format_bullets,
    format_relation_set,
    parse_relation_list,
    parse_score_map,
    render_prompt,
    unwrap_text,
)

_PROSE = string.ascii_letters + string.digits + " .,:;!?-\n"


def _prose(rng: random.Random) -> str:
    return "".join(rng.choice(_PROSE) for _ in range(rng.randint(0, 60)))


def _relation(rng: random.Random) -> str:
    return f"{rng.choice(['film', 'people', 'music', 'location'])}.{rng.choice(['x', 'y', 'z'])}_{rng.randint(0, 999)}"


# ==================== Templates ====================

def test_every_kind_declares_its_placeholders() -> None:
    library = PromptLibrary()
    for kind in PromptKind:
        assert library.get(kind).fields == PLACEHOLDERS[kind]


def test_context_generation_renders_all_relations() -> None:
    text = render_prompt(
        PromptKind.CONTEXT_GENERATION,
        {"question": "Where was the director of Titanic born?",
         "relations_list": format_relation_set(["movie.directed_by", "person.place_of_birth"])},
    )
    assert '- Path Relations: {"movie.directed_by", "person.place_of_birth"}' in text
    assert "- Question: Where was the director of Titanic born?" in text
    assert "{question}" not in text


def test_candidate_retrieval_renders_k() -> None:
    text = render_prompt(
        PromptKind.CANDIDATE_RETRIEVAL,
        {"question": "Who is the CEO of Tesla?", "context_narrative": "This is the start of the path.",
         "candidate_relations": format_relation_set(["organization.leadership"]), "k": 2},
    )
    assert text.rstrip().endswith("Output:")
    assert "- K: 2\n" in text


def test_missing_field_is_reported_by_name() -> None:
    with pytest.raises(TemplateError) as e:
        render_prompt(PromptKind.TRAJECTORY_SUMMARY, {"question": "q", "explored_path": "(empty)"})
    assert e.value.field_name == "reason_for_termination"


def test_extra_field_is_rejected() -> None:
    with pytest.raises(TemplateError) as e:
        render_prompt(PromptKind.PATTERN_EXTRACTION, {"trajectory_summaries": "- a", "question": "q"})
    assert e.value.field_name == "question"


def test_distinct_fields_render_distinct_prompts() -> None:
    base = {"question": "q", "historical_path": "(empty)", "top_k_relations": '{"a"}', "exploration_experience": "none"}
    other = dict(base, top_k_relations='{"b"}')
    assert render_prompt(PromptKind.RERANKING, base) != render_prompt(PromptKind.RERANKING, other)


def test_library_rejects_template_with_wrong_placeholders(tmp_path: Path) -> None:
    source = PromptLibrary()
    for kind in PromptKind:
        (tmp_path / kind.filename).write_text(source.get(kind).text, encoding="utf-8")
    (tmp_path / PromptKind.RERANKING.filename).write_text("Score {question}\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        PromptLibrary(tmp_path)


def test_format_bullets_quotes_each_line() -> None:
    assert format_bullets(["one", "two"]) == '    - "one"\n    - "two"'


# ==================== Parsing ====================

def test_relation_list_from_retrieval_example() -> None:
    allowed = ["organization.leadership", "organization.founders", "organization.headquarters", "organization.industry"]
    text = 'Sure! ["organization.leadership", "organization.founders"]'
    assert parse_relation_list(text, allowed, 2) == ["organization.leadership", "organization.founders"]


def test_relation_list_drops_unknown_duplicates_and_truncates() -> None:
    text = "['b', 'nope', 'a', 'b', 'c']"
    assert parse_relation_list(text, ["a", "b", "c"], 2) == ["b", "a"]
    assert parse_relation_list("[]", ["a"], 3) == []


def test_relation_list_without_literal_fails() -> None:
    with pytest.raises(ParseError):
        parse_relation_list("I would pick the leadership relation.", ["a"], 2)


def test_score_map_from_reranking_example() -> None:
    text = '{"person.place_of_birth": 0.9, "person.nationality": 0.2, "person.spouse": 0.1}'
    scores = parse_score_map(text, ["person.place_of_birth", "person.nationality", "person.spouse"])
    assert scores == {"person.place_of_birth": 0.9, "person.nationality": 0.2, "person.spouse": 0.1}


def test_score_map_clamps_and_fills_missing() -> None:
    scores = parse_score_map("Scores: {'a': 1.7, 'b': -0.3, 'extra': 0.5}", ["a", "b", "c"])
    assert scores == {"a": 1.0, "b": 0.0, "c": 0.0}


def test_score_map_without_literal_fails() -> None:
    with pytest.raises(ParseError):
        parse_score_map("a is best, then b", ["a", "b"])


def test_unwrap_text_strips_quotes_and_fences() -> None:
    assert unwrap_text('  "Find the director of the movie Titanic."  ') == "Find the director of the movie Titanic."
    assert unwrap_text("```\nFind it.\n```") == "Find it."
    assert unwrap_text("plain") == "plain"


def test_parsers_recover_literals_wrapped_in_prose() -> None:
    rng = random.Random(20240517)
    for _ in range(500):
        relations = list(dict.fromkeys(_relation(rng) for _ in range(rng.randint(1, 5))))
        quote = rng.choice(["'", '"'])
        literal = "[" + ", ".join(f"{quote}{r}{quote}" for r in relations) + "]"
        text = _prose(rng) + literal + _prose(rng)
        assert parse_relation_list(text, relations, len(relations)) == relations

        scores = {r: round(rng.random(), 3) for r in relations}
        body = ", ".join(f"{quote}{r}{quote}: {v}" for r, v in scores.items())
        stray = f", {quote}not.a_candidate{quote}: 0.5" if rng.random() < 0.5 else ""
        text = _prose(rng) + "{" + body + stray + "}" + _prose(rng)
        assert parse_score_map(text, relations) == scores
