import random

import pytest

from src.errors import ConfigError, ContractViolation
from src.graph import EntityFrontier
from src.reasoning import (
    EngineConfig,
    RelationSequence,
    Trajectory,
    TrajectoryStatus,
    append,
    best_trajectory,
    classify_termination,
    path_score,
    ranking_key,
)


def _path(relations, scores, trajectory_id: int = 1) -> Trajectory:
    return Trajectory(
        sequence=RelationSequence(tuple(relations)),
        frontier=EntityFrontier.of(["x"]),
        step_scores=tuple(scores),
        trajectory_id=trajectory_id,
    )


def test_append_leaves_input_untouched() -> None:
    seq = RelationSequence(("a",))
    longer = append(seq, "b")
    assert seq.relations == ("a",)
    assert longer.relations == ("a", "b")
    assert len(longer) == len(seq) + 1


def test_joined_rendering() -> None:
    assert RelationSequence().joined() == "(empty)"
    assert RelationSequence(("a", "b")).joined() == "a → b"


def test_engine_config_defaults_and_validation() -> None:
    config = EngineConfig()
    assert (config.max_depth, config.candidates_k, config.max_iterations, config.threshold) == (4, 3, 30, 0.5)
    assert EngineConfig(max_iterations=0).max_iterations == 0
    with pytest.raises(ConfigError):
        EngineConfig(threshold=1.5)
    with pytest.raises(ConfigError):
        EngineConfig(max_depth=0)
    with pytest.raises(ConfigError):
        EngineConfig(candidates_k=0)


def test_classify_checks_depth_before_expandability() -> None:
    config = EngineConfig(max_depth=2)
    assert classify_termination(_path(["a"], [0.9]), config, expandable=True) is TrajectoryStatus.ACTIVE
    assert classify_termination(_path(["a"], [0.9]), config, expandable=False) is TrajectoryStatus.TERMINATED_NO_EXPAND
    assert classify_termination(_path(["a", "b"], [0.9, 0.9]), config, expandable=False) is TrajectoryStatus.TERMINATED_DEPTH


def test_classify_rejects_settled_trajectory() -> None:
    done = _path(["a"], [0.9]).with_status(TrajectoryStatus.TERMINATED_NO_EXPAND)
    with pytest.raises(ContractViolation):
        classify_termination(done, EngineConfig(), expandable=True)


def test_terminated_trajectory_is_absorbing() -> None:
    done = _path(["a"], [0.9]).with_status(TrajectoryStatus.TERMINATED_DEPTH)
    with pytest.raises(ContractViolation):
        done.extend("b", 0.9, EntityFrontier.of(["y"]), 5)


def test_extend_records_parent_and_score() -> None:
    root = Trajectory.root(EntityFrontier.of(["t"]), "q1", 0)
    child = root.extend("r", 0.7, EntityFrontier.of(["u"]), 3)
    assert child.parent_id == 0
    assert child.trajectory_id == 3
    assert child.step_scores == (0.7,)
    assert child.question_id == "q1"
    assert root.depth == 0 and child.depth == 1


def test_step_scores_must_match_sequence() -> None:
    with pytest.raises(ContractViolation):
        _path(["a", "b"], [0.5])
    with pytest.raises(ContractViolation):
        _path(["a"], [1.2])


def test_path_score_is_mean_and_zero_for_root() -> None:
    assert path_score(_path([], [])) == 0.0
    assert path_score(_path(["a", "b"], [0.8, 0.6])) == pytest.approx(0.7)


def test_single_strong_hop_beats_two_weaker_hops() -> None:
    short = _path(["p"], [0.9], trajectory_id=1)
    long = _path(["q", "s"], [0.8, 0.8], trajectory_id=2)
    assert best_trajectory([long, short]) is short


def test_ties_prefer_shorter_then_lexicographic_then_creation() -> None:
    one_hop = _path(["z"], [0.5], trajectory_id=9)
    two_hop = _path(["a", "b"], [0.5, 0.5], trajectory_id=1)
    assert best_trajectory([two_hop, one_hop]) is one_hop
    b = _path(["b"], [0.5], trajectory_id=1)
    a = _path(["a"], [0.5], trajectory_id=2)
    assert best_trajectory([b, a]) is a


def test_best_trajectory_ignores_input_order() -> None:
    rng = random.Random(11)
    paths = [
        _path([f"r{i}"], [round(rng.random(), 2)], trajectory_id=i)
        for i in range(30)
    ]
    expected = min(paths, key=ranking_key)
    for _ in range(20):
        rng.shuffle(paths)
        assert best_trajectory(paths) is expected
    assert best_trajectory([]) is None


def test_scaling_every_score_keeps_the_ranking() -> None:
    rng = random.Random(23)
    for _ in range(200):
        paths = [
            _path([f"r{i}.{j}" for j in range(n)], [rng.randint(0, 20) / 20 for _ in range(n)], trajectory_id=i)
            for i, n in enumerate(rng.randint(1, 4) for _ in range(rng.randint(1, 8)))
        ]
        # Powers of two scale floats exactly, so ties survive the scaling.
        c = 2.0 ** -rng.randint(0, 6)
        scaled = [_path(p.sequence.relations, [s * c for s in p.step_scores], p.trajectory_id) for p in paths]
        assert best_trajectory(scaled).trajectory_id == best_trajectory(paths).trajectory_id
        order = [p.trajectory_id for p in sorted(paths, key=ranking_key)]
        assert [p.trajectory_id for p in sorted(scaled, key=ranking_key)] == order
