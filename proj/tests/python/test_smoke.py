import math

import pytest

import chisme


def test_vector_ops():
    assert chisme.delta([3.0, 4.0], [1.0, 1.0]) == [2.0, 3.0]
    assert chisme.cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)
    assert chisme.cosine_similarity([1.0, 2.0], [2.0, 4.0]) == pytest.approx(1.0)
    assert chisme.scaled_similarity([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(0.0)
    assert chisme.scaled_similarity([0.0, 0.0], [1.0, 2.0]) == 0.5
    assert chisme.interpolate([0.0, 2.0], [2.0, 0.0], 0.5) == [1.0, 1.0]


def test_influence_pipeline():
    assert chisme.experience_influence({0: 300.0, 1: 100.0}, 100.0) == 0.25
    # perfectly aligned updates collapse to the experience share
    for alpha in (0.0, 0.25, 0.5, 0.9):
        assert chisme.combined_influence(alpha, 1.0) == pytest.approx(alpha, abs=1e-12)
    assert chisme.combined_influence(0.5, 0.0) == 0.0
    assert chisme.combined_influence(0.5, 0.5) == pytest.approx(1.0 / 3.0)
    assert chisme.similarity_heuristic(1.0) == pytest.approx(0.5)


def test_topology():
    edges = chisme.watts_strogatz_edges(6, 1.0)
    assert len(edges) == 15
    ring = chisme.watts_strogatz_edges(6, 0.0, 0.0, 1)
    assert len(ring) == 6


FAST = """
n_clients = 6
samples_mean = 30
n_classes = 4
rounds = 4
epochs = 1
batch_size = 16
"""


def test_run_experiment_deterministic():
    a = chisme.run_experiment(FAST)
    b = chisme.run_experiment(FAST)
    assert a.csv() == b.csv()
    assert a.dataset_digest == b.dataset_digest
    assert len(a.rounds) == 4
    last = a.rounds[-1]
    assert last.messages_sent == chisme.message_budget(FAST)
    assert last.mean_loss > 0.0
    assert len(last.client_loss) == 6


def test_bad_config_raises():
    with pytest.raises(RuntimeError):
        chisme.run_experiment("definitely not a config")


def test_default_config_is_described():
    text = chisme.default_config()
    assert "paradigm=chisme" in text
