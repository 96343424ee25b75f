from __future__ import annotations

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from cohomgh.cluster import ari, kmeans
from cohomgh.errors import ConfigError


def test_k_one():
    X = np.arange(10, dtype=float)[:, None]
    c = kmeans(X, 1)
    assert np.all(c.labels == 0)


def test_k_equals_n():
    X = np.array([[0.0], [1.0], [5.0], [9.0]])
    c = kmeans(X, 4)
    assert sorted(c.labels) == [0, 1, 2, 3]
    assert c.inertia == 0


def test_two_blobs():
    X = np.array([0, 0.1, 0.2, 10, 10.1])[:, None]
    for seed in range(5):
        c = kmeans(X, 2, seed=seed, restarts=1)
        assert list(c.labels) == [0, 0, 0, 1, 1]


def test_k_too_large():
    with pytest.raises(ConfigError):
        kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(ConfigError):
        kmeans(np.zeros((3, 2)), 1, restarts=0)


def test_deterministic(rng):
    X = rng.normal(size=(40, 3))
    a, b = kmeans(X, 4, seed=3), kmeans(X, 4, seed=3)
    assert np.array_equal(a.labels, b.labels) and a.inertia == b.inertia
    assert set(a.labels) <= set(range(4))


def test_fewer_distinct_points_than_k():
    # only two distinct rows: a third cluster cannot stay populated, but the run must settle
    X = np.zeros((5, 2))
    X[3:] = 1
    c = kmeans(X, 3)
    assert c.inertia == 0 and set(c.labels) <= {0, 1, 2}
    assert c.labels[0] == c.labels[1] == c.labels[2] != c.labels[3] == c.labels[4]


def test_ari_examples():
    assert ari([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    assert ari([2, 0, 1, 1], [2, 0, 1, 1]) == 1.0


def test_ari_single_cluster_is_zero():
    truth = ["a"] * 5 + ["b"] * 5
    assert ari(truth, [0] * 10) == 0.0


def test_ari_length_mismatch():
    with pytest.raises(ConfigError):
        ari([0, 1], [0, 1, 1])


def test_ari_matches_sklearn(rng):
    for _ in range(100):
        n = int(rng.integers(2, 40))
        a = rng.integers(0, rng.integers(1, 6), n)
        b = rng.integers(0, rng.integers(1, 6), n)
        assert ari(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)
        assert ari(a, b) <= 1.0
        assert (ari(a, b) == 1.0) == (adjusted_rand_score(a, b) == 1.0)
