from __future__ import annotations

import json

import numpy as np
import pytest

from cohomgh.complex import VR
from cohomgh.errors import ConfigError, DegeneracyError
from cohomgh.genmetric import WASSERSTEIN
from cohomgh.ingest import PointCloud, write_xyz
from cohomgh.pipeline import (
    EMPTY,
    OK,
    RunConfig,
    UghMatrix,
    assemble_ugh,
    feature_matrix,
    run_pipeline,
    strong_triangle_violation,
    ugh_matrix,
)
from cohomgh.synthetic import flatten, synthetic_lattice
from cohomgh.ultra import Ultrametric, ugh_bruteforce

TRI = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]])


def two_triangles(gap=10.0):
    return PointCloud(np.vstack([TRI, TRI + [gap, 0, 0]]))


def small_benchmark(frames=3):
    return flatten(synthetic_lattice(frames=frames))


def test_identical_structures_zero():
    c = small_benchmark(1)[0]
    M = ugh_matrix([c, c], 4.0)
    assert np.array_equal(M.values, np.zeros((2, 2)))


def test_three_structures_shape():
    s = small_benchmark(1)
    M = ugh_matrix(s, 3.5)
    assert M.values.shape == (3, 3)
    assert np.array_equal(M.values, M.values.T)
    assert np.all(np.diag(M.values) == 0)


def test_rescaled_copies_wasserstein():
    A = two_triangles()
    B = A.scaled(2.0)
    M = ugh_matrix([A, B], 2.5, WASSERSTEIN, p=1, kind=VR, kmax_dim=1)
    # each structure has two loop generators; their Wasserstein distances are d and 2d
    from cohomgh.complex import build_vr
    from cohomgh.genmetric import generator_metric_space
    from cohomgh.hodge import harmonic_generators

    K = build_vr(A, 2.5, 1)
    d = generator_metric_space(harmonic_generators(K, 1), WASSERSTEIN, K).dmatrix[0, 1]
    K2 = build_vr(B, 2.5, 1)
    d2 = generator_metric_space(harmonic_generators(K2, 1), WASSERSTEIN, K2).dmatrix[0, 1]
    assert d2 == pytest.approx(2 * d, abs=1e-9)
    X = np.array([[0, d], [d, 0]])
    Y = np.array([[0, d2], [d2, 0]])
    assert ugh_bruteforce(X, Y) == d2
    assert M.values[0, 1] == pytest.approx(2 * d, abs=1e-9)


def test_needs_two_structures():
    with pytest.raises(ConfigError):
        ugh_matrix([small_benchmark(1)[0]], 4.0)


def test_empty_policy():
    a = Ultrametric(np.array([[0, 1.0], [1.0, 0]]))
    b = Ultrametric(np.array([[0, 3.0], [3.0, 0]]))
    e = Ultrametric(np.zeros((0, 0)))
    M = assemble_ugh([a, b, e, e], 4.0, "l1", 1)
    assert M.values[0, 1] == 3.0
    assert M.values[0, 2] == M.values[1, 3] == 3.0  # largest ok entry
    assert M.values[2, 3] == 0.0
    assert M.status[0, 1] == OK and M.status[0, 2] == EMPTY and M.status[2, 3] == EMPTY
    assert M.status[0, 0] == OK
    allempty = assemble_ugh([e, e], 4.0, "l1", 1)
    assert np.array_equal(allempty.values, np.zeros((2, 2)))


def test_feature_matrix():
    mats = [UghMatrix(np.full((6, 6), t), np.full((6, 6), OK, dtype=object), t, "l1", 1) for t in (1.0, 2.0)]
    F = feature_matrix(mats)
    assert F.shape == (6, 12)
    assert np.array_equal(F.values[:, 6:], mats[1].values)
    assert np.array_equal(feature_matrix(mats[:1]).values, mats[0].values)
    with pytest.raises(ConfigError):
        feature_matrix([mats[0], UghMatrix(np.zeros((5, 5)), None, 3.0, "l1", 1)])
    with pytest.raises(ConfigError):
        feature_matrix([mats[0], mats[0]])


def test_feature_matrix_benchmark_shape():
    mats = [UghMatrix(np.zeros((300, 300)), None, t, "l1", 1) for t in (3.5, 4.0, 5.0, 6.0)]
    assert feature_matrix(mats).shape == (300, 1200)


def test_run_pipeline_outputs_and_determinism(tmp_path):
    s = small_benchmark(3)
    r1 = run_pipeline(RunConfig(inputs=[], out=str(tmp_path / "a")), s)
    r2 = run_pipeline(RunConfig(inputs=[], out=str(tmp_path / "b")), s)
    for name in ("features.csv", "labels.csv", "ugh_t3.5.csv", "ugh_t4.csv", "ugh_t5.csv", "ugh_t6.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["feature_shape"] == [9, 36]
    assert rep["ari"] == r1["report"]["ari"]
    assert set(rep["timings"]) >= {"complexes", "ugh", "kmeans", "total"}
    for M in r1["ugh"]:
        assert strong_triangle_violation(M) <= 1e-9
    assert r2["clustering"].labels.tolist() == r1["clustering"].labels.tolist()


def test_permutation_equivariance():
    s = small_benchmark(2)
    perm = np.random.default_rng(5).permutation(len(s))
    r = run_pipeline(RunConfig(inputs=[]), s)
    rp = run_pipeline(RunConfig(inputs=[]), [s[i] for i in perm])
    for M, Mp in zip(r["ugh"], rp["ugh"]):
        assert np.array_equal(Mp.values, M.values[np.ix_(perm, perm)])
    assert rp["report"]["ari"] == pytest.approx(r["report"]["ari"], abs=1e-12)


def test_k_one_ari_zero():
    r = run_pipeline(RunConfig(inputs=[], k=1), small_benchmark(2))
    assert r["report"]["ari"] == 0.0


def test_structure_error_names_structure():
    s = small_benchmark(1)
    flat = PointCloud(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [2, 1, 0]], float), [], 0, "flat")
    with pytest.raises(DegeneracyError, match="structure 3"):
        run_pipeline(RunConfig(inputs=[]), s + [flat])


def test_jitter_option_rescues_exact_lattice():
    import itertools

    grid = np.array(list(itertools.product(range(3), repeat=3)), dtype=float) * 3.0
    clouds = [PointCloud(grid, [], i, "x") for i in range(2)]
    with pytest.raises(DegeneracyError):
        run_pipeline(RunConfig(inputs=[], k=1), clouds)
    r = run_pipeline(RunConfig(inputs=[], k=1, jitter=(0.05, 0)), clouds)
    assert r["features"].shape == (2, 8)


@pytest.mark.parametrize(
    "bad",
    [
        {"kind": "cech"},
        {"metric": "l2"},
        {"thresholds": []},
        {"thresholds": [1.0, 1.0]},
        {"thresholds": [-1.0]},
        {"kmax_dim": 4},
        {"p": 3, "kmax_dim": 2},
        {"k": 0},
        {"alpha_scale": "diameter"},
    ],
)
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig(inputs=["x"], **bad).validate()


def test_config_from_json(tmp_path):
    for s in synthetic_lattice(frames=2):
        write_xyz(s, tmp_path / f"{s.group_label}.xyz")
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({"inputs": ["."], "thresholds": [3.5, 5], "jitter": "0.01,3"}))
    cfg = RunConfig.from_json(cfg_path)
    assert cfg.inputs == [str(tmp_path / ".")] and cfg.jitter == (0.01, 3)
    r = run_pipeline(cfg)
    assert r["report"]["n_structures"] == 6
    tags = {c.source_tag for c in r["structures"]}
    assert tags == {"a2.8", "a3", "a3.2"}
    cfg_path.write_text(json.dumps({"inputs": ["."], "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        RunConfig.from_json(cfg_path)
