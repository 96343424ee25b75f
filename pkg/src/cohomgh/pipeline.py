"""End-to-end workflow: coordinates -> complexes -> harmonic generators ->
generator ultrametrics -> u_GH matrices -> features -> k-means -> ARI."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import predicates
from .cluster import Clustering, ari, kmeans
from .complex import ALPHA, VR, alpha_filtration, build_vr
from .errors import CohomGHError, ConfigError, ConsistencyError
from .genmetric import L1, METRIC_KINDS, generator_metric_space
from .hodge import harmonic_generators
from .ingest import PointCloud, jitter as jitter_cloud, load_inputs, validate_cloud
from .ultra import Ultrametric, is_ultrametric, subdominant_ultrametric, ugh_many

OK = "ok"
EMPTY = "empty-space-substituted"
DEFAULT_THRESHOLDS = (3.5, 4.0, 5.0, 6.0)


@dataclass
class UghMatrix:
    values: np.ndarray
    status: np.ndarray  # same shape, OK or EMPTY
    threshold: float
    metric: str
    p: int

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass
class FeatureMatrix:
    values: np.ndarray
    thresholds: list

    @property
    def shape(self):
        return self.values.shape


@dataclass
class RunConfig:
    inputs: list
    kind: str = ALPHA
    thresholds: list = field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    metric: str = L1
    p: int = 1
    kmax_dim: int = 2
    k: int = 3
    seed: int = 0
    restarts: int = 10
    jitter: tuple | None = None  # (sigma, seed)
    alpha_scale: str = "squared"
    out: str | None = None
    evaluate: bool = True

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "inputs" not in data:
            raise ConfigError("config needs 'inputs'")
        data = dict(data)
        inputs = data["inputs"]
        if isinstance(inputs, str):
            inputs = [inputs]
        if base_dir is not None:
            inputs = [str(Path(base_dir) / p) if not Path(p).is_absolute() else p for p in inputs]
        data["inputs"] = inputs
        out = data.get("out")
        if base_dir is not None and out is not None and not Path(out).is_absolute():
            data["out"] = str(Path(base_dir) / out)
        if data.get("jitter") is not None:
            j = data["jitter"]
            if isinstance(j, dict):
                j = (j["sigma"], j["seed"])
            if isinstance(j, str):
                j = parse_jitter(j)
            data["jitter"] = (float(j[0]), int(j[1]))
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, base_dir=path.parent)

    def validate(self):
        if self.kind not in (ALPHA, VR):
            raise ConfigError(f"kind must be 'alpha' or 'vr', got {self.kind!r}")
        if self.metric not in METRIC_KINDS:
            raise ConfigError(f"metric must be one of {METRIC_KINDS}, got {self.metric!r}")
        ts = [float(t) for t in self.thresholds]
        if not ts or any(not (t > 0 and math.isfinite(t)) for t in ts):
            raise ConfigError(f"thresholds must be positive and finite, got {self.thresholds}")
        if len(set(ts)) != len(ts):
            raise ConfigError("thresholds must be distinct")
        self.thresholds = ts
        if not 1 <= self.kmax_dim <= 3:
            raise ConfigError(f"kmax_dim must be in [1, 3], got {self.kmax_dim}")
        if not 0 <= self.p <= self.kmax_dim:
            raise ConfigError(f"p must be in [0, kmax_dim={self.kmax_dim}], got {self.p}")
        if self.k < 1 or self.restarts < 1:
            raise ConfigError("k and restarts must be >= 1")
        if self.alpha_scale not in ("radius", "squared"):
            raise ConfigError(f"alpha_scale must be 'radius' or 'squared', got {self.alpha_scale!r}")


def parse_jitter(text: str) -> tuple[float, int]:
    try:
        sigma, seed = text.split(",")
        return float(sigma), int(seed)
    except ValueError:
        raise ConfigError(f"jitter must be 'sigma,seed', got {text!r}") from None


def _rethrow(exc: CohomGHError, context: str):
    try:
        new = type(exc)(f"{context}: {exc}")
    except TypeError:
        return exc
    new.__cause__ = exc
    return new


class _Structure:
    """One configuration's full filtration, cut at each threshold on demand."""

    def __init__(self, cloud: PointCloud, kind: str, kmax_dim: int, alpha_scale: str,
                 max_threshold: float):
        validate_cloud(cloud)
        self.cloud = cloud
        if kind == ALPHA:
            self.full = alpha_filtration(cloud, alpha_scale).skeleton(kmax_dim)
        else:
            self.full = build_vr(cloud, max_threshold, kmax_dim)

    def ultrametric(self, threshold, metric, p, provenance):
        K = self.full.subcomplex(threshold)
        G = harmonic_generators(K, p)
        M = generator_metric_space(G, metric, K, provenance)
        U = subdominant_ultrametric(M.dmatrix, provenance)
        return U, G


def _prepare(structures, kind, kmax_dim, alpha_scale, max_threshold):
    prepared = []
    for i, cloud in enumerate(structures):
        try:
            prepared.append(_Structure(cloud, kind, kmax_dim, alpha_scale, max_threshold))
        except CohomGHError as exc:
            raise _rethrow(exc, f"complex construction, structure {i} ({_name(cloud)})") from exc
    return prepared


def _name(cloud):
    return f"{cloud.source_tag}#{cloud.frame_id}"


def assemble_ugh(spaces: list[Ultrametric], threshold: float, metric: str, p: int) -> UghMatrix:
    """Pairwise u_GH; pairs involving an empty space get the largest finite
    ok entry (0 if there is none) and are flagged. Two empty spaces are
    treated as isometric (0), also flagged."""
    n = len(spaces)
    values = np.zeros((n, n))
    status = np.full((n, n), OK, dtype=object)
    full = [i for i, S in enumerate(spaces) if len(S)]
    if full:
        sub = ugh_many([spaces[i] for i in full])
        values[np.ix_(full, full)] = sub
    fill = float(values.max()) if full else 0.0
    empty = [i for i, S in enumerate(spaces) if len(S) == 0]
    for i in empty:
        for j in range(n):
            if j == i:
                continue
            status[i, j] = status[j, i] = EMPTY
            both_empty = len(spaces[j]) == 0
            values[i, j] = values[j, i] = 0.0 if both_empty else fill
    return UghMatrix(values, status, float(threshold), metric, p)


def ugh_matrix(structures, threshold: float, metric: str = L1, p: int = 1, kind: str = ALPHA,
               kmax_dim: int = 2, alpha_scale: str = "squared", _prepared=None) -> UghMatrix:
    if len(structures) < 2:
        raise ConfigError("u_GH matrix needs at least two structures")
    prepared = _prepared or _prepare(structures, kind, kmax_dim, alpha_scale, threshold)
    spaces = []
    for i, st in enumerate(prepared):
        prov = {"structure": i, "threshold": threshold, "p": p}
        try:
            U, _ = st.ultrametric(threshold, metric, p, prov)
        except CohomGHError as exc:
            raise _rethrow(exc, f"threshold {threshold:g}, structure {i}") from exc
        spaces.append(U)
    return assemble_ugh(spaces, threshold, metric, p)


def strong_triangle_violation(M: UghMatrix) -> float:
    """Largest violation of d(x,z) <= max(d(x,y), d(y,z)) over all-ok triples."""
    V = M.values
    ok = M.status == OK
    worst = 0.0
    for y in range(len(V)):
        bound = np.maximum(V[:, y][:, None], V[y, :][None, :])
        mask = ok & ok[:, y][:, None] & ok[y, :][None, :]
        if mask.any():
            worst = max(worst, float(((V - bound) * mask).max()))
    return worst


def feature_matrix(mats: list[UghMatrix]) -> FeatureMatrix:
    if not mats:
        raise ConfigError("no u_GH matrices to concatenate")
    n = mats[0].n
    if any(m.n != n for m in mats):
        raise ConfigError(f"u_GH matrices have different sizes {[m.n for m in mats]}")
    ths = [m.threshold for m in mats]
    if len(set(ths)) != len(ths):
        raise ConfigError("u_GH matrices must have distinct thresholds")
    F = np.hstack([m.values for m in mats])
    for t, m in enumerate(mats):
        assert np.array_equal(F[:, t * n:(t + 1) * n], m.values)
    return FeatureMatrix(F, ths)


def collect_structures(inputs) -> list[PointCloud]:
    clouds = []
    for path in inputs:
        for traj in load_inputs(path):
            clouds.extend(traj.frames)
    return clouds


def _fmt_threshold(t: float) -> str:
    return f"{t:g}"


def _save_matrix(path, M):
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def run_pipeline(config: RunConfig, structures: list[PointCloud] | None = None) -> dict:
    """Run every stage and (when ``config.out`` is set) write
    ugh_t<T>.csv, features.csv, labels.csv and report.json."""
    config.validate()
    timings = {}
    diagnostics = {}
    t0 = time.perf_counter()
    fallbacks_before = dict(predicates.exact_fallbacks)

    if structures is None:
        try:
            structures = collect_structures(config.inputs)
        except CohomGHError as exc:
            raise _rethrow(exc, "ingest") from exc
    if config.jitter is not None:
        sigma, seed = config.jitter
        structures = [jitter_cloud(c, sigma, seed + i) for i, c in enumerate(structures)]
    n = len(structures)
    if n < 2:
        raise ConfigError(f"need at least two structures, found {n}")
    if config.k > n:
        raise ConfigError(f"k={config.k} exceeds the number of structures {n}")
    timings["ingest"] = time.perf_counter() - t0

    t = time.perf_counter()
    prepared = _prepare(structures, config.kind, config.kmax_dim, config.alpha_scale,
                        max(config.thresholds))
    timings["complexes"] = time.perf_counter() - t

    mats = []
    per_threshold = []
    for thr in config.thresholds:
        t = time.perf_counter()
        spaces, counts, notes = [], [], []
        for i, st in enumerate(prepared):
            prov = {"structure": i, "threshold": thr, "p": config.p}
            try:
                U, G = st.ultrametric(thr, config.metric, config.p, prov)
            except CohomGHError as exc:
                raise _rethrow(exc, f"threshold {thr:g}, structure {i} ({_name(structures[i])})") from exc
            spaces.append(U)
            counts.append(len(G))
            if G.warnings:
                notes.append({"structure": i, "warnings": G.warnings})
            if len(U) and not is_ultrametric(U.dmatrix):
                raise ConsistencyError(f"structure {i}: transform did not yield an ultrametric")
        M = assemble_ugh(spaces, thr, config.metric, config.p)
        viol = strong_triangle_violation(M)
        if viol > 1e-9:
            raise ConsistencyError(f"u_GH matrix at threshold {thr:g} violates the strong triangle inequality by {viol:g}")
        mats.append(M)
        per_threshold.append({
            "threshold": thr,
            "generator_counts": counts,
            "empty_spaces": int(sum(c == 0 for c in counts)),
            "substituted_entries": int((M.status == EMPTY).sum() // 2),
            "strong_triangle_violation": viol,
            "generator_warnings": notes,
            "seconds": time.perf_counter() - t,
        })
    timings["ugh"] = sum(d["seconds"] for d in per_threshold)

    t = time.perf_counter()
    F = feature_matrix(mats)
    clustering = kmeans(F, config.k, config.seed, config.restarts)
    timings["kmeans"] = time.perf_counter() - t

    tags = [c.source_tag for c in structures]
    score = None
    if config.evaluate and len(set(tags)) >= 1:
        score = ari(tags, clustering.labels)

    diagnostics["per_threshold"] = per_threshold
    diagnostics["exact_predicate_fallbacks"] = {
        k: predicates.exact_fallbacks[k] - fallbacks_before.get(k, 0) for k in predicates.exact_fallbacks
    }
    timings["total"] = time.perf_counter() - t0

    report = {
        "config": {k: v for k, v in asdict(config).items()},
        "n_structures": n,
        "feature_shape": list(F.shape),
        "clustering": {
            "k": clustering.k,
            "inertia": clustering.inertia,
            "seed": clustering.seed,
            "restarts": clustering.restarts,
        },
        "ari": score,
        "timings": timings,
        "diagnostics": diagnostics,
    }
    result = {"report": report, "ugh": mats, "features": F, "clustering": clustering,
              "structures": structures}
    if config.out:
        write_outputs(config.out, result)
    return result


def write_outputs(out_dir, result):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for M in result["ugh"]:
        _save_matrix(out / f"ugh_t{_fmt_threshold(M.threshold)}.csv", M.values)
    _save_matrix(out / "features.csv", result["features"].values)
    clustering: Clustering = result["clustering"]
    lines = ["index,source_tag,frame_id,label"]
    for i, (c, lab) in enumerate(zip(result["structures"], clustering.labels)):
        lines.append(f"{i},{c.source_tag},{c.frame_id},{int(lab)}")
    (out / "labels.csv").write_text("\n".join(lines) + "\n")
    (out / "report.json").write_text(json.dumps(result["report"], indent=2, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    return str(x)
