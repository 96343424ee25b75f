"""Command-line interface.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numerical
consistency error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .complex import ALPHA, VR, build_alpha, build_vr
from .errors import CohomGHError, ConfigError, DataError
from .genmetric import METRIC_KINDS, generator_metric_space
from .hodge import harmonic_generators, hodge_laplacian, spectrum
from .ingest import jitter, load_inputs, validate_cloud, write_xyz
from .pipeline import RunConfig, parse_jitter, run_pipeline
from .synthetic import synthetic_lattice
from .ultra import dendrogram, subdominant_ultrametric, to_newick, ugh


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(M) -> str:
    buf = io.StringIO()
    M = np.asarray(M, dtype=float)
    if M.size:
        np.savetxt(buf, np.atleast_2d(M), delimiter=",", fmt="%.17g")
    return buf.getvalue()


def _read_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not text.strip():
        return np.zeros((0, 0))
    try:
        M = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataError(f"{path}: not a numeric CSV matrix ({exc})") from None
    return M


def _load_cloud(args):
    try:
        sets = load_inputs(args.input)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc}") from None
    frames = [c for s in sets for c in s.frames]
    if not 0 <= args.frame < len(frames):
        raise ConfigError(f"--frame {args.frame} out of range ({len(frames)} frames)")
    cloud = frames[args.frame]
    if args.jitter:
        sigma, seed = parse_jitter(args.jitter)
        cloud = jitter(cloud, sigma, seed)
    return validate_cloud(cloud)


def _build(args):
    cloud = _load_cloud(args)
    if args.kind == VR:
        return build_vr(cloud, args.threshold, args.pmax)
    K = build_alpha(cloud, args.threshold, scale=args.alpha_scale)
    return K.skeleton(args.pmax)


def _tol(text):
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance must be a number or 'auto', got {text!r}")


def cmd_complex_build(args):
    K = _build(args)
    _emit(json.dumps(K.to_json()) + "\n", args.out)


def cmd_hodge_generators(args):
    K = _build(args)
    G = harmonic_generators(K, args.p, args.tol)
    _emit(json.dumps(G.to_json(), indent=1) + "\n", args.out)


def cmd_hodge_spectrum(args):
    K = _build(args)
    w = spectrum(hodge_laplacian(K, args.p)).eigenvalues
    _emit("eigenvalue\n" + "".join(f"{x:.17g}\n" for x in w), args.out)


def cmd_distmat(args):
    K = _build(args)
    G = harmonic_generators(K, args.p)
    prov = {"input": str(args.input), "frame": args.frame, "threshold": args.threshold, "p": args.p}
    M = generator_metric_space(G, args.metric, K, prov)
    _emit(_csv(M.dmatrix), args.out)
    meta = {"metric": M.metric_kind, "provenance": M.provenance, "report": M.report,
            "kind": K.kind, "generator_warnings": G.warnings}
    if args.meta:
        Path(args.meta).write_text(json.dumps(meta, indent=1) + "\n")
    elif args.out:
        Path(str(args.out) + ".json").write_text(json.dumps(meta, indent=1) + "\n")


def cmd_ultra_transform(args):
    U = subdominant_ultrametric(_read_matrix(args.matrix))
    _emit(_csv(U.dmatrix), args.out)
    if args.newick:
        text = to_newick(dendrogram(U)) if len(U) else ";"
        Path(args.newick).write_text(text + "\n")


def cmd_ultra_ugh(args):
    X = subdominant_ultrametric(_read_matrix(args.a))
    Y = subdominant_ultrametric(_read_matrix(args.b))
    _emit(f"{ugh(X, Y):.17g}\n", args.out)


def cmd_pipeline_run(args):
    cfg = RunConfig.from_json(args.config)
    if args.out:
        cfg.out = args.out
    if cfg.out is None:
        raise ConfigError("no output directory: set 'out' in the config or pass --out")
    result = run_pipeline(cfg)
    rep = result["report"]
    ari = rep["ari"]
    sys.stdout.write(
        f"{rep['n_structures']} structures, features {rep['feature_shape'][0]}x{rep['feature_shape'][1]}, "
        f"ARI {'n/a' if ari is None else f'{ari:.4f}'}, {rep['timings']['total']:.1f}s -> {cfg.out}\n"
    )


def cmd_pipeline_synth(args):
    constants = [float(x) for x in args.constants.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sets = synthetic_lattice(constants, args.frames, args.size, args.sigma, args.seed)
    for s in sets:
        write_xyz(s, out / f"{s.group_label}.xyz")
    config = {"inputs": ["."], "out": "results"}
    (out / "run.json").write_text(json.dumps(config, indent=1) + "\n")
    sys.stdout.write(f"wrote {len(sets)} classes x {args.frames} frames and run.json to {out}\n")


def _cloud_args(p, threshold_default=None):
    p.add_argument("--input", required=True, help="XYZ file or directory of *.xyz files")
    p.add_argument("--frame", type=int, default=0, help="frame index across all inputs (default 0)")
    p.add_argument("--kind", choices=[VR, ALPHA], default=ALPHA)
    p.add_argument("--threshold", type=float, required=threshold_default is None, default=threshold_default)
    p.add_argument("--pmax", type=int, default=2)
    p.add_argument("--alpha-scale", choices=["radius", "squared"], default="radius",
                   help="compare alpha thresholds to the circumradius or its square")
    p.add_argument("--jitter", metavar="SIGMA,SEED", help="seeded Gaussian perturbation")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohomgh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="group", required=True)

    g = sub.add_parser("complex", help="simplicial complexes").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("build", help="build a VR or alpha complex and print it as JSON")
    _cloud_args(p)
    p.set_defaults(func=cmd_complex_build)

    g = sub.add_parser("hodge", help="Hodge Laplacians").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("generators", help="harmonic generators as JSON")
    _cloud_args(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--tol", type=_tol, default=None, help="zero-eigenvalue tolerance or 'auto'")
    p.set_defaults(func=cmd_hodge_generators)
    p = g.add_parser("spectrum", help="eigenvalues of L_p as CSV")
    _cloud_args(p)
    p.add_argument("--p", type=int, default=1)
    p.set_defaults(func=cmd_hodge_spectrum)

    p = sub.add_parser("distmat", help="generator distance matrix as CSV")
    _cloud_args(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--metric", choices=METRIC_KINDS, default="l1")
    p.add_argument("--meta", help="metadata JSON path (default <out>.json when --out is set)")
    p.set_defaults(func=cmd_distmat)

    g = sub.add_parser("ultra", help="ultrametrics").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("transform", help="subdominant ultrametric of a CSV dissimilarity matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--out")
    p.add_argument("--newick", help="write the dendrogram in Newick form here")
    p.set_defaults(func=cmd_ultra_transform)
    p = g.add_parser("ugh", help="u_GH between two CSV matrices (transformed first)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ultra_ugh)

    g = sub.add_parser("pipeline", help="end-to-end clustering").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("run", help="run from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output directory")
    p.set_defaults(func=cmd_pipeline_run)
    p = g.add_parser("synth", help="write the synthetic lattice benchmark as XYZ files")
    p.add_argument("--out", required=True)
    p.add_argument("--constants", default="2.8,3.0,3.2")
    p.add_argument("--frames", type=int, default=30)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pipeline_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CohomGHError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
