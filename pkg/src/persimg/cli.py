"""Command line entry point: ``persimg <subcommand> ...``.

Typical pipeline::

    persimg generate --dataset shapes --per-class 10 --points 200 --noise 0.05 --out clouds/
    persimg persist clouds/ --mode rips --max-dim 1 --out diagrams/
    persimg distmat diagrams/ --representation pi --metric l2 --out dm.csv
    persimg cluster dm.csv --k 6 --restarts 100 --out clustering.json
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import shutil
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from . import io
from .core import ParameterError, StructuralError
from .datasets import DEFAULT_LTM_RS, GENERATOR, SHAPE_CLASSES, generate_ltm, generate_shapes
from .filtration import cubical_persistence, rips_persistence
from .image import PersistenceImager
from .metrics import DIAGRAM_METRICS, MetricError, build_distance_matrix
from .ml import clustering_accuracy, kmedoids, parameter_sweep
from .stability import verify_stability

MANIFEST = "manifest.json"


def _dump(obj, path: Optional[str]):
    text = json.dumps(obj, indent=2, default=float)
    if path:
        Path(path).write_text(text + "\n")
    print(text)


def _csv_inputs(path: Path) -> List[Path]:
    if path.is_dir():
        return sorted(p for p in path.glob("*.csv"))
    return [path]


def _load_manifest(directory: Path, explicit: Optional[str] = None) -> dict:
    """Map file stem -> label from a manifest, if one is available."""
    candidates = [Path(explicit)] if explicit else [directory / MANIFEST, directory.parent / MANIFEST]
    for c in candidates:
        if c.is_file():
            meta = json.loads(c.read_text())
            return {Path(e["file"]).stem: e.get("label") for e in meta.get("files", [])}
    if explicit:
        raise ParameterError(f"manifest {explicit} not found")
    return {}


def _load_diagrams(directory: Path, hom_dim: int):
    files = sorted(directory.glob(f"*_h{hom_dim}.csv"))
    if not files:
        raise ParameterError(f"no *_h{hom_dim}.csv diagram files in {directory}")
    stems = [f.stem[: -len(f"_h{hom_dim}")] for f in files]
    return stems, [io.read_diagram(f, hom_dim) for f in files]


def _labels_for(stems: Sequence[str], manifest: dict) -> list:
    if not manifest:
        return []
    return [manifest.get(s) for s in stems]


# ---- subcommands -----------------------------------------------------------

def cmd_persist(args) -> int:
    src = Path(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for f in _csv_inputs(src):
        if args.mode == "rips":
            diagrams = rips_persistence(io.read_point_cloud(f), args.max_dim, args.max_scale)
        else:
            diagrams = cubical_persistence(io.read_grid(f), args.max_dim)
        for d in diagrams:
            io.write_diagram(d, io.diagram_path(out, f.stem, d.hom_dim))
        summary.append({"input": f.name, "points": [len(d) for d in diagrams],
                        "dropped_essential": [d.n_dropped for d in diagrams]})
    if src.is_dir() and (src / MANIFEST).is_file():
        shutil.copy(src / MANIFEST, out / MANIFEST)
    _dump({"mode": args.mode, "max_dim": args.max_dim, "files": summary}, None)
    return 0


def _images_from_dir(directory: Path, hom_dim: int, resolution, sigma):
    """Stems and image vectors: precomputed image files if present, else diagrams."""
    sidecars = sorted(p for p in directory.glob("*.json") if p.name != MANIFEST)
    if sidecars:
        imgs = [io.read_image(p.with_suffix(".csv")) for p in sidecars]
        stems = [re.sub(r"_h\d+_pi$", "", p.stem) for p in sidecars]
        return stems, [im.to_vector() for im in imgs], {"source": "images"}
    stems, diagrams = _load_diagrams(directory, hom_dim)
    imager = PersistenceImager(resolution=resolution, sigma=sigma).fit(diagrams)
    return stems, list(imager.transform(diagrams)), {"source": "diagrams", "spec": imager.spec_.to_dict()}


def cmd_distmat(args) -> int:
    directory = Path(args.input)
    manifest = _load_manifest(directory, args.manifest)
    prov = {"representation": args.representation, "metric": args.metric, "hom_dim": args.hom_dim,
            "input": str(directory)}
    t0 = time.perf_counter()
    if args.representation == "pd":
        if args.metric not in DIAGRAM_METRICS:
            raise ParameterError(f"metric {args.metric!r} needs --representation pi")
        stems, objects = _load_diagrams(directory, args.hom_dim)
    else:
        if args.metric in DIAGRAM_METRICS:
            raise ParameterError(f"metric {args.metric!r} needs --representation pd")
        res = (args.resolution, args.resolution)
        stems, objects, extra = _images_from_dir(directory, args.hom_dim, res, args.sigma)
        prov.update(extra)
        prov.update({"resolution": list(res), "sigma": args.sigma})
    dm = build_distance_matrix(objects, args.metric, prov, _labels_for(stems, manifest))
    dm.provenance["objects"] = stems
    dm.provenance["seconds"] = time.perf_counter() - t0
    io.write_distance_matrix(dm, args.out)
    print(json.dumps({"out": args.out, "n": len(dm), "seconds": dm.provenance["seconds"]}))
    return 0


def _read_labels(path: str) -> list:
    text = Path(path).read_text().splitlines()
    return [t.strip() for t in text if t.strip()]


def cmd_cluster(args) -> int:
    dm = io.read_distance_matrix(args.input)
    labels = _read_labels(args.labels) if args.labels else list(dm.labels)
    c = kmedoids(dm.values, args.k, args.restarts, args.seed)
    result = {
        "k": args.k, "restarts": args.restarts, "seed": args.seed,
        "medoid_indices": c.medoid_indices.tolist(),
        "assignment": c.assignment.tolist(),
        "score": c.score,
    }
    if labels and all(lab is not None for lab in labels):
        result["medoid_labels"] = [labels[i] for i in c.medoid_indices]
        result["accuracy"] = clustering_accuracy(c, labels)
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2) + "\n")
    if "accuracy" in result:
        print(f"accuracy {result['accuracy']:.4f}")
    else:
        print(f"score {c.score:.6g} (no labels, accuracy unavailable)")
    return 0


def cmd_verify(args) -> int:
    report = verify_stability(args.pairs, args.sigma, args.b, args.seed)
    _dump(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dataset == "shapes":
        clouds = generate_shapes(args.per_class, args.points, args.noise, args.seed)
        params = {"per_class": args.per_class, "points": args.points, "noise": args.noise,
                  "classes": list(SHAPE_CLASSES)}
    else:
        clouds = generate_ltm(args.r, args.per_class, args.iterations, args.seed, args.points)
        params = {"per_class": args.per_class, "iterations": args.iterations,
                  "subsample": args.points, "r": list(args.r)}
    entries, counts = [], {}
    for cloud in clouds:
        k = counts.get(cloud.label, 0)
        counts[cloud.label] = k + 1
        name = f"{cloud.label.replace('=', '')}_{k:03d}.csv"
        io.write_point_cloud(cloud, out / name)
        entries.append({"file": name, "label": cloud.label, "index_in_class": k})
    manifest = {"dataset": args.dataset, "generator": GENERATOR, "seed": args.seed,
                "seed_derivation": "SeedSequence(seed).spawn(n_instances), in file order",
                "params": params, "files": entries}
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    print(json.dumps({"out": str(out), "clouds": len(entries)}))
    return 0


def cmd_sweep(args) -> int:
    directory = Path(args.input)
    stems, diagrams = _load_diagrams(directory, args.hom_dim)
    labels = _labels_for(stems, _load_manifest(directory, args.manifest))
    if not labels or any(lab is None for lab in labels):
        raise ParameterError("sweep needs a manifest with a label for every diagram")
    rows = parameter_sweep(diagrams, labels, args.resolutions, args.sigmas, args.metric,
                           args.k, args.restarts, args.seed)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=["resolution", "sigma", "metric", "accuracy"])
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_image(args) -> int:
    directory = Path(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stems, diagrams = _load_diagrams(directory, args.hom_dim)
    imager = PersistenceImager(resolution=(1 if args.one_dimensional else args.resolution, args.resolution),
                               sigma=args.sigma, one_dimensional=args.one_dimensional).fit(diagrams)
    images = imager.images(diagrams)
    for stem, im in zip(stems, images):
        io.write_image(im, out / f"{stem}_h{args.hom_dim}_pi.csv")
    if (directory / MANIFEST).is_file():
        shutil.copy(directory / MANIFEST, out / MANIFEST)
    if args.png:
        _save_grid(images, stems, out / "images.png")
    print(json.dumps({"out": str(out), "images": len(images), "spec": imager.spec_.to_dict()}))
    return 0


def _save_grid(images, titles, path: Path, cols: int = 6):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = -(-len(images) // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(2 * cols, 2 * rows), squeeze=False)
    for ax in axes.ravel():
        ax.axis("off")
    for ax, im, title in zip(axes.ravel(), images, titles):
        bmin, bmax, pmin, pmax = im.spec.grid_bounds
        ax.imshow(im.pixels, origin="lower", aspect="auto", cmap="viridis", extent=(bmin, bmax, pmin, pmax))
        ax.set_title(title, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="persimg", description="Persistence diagrams, images and their uses.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("persist", help="diagrams from a point cloud or grid CSV (file or directory)")
    s.add_argument("input")
    s.add_argument("--mode", choices=["rips", "cubical"], default="rips")
    s.add_argument("--max-dim", type=int, default=1, choices=[0, 1])
    s.add_argument("--max-scale", type=float, default=None)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_persist)

    s = sub.add_parser("distmat", help="distance matrix over a directory of diagrams or images")
    s.add_argument("input")
    s.add_argument("--representation", choices=["pd", "pi"], default="pi")
    s.add_argument("--metric", choices=["l1", "l2", "linf", "w1", "w2", "bottleneck"], default="l2")
    s.add_argument("--hom-dim", type=int, default=1)
    s.add_argument("--resolution", type=int, default=20)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--manifest", default=None)
    s.add_argument("--out", default="distances.csv")
    s.set_defaults(func=cmd_distmat)

    s = sub.add_parser("verify-stability", help="randomized check of the stability bounds")
    s.add_argument("--pairs", type=int, default=100)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("generate", help="synthetic labeled point clouds")
    s.add_argument("--dataset", choices=["shapes", "ltm"], default="shapes")
    s.add_argument("--per-class", type=int, default=25)
    s.add_argument("--points", type=int, default=None,
                   help="points per cloud (shapes, default 500) or orbit subsample size (ltm)")
    s.add_argument("--noise", type=float, default=0.05)
    s.add_argument("--iterations", type=int, default=1000)
    s.add_argument("--r", type=float, nargs="+", default=list(DEFAULT_LTM_RS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="clouds")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("cluster", help="K-medoids on a distance-matrix CSV")
    s.add_argument("input")
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--restarts", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--labels", default=None, help="text file, one label per line (default: matrix sidecar)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", help="accuracy over image resolutions and variances, as CSV")
    s.add_argument("input")
    s.add_argument("--resolutions", type=int, nargs="+", default=[10, 20, 40])
    s.add_argument("--sigmas", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    s.add_argument("--metric", choices=["l1", "l2", "linf"], default="l2")
    s.add_argument("--hom-dim", type=int, default=1)
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--restarts", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--manifest", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("image", help="persistence images (CSV + JSON) and an optional PNG grid")
    s.add_argument("input")
    s.add_argument("--hom-dim", type=int, default=1)
    s.add_argument("--resolution", type=int, default=20)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--one-dimensional", action="store_true")
    s.add_argument("--png", action="store_true")
    s.add_argument("--out", default="images")
    s.set_defaults(func=cmd_image)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate" and args.points is None and args.dataset == "shapes":
        args.points = 500
    try:
        return args.func(args)
    except (ParameterError, StructuralError, MetricError, FileNotFoundError) as exc:
        print(f"persimg {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
