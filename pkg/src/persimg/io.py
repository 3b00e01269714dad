"""Plain-text file formats.

* Diagram CSV: header ``birth,death``; the homological dimension is the
  ``_h{k}`` suffix of the file stem (``cloud07_h1.csv``).
* Grid CSV: a bare numeric matrix, one grid row per line.
* Point-cloud CSV: one point per line, with an optional header of column names.
* Persistence image: the pixel matrix as CSV plus a JSON sidecar with the
  same stem holding the image spec.
* Distance matrix: the matrix as CSV plus a JSON sidecar with labels and provenance.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .core import ImageSpec, ParameterError, PersistenceDiagram, PersistenceImage, PointCloud, ScalarGrid
from .metrics import DistanceMatrix

_HDIM = re.compile(r"_h(\d+)$")


def hom_dim_from_path(path) -> Optional[int]:
    m = _HDIM.search(Path(path).stem)
    return int(m.group(1)) if m else None


def diagram_path(directory, stem: str, hom_dim: int) -> Path:
    return Path(directory) / f"{stem}_h{hom_dim}.csv"


def _read_table(path) -> Tuple[List[str], np.ndarray]:
    """Rows of floats, plus the header if the first line is not numeric."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    header = []
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            header = [c.strip() for c in rows[0]]
            rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ParameterError(f"{path}: non-numeric entry ({exc})") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise ParameterError(f"{path}: ragged rows")
    return header, data


def write_diagram(diagram: PersistenceDiagram, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["birth", "death"])
        for b, d in diagram.points:
            w.writerow([repr(float(b)), repr(float(d))])
    return path


def read_diagram(path, hom_dim: Optional[int] = None) -> PersistenceDiagram:
    header, data = _read_table(path)
    if header and header != ["birth", "death"]:
        raise ParameterError(f"{path}: expected header 'birth,death', got {','.join(header)!r}")
    if hom_dim is None:
        hom_dim = hom_dim_from_path(path) or 0
    return PersistenceDiagram(data.reshape(-1, 2), hom_dim=hom_dim)


def write_grid(grid: ScalarGrid, path) -> Path:
    np.savetxt(path, np.asarray(grid.values), delimiter=",", fmt="%.17g")
    return Path(path)


def read_grid(path) -> ScalarGrid:
    _, data = _read_table(path)
    return ScalarGrid(data)


def write_point_cloud(cloud: PointCloud, path) -> Path:
    pts = np.asarray(cloud.points)
    names = ["x", "y", "z"] if pts.shape[1] == 3 else [f"x{i}" for i in range(pts.shape[1])]
    np.savetxt(path, pts, delimiter=",", fmt="%.17g", header=",".join(names), comments="")
    return Path(path)


def read_point_cloud(path, label: Optional[str] = None) -> PointCloud:
    _, data = _read_table(path)
    if data.size == 0:
        raise ParameterError(f"{path}: empty point cloud")
    return PointCloud(data, label=label)


def write_image(image: PersistenceImage, path) -> Tuple[Path, Path]:
    path = Path(path)
    np.savetxt(path, image.pixels, delimiter=",", fmt="%.17g")
    sidecar = path.with_suffix(".json")
    meta = {"hom_dim": image.hom_dim, "spec": image.spec.to_dict(),
            "rows": "persistence", "cols": "birth"}
    sidecar.write_text(json.dumps(meta, indent=2))
    return path, sidecar


def read_image(path) -> PersistenceImage:
    path = Path(path)
    pixels = np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
    meta = json.loads(path.with_suffix(".json").read_text())
    return PersistenceImage(pixels, ImageSpec.from_dict(meta["spec"]), hom_dim=meta.get("hom_dim", 0))


def write_distance_matrix(dm: DistanceMatrix, path) -> Tuple[Path, Path]:
    path = Path(path)
    np.savetxt(path, dm.values, delimiter=",", fmt="%.17g")
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps({"labels": list(dm.labels), "provenance": dm.provenance},
                                  indent=2, default=str))
    return path, sidecar


def read_distance_matrix(path) -> DistanceMatrix:
    path = Path(path)
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    sidecar = path.with_suffix(".json")
    labels, prov = (), {}
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        labels, prov = tuple(meta.get("labels", ())), meta.get("provenance", {})
    return DistanceMatrix(values, labels, prov)
