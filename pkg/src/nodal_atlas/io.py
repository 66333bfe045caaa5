"""Domain spec parsing and the plain-text output formats."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import GeometryError, SpecError
from .geometry import Domain, build_polygon


def domain_from_spec(spec) -> Domain:
    """Build a domain from a spec dict, a JSON string or a path to a JSON file.

    The document is ``{"vertices": [[x, y], ...], "kind": ..., "lip_params":
    {"a": ..., "b": ...}}``; ``kind`` defaults to ``"generic"``.

    Raises
    ------
    SpecError
        Unreadable or malformed spec.
    GeometryError
        The vertices do not form a valid polygon.
    """
    if isinstance(spec, (str, Path)):
        text = str(spec)
        if not text.lstrip().startswith("{"):
            try:
                text = Path(spec).read_text()
            except OSError as exc:
                raise SpecError(f"cannot read domain spec {spec}: {exc}") from exc
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed JSON in domain spec: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError("domain spec must be a JSON object")
    verts = spec.get("vertices")
    if not isinstance(verts, list) or not all(
            isinstance(v, (list, tuple)) and len(v) == 2 for v in verts):
        raise SpecError("'vertices' must be a list of [x, y] pairs")
    try:
        verts = [[float(x), float(y)] for x, y in verts]
    except (TypeError, ValueError) as exc:
        raise SpecError(f"non-numeric vertex coordinate: {exc}") from exc
    kind = spec.get("kind", "generic")
    if kind not in ("generic", "obtuse-triangle", "lip"):
        raise SpecError(f"unknown domain kind {kind!r}")
    lip = spec.get("lip_params")
    if kind == "lip":
        if not isinstance(lip, dict) or "a" not in lip:
            raise SpecError("lip domains need lip_params with at least 'a'")
        try:
            lip = {"a": float(lip["a"]), "b": float(lip.get("b", 0.0))}
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad lip_params: {exc}") from exc
    return build_polygon(verts, kind=kind, lip_params=lip if kind == "lip" else None)


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    from .verify import _plain

    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def write_eigen_json(eig, path, extra: dict | None = None) -> None:
    data = {"mu": eig.eigenvalues, "residuals": eig.residuals}
    if extra:
        data.update(extra)
    write_json(data, path)


def write_eigenvector_csv(mesh, V, path) -> None:
    """One row per node: x, y, then one column per eigenvector."""
    V = np.atleast_2d(np.asarray(V, dtype=float).T).T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"] + [f"u{j + 1}" for j in range(V.shape[1])])
        for i, (x, y) in enumerate(mesh.nodes):
            w.writerow([repr(float(x)), repr(float(y))] + [repr(float(v)) for v in V[i]])


def write_nodal_csv(nodal, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "y0", "x1", "y1"])
        for (x0, y0), (x1, y1) in nodal.segments:
            w.writerow([repr(float(x0)), repr(float(y0)), repr(float(x1)), repr(float(y1))])


def read_nodal_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(v) for v in r] for r in rows]).reshape(-1, 2, 2)


def parse_point(text: str) -> np.ndarray:
    """``"x,y"`` to a point."""
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise GeometryError(f"point must be 'x,y', got {text!r}") from exc
    return np.array([x, y])
