"""Problem documents: parsing and validation of the JSON payloads the CLI accepts.

Every parser raises ValidationError on malformed input, before any solver
runs.
"""

from __future__ import annotations

import numpy as np

from .blackwell import (
    KernelFamily,
    bounded_drift_family,
    cell_martingale_family,
    identity_family,
    martingale_family,
    privacy_family,
    stopping_family,
)
from .cones import ConeSpec
from .errors import ValidationError
from .measure import Grid, Kernel, Measure, dirac, simplex_grid, uniform, uniform_line_grid

SCHEMA_VERSIONS = ("1",)
KINDS = ("envelope", "solve", "couple", "expose", "blackwell", "design", "updating", "stackelberg", "verify")


def require(doc, *keys, where="payload"):
    if not isinstance(doc, dict):
        raise ValidationError(f"{where} must be an object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ValidationError(f"{where} lacks {', '.join(missing)}")


def parse_envelope(doc) -> dict:
    """{schema_version, problem_kind, payload, output?} -> validated document."""
    require(doc, "schema_version", "problem_kind", "payload", where="problem file")
    if str(doc["schema_version"]) not in SCHEMA_VERSIONS:
        raise ValidationError(f"unrecognized schema_version {doc['schema_version']!r}")
    if doc["problem_kind"] not in KINDS:
        raise ValidationError(f"unknown problem_kind {doc['problem_kind']!r}")
    return doc


def parse_grid(spec, resolution: int | None = None) -> Grid:
    """Explicit points, or a generator: {"line": {n, lo, hi}} / {"simplex": {states, resolution}}."""
    if not isinstance(spec, dict):
        raise ValidationError("grid must be an object")
    try:
        if "line" in spec:
            s = spec["line"]
            n = int(resolution) + 1 if resolution is not None else int(s["n"])
            return uniform_line_grid(n, s.get("lo", 0), s.get("hi", 1))
        if "simplex" in spec:
            s = spec["simplex"]
            k = int(resolution) if resolution is not None else int(s["resolution"])
            return simplex_grid(int(s["states"]), k)
        return Grid.from_json(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad grid spec: {exc}") from exc


def parse_function(spec, grid: Grid) -> np.ndarray:
    """A value list, or a named shape evaluated on the grid.

    Shapes: {"compare": [i, j]} -> 1{x_i >= x_j}; {"threshold": {"coord", "at"}} -> 1{x_coord >= at};
    {"abs": c} -> |x_0 - c|; {"points": {index: value}} -> zero except at listed indices.
    """
    P = grid.points
    n = len(grid)
    if isinstance(spec, list):
        v = np.asarray(spec, dtype=float)
        if v.shape != (n,):
            raise ValidationError(f"function has {v.size} values, grid has {n} points")
        return v
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError("function spec must be a list or a single-key object")
    (key, arg), = spec.items()
    try:
        if key == "compare":
            i, j = arg
            return (P[:, i] >= P[:, j] - 1e-12).astype(float)
        if key == "threshold":
            return (P[:, int(arg.get("coord", 0))] >= float(arg["at"]) - 1e-12).astype(float)
        if key == "abs":
            return np.abs(P[:, 0] - float(arg))
        if key == "points":
            v = np.zeros(n)
            for k, val in arg.items():
                v[int(k)] = float(val)
            return v
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValidationError(f"bad function spec {key!r}: {exc}") from exc
    raise ValidationError(f"unknown function shape {key!r}")


def parse_measure(spec, grid: Grid, exact: bool = False) -> Measure:
    """Weights list, "uniform", {"dirac_at": point} or {"dirac": index}."""
    if spec == "uniform":
        return uniform(grid, exact)
    if isinstance(spec, list):
        if len(spec) != len(grid):
            raise ValidationError("measure length does not match grid")
        m = Measure(grid, spec)
        return m.to_exact() if exact else m
    if isinstance(spec, dict):
        if "dirac" in spec:
            return dirac(grid, int(spec["dirac"]), exact)
        if "dirac_at" in spec:
            pt = spec["dirac_at"]
            pt = [pt] if np.isscalar(pt) else pt
            try:
                return dirac(grid, grid.index_of(np.asarray(pt, dtype=float), 1e-9), exact)
            except Exception as exc:
                raise ValidationError(f"point {pt} is not on the grid") from exc
        if "weights" in spec:
            return parse_measure(spec["weights"], grid, exact)
    raise ValidationError("unrecognized measure spec")


def parse_cone(spec) -> ConeSpec:
    if isinstance(spec, str):
        spec = {"kind": spec}
    return ConeSpec.from_json(spec)


def parse_family(spec, grid: Grid, exact: bool = False) -> KernelFamily:
    require(spec, "kind", where="family")
    kind = spec["kind"]
    if kind == "martingale":
        return martingale_family(grid, exact)
    if kind == "privacy":
        return privacy_family(grid, int(spec.get("coord", 0)), exact)
    if kind == "cells":
        require(spec, "partition", where="family")
        return cell_martingale_family(grid, spec["partition"], exact, name="cells")
    if kind == "identity":
        return identity_family(grid)
    if kind == "bounded_drift":
        return bounded_drift_family(grid, float(spec.get("radius", 0.1)))
    if kind == "stopping":
        require(spec, "kernel", where="family")
        return stopping_family(Kernel(grid, spec["kernel"]))
    raise ValidationError(f"unknown family kind {kind!r}")
