"""Deterministic writers for CSV tables, two-column plot data and JSON reports."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(float(v)) for v in row) + "\n")
    return path


def write_xy(path: Path, data: np.ndarray) -> Path:
    """Two-column ``x y`` text file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(data, dtype=float).reshape(-1, 2)
    with open(path, "w") as fh:
        for x, y in data:
            fh.write(f"{fmt(x)} {fmt(y)}\n")
    return path


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def ray_rows(bundle, stride: int = 1) -> tuple[list[str], list[list[float]]]:
    """Flatten a ray bundle to rows of ``t, y, x, xi, J, phi`` (per coordinate in 2-D)."""
    d = bundle.d
    if d == 1:
        cols = ["t", "y", "x", "xi", "J", "phi"]
    else:
        cols = ["t"] + [f"y{i+1}" for i in range(d)] + [f"x{i+1}" for i in range(d)] + [f"xi{i+1}" for i in range(d)] + ["J", "phi"]
    J = bundle.J
    rows = []
    sel = np.arange(0, bundle.y.shape[1], stride)
    for n, t in enumerate(bundle.times):
        for m in sel:
            rows.append([t, *bundle.y[:, m], *bundle.x[n, :, m], *bundle.xi[n, :, m], J[n, m], bundle.phi[n, m]])
    return cols, rows


def wkb_rows(dec) -> tuple[list[str], list[list[float]]]:
    """Grid samples of a WKB decomposition (1-D)."""
    cols = ["t", "x", "phi", "grad_phi", "a_tilde_re", "a_tilde_im", "covered"]
    x = dec.grid.axis
    rows = [
        [dec.t, xi, dec.phi[i], dec.grad_phi[0, i], dec.a_tilde[i].real, dec.a_tilde[i].imag, float(dec.mask[i])]
        for i, xi in enumerate(x)
    ]
    return cols, rows


def write_report(directory: Path, report) -> list[str]:
    """Write ``report.json`` plus one CSV per table and one ``.dat`` per plot series."""
    directory = Path(directory)
    artifacts = []
    for name, (cols, rows) in sorted(report.tables.items()):
        write_csv(directory / f"{name}.csv", cols, rows)
        artifacts.append(f"{name}.csv")
    for name, data in sorted(report.plots.items()):
        write_xy(directory / f"{name}.dat", data)
        artifacts.append(f"{name}.dat")
    report.artifacts = artifacts + ["report.json"]
    write_json(
        directory / "report.json",
        {
            "name": report.name,
            "pass": report.passed,
            "parameters": report.parameters,
            "measured": report.measured,
            "notes": report.notes,
            "artifacts": report.artifacts,
        },
    )
    return report.artifacts
