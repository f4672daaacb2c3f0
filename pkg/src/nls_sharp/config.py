"""Run configuration files.

The format is TOML with one table per component::

    [grid]
    d = 1
    L = 16.0
    N = 1024

    [potential]
    kind = "harmonic"
    omega = 1.0

    [params]
    lambda = 1.0
    sigma = 1.0
    dt = 1e-3
    T = 5.0
    record_every = 10

    [ic]
    kind = "gaussian"

    [output]
    dir = "out/harmonic"

    [experiment]          # only for ``nls-sharp experiment``
    t_list = [0.05, 0.1, 0.2]

Unknown tables or keys are errors reported with the offending line number.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .grid import Grid, make_grid
from .potentials import Potential, potential_from_spec
from .propagator import SimulationParams


class ConfigError(ValueError):
    pass


SECTIONS = {
    "grid": {"d", "L", "N"},
    "potential": None,  # validated by the potential factory
    "params": {"lambda", "sigma", "dt", "T", "record_every", "amplitude_factor", "resolution_tol"},
    "ic": None,
    "output": {"dir", "snapshots", "rays", "ray_stride"},
    "experiment": {
        "name",
        "mass_tol",
        "energy_tol",
        "window",
        "rel_tol",
        "ratio_bound",
        "closed_form",
        "t_list",
        "dt_ref",
        "dt_ode",
        "r2_min",
        "intercept_tol",
        "radii",
        "tau",
        "decay",
        "dx",
        "growth_min",
        "ratio_tol",
        "saturation_max",
        "comparison",
        "profile",
        "amplitude",
        "gradient_factor",
    },
}

GRID_DEFAULTS = {"d": 1, "L": 16.0, "N": 1024}


@dataclass
class RunConfig:
    grid: Grid
    potential: Potential
    params: SimulationParams
    ic: dict[str, Any]
    output_dir: Path
    output: dict[str, Any] = field(default_factory=dict)
    experiment: dict[str, Any] = field(default_factory=dict)
    source: str = "<string>"
    raw: dict[str, Any] = field(default_factory=dict)


def _line_of(text: str, section: str | None, key: str) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            if section is None and current == key:
                return i
            continue
        if section is not None and current == section and re.match(rf"^\"?{re.escape(key)}\"?\s*=", s):
            return i
    return None


def _fail(source: str, text: str, section: str | None, key: str, msg: str) -> ConfigError:
    line = _line_of(text, section, key)
    where = f"{source}:{line}" if line else source
    return ConfigError(f"{where}: {msg}")


def parse_config(text: str, source: str = "<string>", output_dir: str | Path | None = None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    for name, value in raw.items():
        if name not in SECTIONS:
            raise _fail(source, text, None, name, f"unknown section [{name}]")
        if not isinstance(value, dict):
            raise _fail(source, text, None, name, f"[{name}] must be a table")
        allowed = SECTIONS[name]
        if allowed is not None:
            for key in value:
                if key not in allowed:
                    raise _fail(source, text, name, key, f"unknown key {key!r} in [{name}]")

    def build(section: str, fn, key_hint: str | None = None):
        try:
            return fn()
        except (TypeError, ValueError) as exc:
            tbl = raw.get(section, {})
            bad = next((k for k in tbl if k in str(exc)), key_hint or next(iter(tbl), section))
            line = _line_of(text, section, bad) or _line_of(text, None, section)
            where = f"{source}:{line}" if line else source
            raise ConfigError(f"{where}: [{section}] {exc}") from None

    g = dict(GRID_DEFAULTS, **raw.get("grid", {}))
    grid = build("grid", lambda: make_grid(g["d"], g["L"], g["N"]))
    if "potential" not in raw:
        raise ConfigError(f"{source}: missing [potential] section")
    potential = build("potential", lambda: potential_from_spec(raw["potential"]), "kind")
    pr = dict(raw.get("params", {}))
    if "lambda" in pr:
        pr["lam"] = pr.pop("lambda")
    params = build("params", lambda: SimulationParams(**pr))
    ic = dict(raw.get("ic", {"kind": "gaussian"}))
    out = dict(raw.get("output", {}))
    if output_dir is not None:
        out_dir = Path(output_dir)
    else:
        out_dir = Path(out.get("dir", "out"))
    cfg = RunConfig(grid, potential, params, ic, out_dir, out, dict(raw.get("experiment", {})), source, raw)
    from .initial import initial_from_spec

    build("ic", lambda: initial_from_spec(grid, ic), "kind")
    return cfg


def load_config(path: str | Path, output_dir: str | Path | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path), output_dir)
