"""Run configuration: JSON schema, presets, defaults.

A run is described by a single JSON document.  Unknown keys are rejected
and every violation is reported with the JSON path of the offending field
so a bad config fails fast and precisely.
"""

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError
from .evolution import EvolutionConfig
from .field import StripConfig, default_strip_config
from .geometry import build_state, sup_slope
from .spectral import Grid, SpectralProfile

#: checks computable from the ten triad CSV columns, with default thresholds
DEFAULT_CHECKS = (
    ("energy_dissipation", 2e-2),
    ("dissipation_rate", 10.0),
    ("distance_rate", 10.0),
    ("lyapunov_e2d", 1e-3),
    ("curvature_l2", 10.0),
    ("slope_e2d", 10.0),
    ("hhalf_h", 10.0),
    ("energy_hd", 10.0),
    ("height_interp", 10.0),
)

KNOWN_CHECKS = frozenset(name for name, _ in DEFAULT_CHECKS)

PRESETS = ("gaussian_bump", "mode", "wavelet")


@dataclass(frozen=True)
class RunConfig:
    initial_data: dict
    evolution: EvolutionConfig
    checks: tuple = tuple(DEFAULT_CHECKS)
    seed: int = 0


def _want(obj, path, typ, name):
    if typ is float and isinstance(obj, int) and not isinstance(obj, bool):
        obj = float(obj)
    if not isinstance(obj, typ) or isinstance(obj, bool) and typ is not bool:
        raise ConfigError(path, f"expected {name}")
    return obj


def _check_keys(mapping, path, allowed, required):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")
    for key in required:
        if key not in mapping:
            raise ConfigError(path or key, f"missing required key '{key}'")


def _parse_grid(raw, path):
    _check_keys(raw, path, {"length", "num_points"}, {"length", "num_points"})
    length = _want(raw["length"], f"{path}.length", float, "a positive number")
    n = _want(raw["num_points"], f"{path}.num_points", int, "an integer")
    try:
        return Grid(length, n)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_strip(raw, path, grid):
    if raw is None:
        return default_strip_config(grid)
    _check_keys(raw, path, {"depth", "num_layers", "grading"}, {"num_layers"})
    layers = _want(raw["num_layers"], f"{path}.num_layers", int, "an integer")
    grading = _want(raw.get("grading", 32.0), f"{path}.grading", float, "a number")
    if "depth" in raw:
        depth = _want(raw["depth"], f"{path}.depth", float, "a number")
    else:
        depth = default_strip_config(grid).depth
    try:
        return StripConfig(depth, layers, grading)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_evolution(raw, path):
    allowed = {
        "engine",
        "dt",
        "t_end",
        "mobility",
        "grid",
        "strip",
        "dealias",
        "output_every",
        "slope_gate",
    }
    _check_keys(raw, path, allowed, {"engine", "dt", "t_end", "grid"})
    grid = _parse_grid(_want(raw["grid"], f"{path}.grid", dict, "an object"), f"{path}.grid")
    strip = _parse_strip(raw.get("strip"), f"{path}.strip", grid)
    try:
        return EvolutionConfig(
            engine=_want(raw["engine"], f"{path}.engine", str, "a string"),
            dt=_want(raw["dt"], f"{path}.dt", float, "a number"),
            t_end=_want(raw["t_end"], f"{path}.t_end", float, "a number"),
            grid=grid,
            strip=strip,
            mobility=_want(raw.get("mobility", 2.0), f"{path}.mobility", float, "a number"),
            dealias=_want(raw.get("dealias", True), f"{path}.dealias", bool, "a boolean"),
            output_every=_want(
                raw.get("output_every", 1), f"{path}.output_every", int, "an integer"
            ),
            slope_gate=_want(
                raw.get("slope_gate", 1.0), f"{path}.slope_gate", float, "a number"
            ),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_checks(raw, path):
    if raw is None:
        return tuple(DEFAULT_CHECKS)
    if not isinstance(raw, list):
        raise ConfigError(path, "expected a list of {name, threshold} objects")
    out = []
    for i, item in enumerate(raw):
        ipath = f"{path}[{i}]"
        item = _want(item, ipath, dict, "an object")
        _check_keys(item, ipath, {"name", "threshold"}, {"name"})
        name = _want(item["name"], f"{ipath}.name", str, "a string")
        if name not in KNOWN_CHECKS:
            raise ConfigError(f"{ipath}.name", f"unknown check '{name}'")
        threshold = item.get("threshold", dict(DEFAULT_CHECKS)[name])
        out.append((name, _want(threshold, f"{ipath}.threshold", float, "a number")))
    return tuple(out)


def _parse_initial(raw, path):
    _check_keys(
        raw,
        path,
        {"preset", "amplitude", "width", "wavenumber"},
        {"preset", "amplitude"},
    )
    preset = _want(raw["preset"], f"{path}.preset", str, "a string")
    if preset not in PRESETS:
        raise ConfigError(f"{path}.preset", f"unknown preset '{preset}'")
    amplitude = _want(raw["amplitude"], f"{path}.amplitude", float, "a number")
    out = {"preset": preset, "amplitude": amplitude}
    if preset == "mode":
        if "wavenumber" not in raw:
            raise ConfigError(path, "preset 'mode' needs a wavenumber")
        out["wavenumber"] = _want(raw["wavenumber"], f"{path}.wavenumber", int, "an integer")
        if out["wavenumber"] < 1:
            raise ConfigError(f"{path}.wavenumber", "must be >= 1")
    else:
        if "width" not in raw:
            raise ConfigError(path, f"preset '{preset}' needs a width")
        out["width"] = _want(raw["width"], f"{path}.width", float, "a positive number")
        if out["width"] <= 0:
            raise ConfigError(f"{path}.width", "must be positive")
    return out


def build_initial_profile(grid, initial_data):
    """Realize a preset as a mean-zero profile on the grid."""
    x = grid.nodes
    u = x - 0.5 * grid.length
    a = initial_data["amplitude"]
    preset = initial_data["preset"]
    if preset == "gaussian_bump":
        w = initial_data["width"]
        samples = a * np.exp(-((u / w) ** 2))
    elif preset == "wavelet":
        w = initial_data["width"]
        samples = a * (u / w) * np.exp(-((u / w) ** 2))
    elif preset == "mode":
        m = initial_data["wavenumber"]
        samples = a * np.cos(2.0 * np.pi * m * x / grid.length)
    else:  # pragma: no cover - presets validated at parse time
        raise ValueError(f"unknown preset {preset}")
    samples = samples - samples.mean()
    profile = SpectralProfile.from_samples(grid, samples)
    coeffs = profile.coeffs.copy()
    coeffs[0] = 0.0
    return SpectralProfile.from_coeffs(grid, coeffs)


def parse_config(raw):
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    raw = _want(raw, "<root>", dict, "a JSON object")
    _check_keys(
        raw, "", {"initial_data", "evolution", "checks", "seed"}, {"initial_data", "evolution"}
    )
    initial = _parse_initial(
        _want(raw["initial_data"], "initial_data", dict, "an object"), "initial_data"
    )
    evolution = _parse_evolution(
        _want(raw["evolution"], "evolution", dict, "an object"), "evolution"
    )
    checks = _parse_checks(raw.get("checks"), "checks")
    seed = _want(raw.get("seed", 0), "seed", int, "an integer")

    profile = build_initial_profile(evolution.grid, initial)
    steep = sup_slope(build_state(profile))
    if steep > evolution.slope_gate:
        raise ConfigError(
            "initial_data",
            f"preset slope {steep:.4f} exceeds the slope gate {evolution.slope_gate}",
        )
    if not math.isfinite(profile.max_abs()):
        raise ConfigError("initial_data", "preset produced non-finite samples")
    return RunConfig(initial, evolution, checks, seed)


def load_config(path):
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return parse_config(raw)
