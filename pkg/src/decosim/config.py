"""Scenario configuration: JSON parsing, validation, emission, hashing.

A configuration document is a JSON object with the fields

    scenario   one of the names in SCENARIOS
    params     scenario-specific parameter table (see SCENARIO_SUMMARY)
    grid       {"t_start": 0.0, "t_end": ..., "n_steps": ..., "sample_every": 1}
    estimator  {"kind": "closed-form" | "master-equation" |
                "trajectories", "n_traj": ..., "seed": ...}
    output     {"path": ..., "format": "csv"}

Complex values are written as two-element arrays [re, im]; plain numbers
are accepted as purely real.  Every validation error names the offending
field path.  Defaults are resolved at parse time, so emitting a parsed
config reproduces every choice explicitly and parse(emit(config)) returns
an equal config.  Seeds are never defaulted: any stochastic estimator must
state one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from hashlib import sha256

import numpy as np

from .errors import ConfigurationError
from .evolution import TimeGrid
from .models.central_spin import CentralSpinParams
from .models.disorder import Distribution, DisorderSpec
from .models.oscillator import DampedOscillatorParams
from .models.three_level import (
    MIN_EXPECTED_BRIGHT_COUNT,
    ThreeLevelParams,
    bright_excited_population,
)

SCENARIOS = (
    "central-spin",
    "spin-echo",
    "disorder",
    "three-level-telegraph",
    "damped-oscillator",
    "unraveling-check",
)

CLOSED_FORM = "closed-form"
MASTER_EQUATION = "master-equation"
TRAJECTORIES = "trajectories"
ESTIMATOR_KINDS = (CLOSED_FORM, MASTER_EQUATION, TRAJECTORIES)

# Which estimators make sense per scenario, first entry is the default.
SCENARIO_ESTIMATORS = {
    "central-spin": (CLOSED_FORM,),
    "spin-echo": (CLOSED_FORM,),
    "disorder": (CLOSED_FORM, TRAJECTORIES),
    "three-level-telegraph": (TRAJECTORIES,),
    "damped-oscillator": (MASTER_EQUATION,),
    "unraveling-check": (TRAJECTORIES,),
}

# One-line parameter summaries for the list-scenarios subcommand.
SCENARIO_SUMMARY = {
    "central-spin": ("closed-form dephasing of a central spin: params "
                     "couplings (required), omega0=0, c1=c2=sqrt(1/2)"),
    "spin-echo": ("central-spin run with a refocusing pulse: central-spin "
                  "params plus t_e (required, > 0)"),
    "disorder": ("static-disorder ensemble average: params distribution "
                 "(required), epsilon, slopes, r; trajectories estimator "
                 "draws explicit samples"),
    "three-level-telegraph": ("fluorescence telegraph of a shelved "
                              "three-level emitter: params rabi, "
                              "gamma_strong, gamma_shelve, gamma_deshelve, "
                              "bin_width (required), detuning=0, "
                              "dark_threshold=0; needs trajectories"),
    "damped-oscillator": ("two-packet interference in a damped oscillator: "
                          "params omega, n_fock, alpha1, alpha2 (required), "
                          "gamma=0, n_thermal=0; master-equation estimator"),
    "unraveling-check": ("trajectory average vs master equation: params "
                         "model (required), threshold=5/sqrt(n_traj); "
                         "needs trajectories"),
}

DEFAULT_AMPLITUDE = math.sqrt(0.5)


@dataclass(frozen=True)
class EstimatorSpec:
    """How a scenario's expectation values are estimated."""

    kind: str
    n_traj: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict
    grid: TimeGrid
    estimator: EstimatorSpec
    output_path: str
    output_format: str


def _fail(path: str, message: str):
    raise ConfigurationError(f"{path}: {message}")


def _require_table(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(table: dict, allowed, path: str):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        _fail(f"{path}.{unknown[0]}", "unknown field")


def _get_required(table: dict, key: str, path: str):
    if key not in table:
        _fail(f"{path}.{key}", "missing parameter")
    return table[key]


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    return int(value)


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _as_complex(value, path: str) -> complex:
    if isinstance(value, bool):
        _fail(path, "expected a number or [re, im] pair, got bool")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in value)):
        return complex(float(value[0]), float(value[1]))
    _fail(path, "expected a number or a [re, im] pair")


def _as_float_tuple(value, path: str) -> tuple:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a nonempty array of numbers")
    return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _as_complex_matrix(value, path: str) -> tuple:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a nonempty array of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            _fail(f"{path}[{i}]", "matrix must be square")
        rows.append(tuple(_as_complex(v, f"{path}[{i}][{j}]")
                          for j, v in enumerate(row)))
    return tuple(rows)


def _complex_out(z: complex) -> list:
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# section parsers

def _parse_grid(table, path: str) -> TimeGrid:
    table = _require_table(table, path)
    _reject_unknown(table, ("t_start", "t_end", "n_steps", "sample_every"),
                    path)
    t_start = _as_float(table.get("t_start", 0.0), f"{path}.t_start")
    t_end = _as_float(_get_required(table, "t_end", path), f"{path}.t_end")
    n_steps = _as_int(_get_required(table, "n_steps", path),
                      f"{path}.n_steps")
    sample_every = _as_int(table.get("sample_every", 1),
                           f"{path}.sample_every")
    try:
        return TimeGrid(t_start, t_end, n_steps, sample_every)
    except ValueError as e:
        _fail(path, str(e))


def _parse_estimator(table, scenario: str, path: str) -> EstimatorSpec:
    allowed = SCENARIO_ESTIMATORS[scenario]
    if table is None:
        if allowed[0] == TRAJECTORIES:
            _fail(path, f"scenario '{scenario}' needs a trajectories "
                        "estimator with explicit n_traj and seed")
        return EstimatorSpec(kind=allowed[0])
    table = _require_table(table, path)
    kind = _as_str(_get_required(table, "kind", path), f"{path}.kind")
    if kind not in ESTIMATOR_KINDS:
        _fail(f"{path}.kind",
              f"unknown estimator '{kind}' (choose from "
              f"{', '.join(ESTIMATOR_KINDS)})")
    if kind not in allowed:
        _fail(f"{path}.kind",
              f"scenario '{scenario}' does not support estimator '{kind}' "
              f"(allowed: {', '.join(allowed)})")
    if kind != TRAJECTORIES:
        _reject_unknown(table, ("kind",), path)
        return EstimatorSpec(kind=kind)
    _reject_unknown(table, ("kind", "n_traj", "seed"), path)
    n_traj = _as_int(_get_required(table, "n_traj", path), f"{path}.n_traj")
    if n_traj < 1:
        _fail(f"{path}.n_traj", "trajectories requires n_traj ≥ 1")
    if scenario == "disorder" and n_traj < 2:
        _fail(f"{path}.n_traj",
              "disorder monte carlo requires n_traj ≥ 2 for error bars")
    seed = _as_int(_get_required(table, "seed", path), f"{path}.seed")
    if seed < 0:
        _fail(f"{path}.seed", "seed must be ≥ 0")
    return EstimatorSpec(kind=TRAJECTORIES, n_traj=n_traj, seed=seed)


def _parse_central_spin(table, path: str, echo: bool) -> dict:
    keys = ("couplings", "omega0", "c1", "c2") + (("t_e",) if echo else ())
    _reject_unknown(table, keys, path)
    params = {
        "couplings": _as_float_tuple(
            _get_required(table, "couplings", path), f"{path}.couplings"),
        "omega0": _as_float(table.get("omega0", 0.0), f"{path}.omega0"),
        "c1": _as_complex(table.get("c1", DEFAULT_AMPLITUDE), f"{path}.c1"),
        "c2": _as_complex(table.get("c2", DEFAULT_AMPLITUDE), f"{path}.c2"),
    }
    try:
        CentralSpinParams(params["omega0"], params["couplings"],
                          params["c1"], params["c2"])
    except ValueError as e:
        _fail(path, str(e))
    return params


def _parse_spin_echo(table, path: str) -> dict:
    params = _parse_central_spin(table, path, echo=True)
    t_e = _as_float(_get_required(table, "t_e", path), f"{path}.t_e")
    if not t_e > 0.0:
        _fail(f"{path}.t_e", f"echo time must be positive, got {t_e}")
    params["t_e"] = t_e
    return params


_DISTRIBUTION_FIELDS = {
    "gaussian": (("mean", 0.0), ("sigma", None)),
    "lorentzian": (("center", 0.0), ("width", None)),
    "uniform": (("low", None), ("high", None)),
}


def _parse_distribution(table, path: str) -> dict:
    table = _require_table(table, path)
    kind = _as_str(_get_required(table, "kind", path), f"{path}.kind")
    if kind not in _DISTRIBUTION_FIELDS:
        _fail(f"{path}.kind",
              f"unknown distribution '{kind}' (choose from "
              f"{', '.join(sorted(_DISTRIBUTION_FIELDS))})")
    fields = _DISTRIBUTION_FIELDS[kind]
    _reject_unknown(table, ("kind",) + tuple(name for name, _ in fields),
                    path)
    out = {"kind": kind}
    for name, default in fields:
        raw = (_get_required(table, name, path) if default is None
               else table.get(name, default))
        out[name] = _as_float(raw, f"{path}.{name}")
    return out


def _distribution_from_params(d: dict) -> Distribution:
    if d["kind"] == "gaussian":
        return Distribution.gaussian(d["mean"], d["sigma"])
    if d["kind"] == "lorentzian":
        return Distribution.lorentzian(d["center"], d["width"])
    return Distribution.uniform(d["low"], d["high"])


def _parse_disorder(table, path: str) -> dict:
    _reject_unknown(table, ("distribution", "epsilon", "slopes", "r"), path)
    params = {
        "distribution": _parse_distribution(
            _get_required(table, "distribution", path),
            f"{path}.distribution"),
        "epsilon": _as_float_tuple(
            _get_required(table, "epsilon", path), f"{path}.epsilon"),
        "slopes": _as_float_tuple(
            _get_required(table, "slopes", path), f"{path}.slopes"),
        "r": _as_complex_matrix(_get_required(table, "r", path), f"{path}.r"),
    }
    try:
        disorder_spec_from_params(params)
    except ValueError as e:
        _fail(path, str(e))
    return params


def disorder_spec_from_params(params: dict) -> DisorderSpec:
    return DisorderSpec(_distribution_from_params(params["distribution"]),
                        params["epsilon"], params["slopes"],
                        np.array(params["r"], dtype=np.complex128))


def _parse_three_level(table, path: str, grid: TimeGrid) -> dict:
    _reject_unknown(table, ("rabi", "detuning", "gamma_strong",
                            "gamma_shelve", "gamma_deshelve", "bin_width",
                            "dark_threshold"), path)
    params = {
        "rabi": _as_float(_get_required(table, "rabi", path),
                          f"{path}.rabi"),
        "detuning": _as_float(table.get("detuning", 0.0),
                              f"{path}.detuning"),
        "gamma_strong": _as_float(
            _get_required(table, "gamma_strong", path),
            f"{path}.gamma_strong"),
        "gamma_shelve": _as_float(
            _get_required(table, "gamma_shelve", path),
            f"{path}.gamma_shelve"),
        "gamma_deshelve": _as_float(
            _get_required(table, "gamma_deshelve", path),
            f"{path}.gamma_deshelve"),
        "bin_width": _as_float(_get_required(table, "bin_width", path),
                               f"{path}.bin_width"),
        "dark_threshold": _as_int(table.get("dark_threshold", 0),
                                  f"{path}.dark_threshold"),
    }
    try:
        model = ThreeLevelParams(params["rabi"], params["detuning"],
                                 params["gamma_strong"],
                                 params["gamma_shelve"],
                                 params["gamma_deshelve"])
    except ValueError as e:
        _fail(path, str(e))
    if params["dark_threshold"] < 0:
        _fail(f"{path}.dark_threshold", "must be ≥ 0")
    bin_width = params["bin_width"]
    if not bin_width > 0.0:
        _fail(f"{path}.bin_width", "must be positive")
    expected = (model.gamma_strong * bright_excited_population(model)
                * bin_width)
    if expected < MIN_EXPECTED_BRIGHT_COUNT:
        _fail(f"{path}.bin_width",
              f"expected bright-bin count {expected:.3g} is below "
              f"{MIN_EXPECTED_BRIGHT_COUNT}; widen the bins")
    if (grid.t_end - grid.t_start) / bin_width < 2.0:
        _fail(f"{path}.bin_width", "grid spans fewer than two bins")
    return params


def _parse_damped_oscillator(table, path: str) -> dict:
    _reject_unknown(table, ("omega", "gamma", "n_thermal", "n_fock",
                            "alpha1", "alpha2"), path)
    params = {
        "omega": _as_float(_get_required(table, "omega", path),
                           f"{path}.omega"),
        "gamma": _as_float(table.get("gamma", 0.0), f"{path}.gamma"),
        "n_thermal": _as_float(table.get("n_thermal", 0.0),
                               f"{path}.n_thermal"),
        "n_fock": _as_int(_get_required(table, "n_fock", path),
                          f"{path}.n_fock"),
        "alpha1": _as_complex(_get_required(table, "alpha1", path),
                              f"{path}.alpha1"),
        "alpha2": _as_complex(_get_required(table, "alpha2", path),
                              f"{path}.alpha2"),
    }
    try:
        DampedOscillatorParams(params["omega"], params["gamma"],
                               params["n_thermal"], params["n_fock"],
                               (params["alpha1"], params["alpha2"]))
    except ValueError as e:
        _fail(path, str(e))
    return params


def _parse_unraveling(table, path: str, estimator: EstimatorSpec) -> dict:
    _reject_unknown(table, ("model", "threshold"), path)
    model = _require_table(_get_required(table, "model", path),
                           f"{path}.model")
    kind = _as_str(_get_required(model, "kind", f"{path}.model"),
                   f"{path}.model.kind")
    if kind == "two-level-decay":
        _reject_unknown(model, ("kind", "gamma"), f"{path}.model")
        gamma = _as_float(_get_required(model, "gamma", f"{path}.model"),
                          f"{path}.model.gamma")
        if gamma < 0.0:
            _fail(f"{path}.model.gamma", "must be ≥ 0")
        model_params = {"kind": kind, "gamma": gamma}
    elif kind == "three-level":
        _reject_unknown(model, ("kind", "rabi", "detuning", "gamma_strong",
                                "gamma_shelve", "gamma_deshelve"),
                        f"{path}.model")
        mp = f"{path}.model"
        model_params = {
            "kind": kind,
            "rabi": _as_float(_get_required(model, "rabi", mp),
                              f"{mp}.rabi"),
            "detuning": _as_float(model.get("detuning", 0.0),
                                  f"{mp}.detuning"),
            "gamma_strong": _as_float(
                _get_required(model, "gamma_strong", mp),
                f"{mp}.gamma_strong"),
            "gamma_shelve": _as_float(
                _get_required(model, "gamma_shelve", mp),
                f"{mp}.gamma_shelve"),
            "gamma_deshelve": _as_float(
                _get_required(model, "gamma_deshelve", mp),
                f"{mp}.gamma_deshelve"),
        }
        try:
            ThreeLevelParams(model_params["rabi"], model_params["detuning"],
                             model_params["gamma_strong"],
                             model_params["gamma_shelve"],
                             model_params["gamma_deshelve"])
        except ValueError as e:
            _fail(mp, str(e))
    else:
        _fail(f"{path}.model.kind",
              f"unknown model '{kind}' (choose from two-level-decay, "
              "three-level)")
    if "threshold" in table:
        threshold = _as_float(table["threshold"], f"{path}.threshold")
        if not threshold > 0.0:
            _fail(f"{path}.threshold", "must be positive")
    else:
        threshold = 5.0 / math.sqrt(estimator.n_traj)
    return {"model": model_params, "threshold": threshold}


def _parse_output(table, path: str) -> tuple:
    table = _require_table(table, path)
    _reject_unknown(table, ("path", "format"), path)
    out_path = _as_str(_get_required(table, "path", path), f"{path}.path")
    if not out_path:
        _fail(f"{path}.path", "must be a nonempty path")
    fmt = _as_str(table.get("format", "csv"), f"{path}.format")
    if fmt != "csv":
        _fail(f"{path}.format", f"unknown format '{fmt}' (only csv)")
    return out_path, fmt


# ---------------------------------------------------------------------------
# public API

def parse_config_table(table) -> ScenarioConfig:
    """Validate a decoded configuration object into a ScenarioConfig."""
    table = _require_table(table, "config")
    missing = [k for k in ("scenario", "params", "grid", "output")
               if k not in table]
    if missing:
        raise ConfigurationError(
            f"missing required fields: {', '.join(missing)}")
    _reject_unknown(table, ("scenario", "params", "grid", "estimator",
                            "output"), "config")
    scenario = _as_str(table["scenario"], "scenario")
    if scenario not in SCENARIOS:
        _fail("scenario", f"unknown scenario '{scenario}' (choose from "
                          f"{', '.join(SCENARIOS)})")
    grid = _parse_grid(table["grid"], "grid")
    estimator = _parse_estimator(table.get("estimator"), scenario,
                                 "estimator")
    raw_params = _require_table(table["params"], "params")
    if scenario == "central-spin":
        params = _parse_central_spin(raw_params, "params", echo=False)
    elif scenario == "spin-echo":
        params = _parse_spin_echo(raw_params, "params")
    elif scenario == "disorder":
        params = _parse_disorder(raw_params, "params")
    elif scenario == "three-level-telegraph":
        params = _parse_three_level(raw_params, "params", grid)
    elif scenario == "damped-oscillator":
        params = _parse_damped_oscillator(raw_params, "params")
    else:
        params = _parse_unraveling(raw_params, "params", estimator)
    output_path, output_format = _parse_output(table["output"], "output")
    return ScenarioConfig(scenario=scenario, params=params, grid=grid,
                          estimator=estimator, output_path=output_path,
                          output_format=output_format)


def parse_config(text: str) -> ScenarioConfig:
    """Parse a JSON configuration document."""
    try:
        table = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"configuration is not valid JSON: {e}") from e
    return parse_config_table(table)


def _params_out(params: dict):
    out = {}
    for key, value in params.items():
        if isinstance(value, complex):
            out[key] = _complex_out(value)
        elif isinstance(value, dict):
            out[key] = _params_out(value)
        elif isinstance(value, tuple):
            if value and isinstance(value[0], tuple):
                out[key] = [[_complex_out(z) for z in row] for row in value]
            else:
                out[key] = list(value)
        else:
            out[key] = value
    return out


def config_table(config: ScenarioConfig) -> dict:
    """Plain-JSON representation with every default resolved."""
    grid = {"t_start": config.grid.t_start, "t_end": config.grid.t_end,
            "n_steps": config.grid.n_steps,
            "sample_every": config.grid.sample_every}
    estimator = {"kind": config.estimator.kind}
    if config.estimator.kind == TRAJECTORIES:
        estimator["n_traj"] = config.estimator.n_traj
        estimator["seed"] = config.estimator.seed
    return {
        "scenario": config.scenario,
        "params": _params_out(config.params),
        "grid": grid,
        "estimator": estimator,
        "output": {"path": config.output_path,
                   "format": config.output_format},
    }


def emit_config(config: ScenarioConfig) -> str:
    """Canonical JSON text; parse_config(emit_config(c)) == c."""
    return json.dumps(config_table(config), indent=2, sort_keys=True) + "\n"


def config_hash(config: ScenarioConfig) -> str:
    """sha256 over the compact sorted-key JSON form."""
    compact = json.dumps(config_table(config), sort_keys=True,
                         separators=(",", ":"))
    return sha256(compact.encode("utf-8")).hexdigest()
