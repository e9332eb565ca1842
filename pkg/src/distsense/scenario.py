"""Declarative scenario files (JSON) and the bundled examples."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError, SensingError
from .field_model import (
    FourierSine,
    GeneratingFunctionSet,
    PointSources,
    SensorArray,
    Tabulated,
    Taylor,
    fourier_extremal_positions,
    sample_coefficients,
)
from .probe_designer import DesignProblem

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "constraint": 1e-9,
    "twirl": 1e-9,
    "normalization": 1e-12,
    "rank": 1e-9,
}

_TOP_KEYS = {
    "schema_version", "name", "function_set", "sensors", "signal_index",
    "noise_indices", "integer_mode", "tolerances", "simulate",
}
_REQUIRED = {"schema_version", "name", "function_set", "sensors", "signal_index"}
_KIND_KEYS = {
    "taylor": ({"num_functions"}, {"length_scale"}),
    "fourier_sine": ({"num_functions"}, {"length_scale"}),
    "point_sources": ({"sources"}, {"exponent", "strengths", "groups"}),
    "tabulated": ({"values"}, set()),
}


@dataclass(frozen=True)
class Scenario:
    name: str
    function_set: GeneratingFunctionSet
    sensors: SensorArray
    signal_index: int
    noise_indices: tuple[int, ...] = ()
    integer_mode: bool = False
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    phases: tuple[float, ...] | None = None  # simulate: default evolution phases
    probe: tuple[float, ...] | None = None  # simulate: user-supplied s (r = -s)

    def coefficients(self) -> np.ndarray:
        return sample_coefficients(self.function_set, self.sensors)

    def problem(self, constraint_tol: float | None = None) -> DesignProblem:
        return DesignProblem(
            self.coefficients(),
            self.signal_index,
            self.noise_indices,
            self.sensors.qubit_counts,
            integer_mode=self.integer_mode,
            constraint_tol=constraint_tol or self.tolerances["constraint"],
        )

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "function_set": _function_set_to_dict(self.function_set),
            "sensors": {
                "positions": self.sensors.positions.tolist(),
                "qubit_counts": self.sensors.qubit_counts.tolist(),
            },
            "signal_index": self.signal_index,
            "noise_indices": list(self.noise_indices),
            "integer_mode": self.integer_mode,
            "tolerances": dict(self.tolerances),
        }
        sim = {}
        if self.phases is not None:
            sim["phases"] = list(self.phases)
        if self.probe is not None:
            sim["probe"] = list(self.probe)
        if sim:
            d["simulate"] = sim
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _function_set_to_dict(fns: GeneratingFunctionSet) -> dict:
    if isinstance(fns, Taylor):
        return {"kind": "taylor", "num_functions": fns.num_functions, "length_scale": fns.length_scale}
    if isinstance(fns, FourierSine):
        return {"kind": "fourier_sine", "num_functions": fns.num_functions, "length_scale": fns.length_scale}
    if isinstance(fns, PointSources):
        d = {
            "kind": "point_sources",
            "sources": fns.sources.tolist(),
            "exponent": fns.exponent,
            "strengths": fns.strengths.tolist(),
        }
        if fns.groups is not None:
            d["groups"] = [list(g) for g in fns.groups]
        return d
    if isinstance(fns, Tabulated):
        return {"kind": "tabulated", "values": fns.values.tolist()}
    raise TypeError(f"unknown function set {type(fns).__name__}")


def _check_keys(d, allowed, required, where):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(d) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")


def _real(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParseError(f"{where}: expected a finite number, got {x!r}")
    return float(x)


def _int(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _reals(xs, where) -> list[float]:
    if not isinstance(xs, list):
        raise ParseError(f"{where}: expected a list")
    return [_real(x, where) for x in xs]


def _parse_function_set(d) -> GeneratingFunctionSet:
    if not isinstance(d, dict) or "kind" not in d:
        raise ParseError("function_set: missing 'kind'")
    kind = d["kind"]
    if kind not in _KIND_KEYS:
        raise ParseError(f"function_set: unknown kind {kind!r}")
    required, optional = _KIND_KEYS[kind]
    _check_keys(d, required | optional | {"kind"}, required | {"kind"}, f"function_set ({kind})")
    if kind in ("taylor", "fourier_sine"):
        cls = Taylor if kind == "taylor" else FourierSine
        return cls(
            num_functions=_int(d["num_functions"], "num_functions"),
            length_scale=_real(d.get("length_scale", 1.0), "length_scale"),
        )
    if kind == "point_sources":
        sources = [_reals(v, "sources") if isinstance(v, list) else [_real(v, "sources")]
                   for v in d["sources"]]
        strengths = d.get("strengths")
        groups = d.get("groups")
        if groups is not None:
            groups = tuple(tuple(_int(i, "groups") for i in g) for g in groups)
        return PointSources(
            sources=np.array(sources),
            exponent=_real(d.get("exponent", 2.0), "exponent"),
            strengths=None if strengths is None else np.array(_reals(strengths, "strengths")),
            groups=groups,
        )
    values = d["values"]
    if not isinstance(values, list):
        raise ParseError("values: expected a list of rows")
    return Tabulated(np.array([_reals(row, "values") for row in values]))


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded JSON document and build the scenario.

    Structural and value problems raise ``ParseError``; domain errors from
    sampling (e.g. a sensor sitting on a point source) propagate unchanged.
    """
    _check_keys(data, _TOP_KEYS, _REQUIRED, "scenario")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {data['schema_version']!r}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise ParseError("name must be a non-empty string")
    sensors = data["sensors"]
    _check_keys(sensors, {"positions", "qubit_counts"}, {"positions", "qubit_counts"}, "sensors")
    try:
        positions = [_reals(p, "positions") if isinstance(p, list) else [_real(p, "positions")]
                     for p in sensors["positions"]]
        counts = [_int(n, "qubit_counts") for n in sensors["qubit_counts"]]
        tolerances = dict(DEFAULT_TOLERANCES)
        tol_in = data.get("tolerances", {})
        _check_keys(tol_in, set(DEFAULT_TOLERANCES), set(), "tolerances")
        for key, value in tol_in.items():
            if _real(value, f"tolerances.{key}") <= 0:
                raise ParseError(f"tolerances.{key} must be positive")
            tolerances[key] = float(value)
        sim = data.get("simulate", {})
        _check_keys(sim, {"phases", "probe"}, set(), "simulate")
        integer_mode = data.get("integer_mode", False)
        if not isinstance(integer_mode, bool):
            raise ParseError("integer_mode must be true or false")
        noise = data.get("noise_indices", [])
        if not isinstance(noise, list):
            raise ParseError("noise_indices must be a list")
        scenario = Scenario(
            name=name,
            function_set=_parse_function_set(data["function_set"]),
            sensors=SensorArray(np.array(positions), np.array(counts, dtype=int)),
            signal_index=_int(data["signal_index"], "signal_index"),
            noise_indices=tuple(_int(k, "noise_indices") for k in noise),
            integer_mode=integer_mode,
            tolerances=tolerances,
            phases=tuple(_reals(sim["phases"], "phases")) if "phases" in sim else None,
            probe=tuple(_reals(sim["probe"], "probe")) if "probe" in sim else None,
        )
        # must describe a valid design problem
        F = scenario.coefficients()
        scenario.problem()
    except (ParseError, SensingError):
        raise
    except (ValueError, IndexError, TypeError) as exc:
        raise ParseError(str(exc)) from exc
    if scenario.phases is not None and len(scenario.phases) != F.shape[0]:
        raise ParseError(f"simulate.phases needs {F.shape[0]} entries")
    if scenario.probe is not None and len(scenario.probe) != F.shape[1]:
        raise ParseError(f"simulate.probe needs {F.shape[1]} entries")
    return scenario


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return parse_scenario(data)


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def example_scenarios() -> dict[str, Scenario]:
    """The Taylor, Fourier and point-source examples."""
    taylor = Scenario(
        name="taylor",
        function_set=Taylor(num_functions=5, length_scale=1.0),
        sensors=SensorArray(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([1, 2, 0, 2, 1])),
        signal_index=3,
        noise_indices=(0, 1, 2, 4),
    )
    fourier = Scenario(
        name="fourier",
        function_set=FourierSine(num_functions=4, length_scale=1.0),
        sensors=SensorArray(fourier_extremal_positions(4, 1.0), np.array([2, 2, 2, 2])),
        signal_index=3,
        noise_indices=(0, 1, 2),
    )
    # N1 (+) and N2 (-) cancel on the plane x = 0 that holds sensors 1 and 2;
    # driven by one process they form a single noise row (0, 0, c)
    pointsource = Scenario(
        name="pointsource",
        function_set=PointSources(
            sources=np.array([[0.0, 0.0, 2.0], [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            exponent=2.0,
            strengths=np.array([1.0, 1.0, -1.0]),
            groups=((0,), (1, 2)),
        ),
        sensors=SensorArray(
            np.array([[0.0, 1.0, 0.0], [0.0, -2.0, 0.0], [0.5, 0.0, 0.0]]), np.array([1, 1, 1])
        ),
        signal_index=0,
        noise_indices=(1,),
        integer_mode=True,
    )
    return {s.name: s for s in (taylor, fourier, pointsource)}


def write_examples(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, scenario in example_scenarios().items():
        path = directory / f"{name}.json"
        path.write_text(scenario.dumps() + "\n")
        paths.append(path)
    return paths
