"""JSON configuration: schema, defaults, semantic validation and conversion to
module inputs.

Matrices are row-major arrays of arrays. Errors carry a JSON-path style
location such as ``$.agent.B`` or ``$.topology.banks.canonical.graphs.4[1]``.
"""
from __future__ import annotations

import copy
import json
from dataclasses import fields
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .graphs import Graph, TopologyBank
from .numerics import NumericSettings
from .simulator import Event, Scenario
from .synthesis import PerturbationBox
from .sysmodel import StateSpace

__all__ = ["Config", "SCHEMA", "load_config", "load_default_config", "synthesize_from_config"]

_NUM = {"type": "number"}
_MATRIX = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": _NUM}}
_VECTOR = {"type": "array", "minItems": 1, "items": _NUM}
_IDS = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_POS = {"type": "number", "exclusiveMinimum": 0}

_EVENT = {
    "type": "object",
    "required": ["time", "kind"],
    "additionalProperties": False,
    "properties": {
        "time": {"type": "number", "minimum": 0},
        "kind": {"enum": ["remove", "add", "switch_set"]},
        "agents": _IDS,
        "count": {"type": "integer", "minimum": 1},
        "states": {"type": "array", "items": _VECTOR},
        "bank": {"type": "string"},
    },
}

_CASE = {
    "type": "object",
    "required": ["initial_agents"],
    "additionalProperties": False,
    "properties": {
        "description": {"type": "string"},
        "initial_agents": {**_IDS, "minItems": 1},
        "initial_states": {"type": "object", "patternProperties": {"^[1-9][0-9]*$": _VECTOR},
                           "additionalProperties": False},
        "events": {"type": "array", "items": _EVENT},
        "parameter_values": {"type": "array", "items": _NUM},
        "dA": _MATRIX,
        "dB": _MATRIX,
        "bank": {"type": "string"},
        "dt": _POS,
        "t_end": _POS,
        "switch_period": _POS,
    },
}

_GRAPH = {
    "type": "object",
    "required": ["edges"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "edges": {"type": "array",
                  "items": {"type": "array", "minItems": 2, "maxItems": 2,
                            "items": {"type": "integer", "minimum": 1}}},
    },
}

_BANK = {
    "type": "object",
    "required": ["graphs"],
    "additionalProperties": False,
    "properties": {
        "nominal": {"type": ["integer", "null"], "minimum": 1},
        "reduced": {"type": ["integer", "null"], "minimum": 1},
        "enlarged": {"type": ["integer", "null"], "minimum": 1},
        "graphs": {"type": "object", "minProperties": 1,
                   "patternProperties": {"^[1-9][0-9]*$": {"type": "array", "minItems": 1,
                                                           "items": _GRAPH}},
                   "additionalProperties": False},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["agent", "topology"],
    "additionalProperties": False,
    "properties": {
        "agent": {
            "type": "object",
            "required": ["A", "B", "C"],
            "additionalProperties": False,
            "properties": {
                "A": _MATRIX, "B": _MATRIX, "C": _MATRIX,
                "perturbation": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {k: _MATRIX for k in
                                   ("dA_lower", "dA_upper", "dB_lower", "dB_upper")},
                },
                "grid_count": {"type": "integer", "minimum": 1},
                "parameter": {
                    "type": "object",
                    "required": ["name", "nominal", "dA_direction"],
                    "additionalProperties": False,
                    "properties": {"name": {"type": "string"}, "nominal": _NUM,
                                   "dA_direction": _MATRIX, "dB_direction": _MATRIX},
                },
            },
        },
        "topology": {
            "type": "object",
            "required": ["banks"],
            "additionalProperties": False,
            "properties": {
                "default_bank": {"type": "string"},
                "banks": {"type": "object", "minProperties": 1, "additionalProperties": _BANK},
            },
        },
        "synthesis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gamma_rel": {"type": "number", "minimum": 1},
                "workers": {"type": ["integer", "null"], "minimum": 1},
                "tolerances": {"type": "object", "additionalProperties": False,
                               "properties": {f.name: _POS for f in fields(NumericSettings)}},
            },
        },
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": _POS, "t_end": _POS, "switch_period": _POS,
                "initial_states": {"type": "object",
                                   "patternProperties": {"^[1-9][0-9]*$": _VECTOR},
                                   "additionalProperties": False},
                "cases": {"type": "object", "additionalProperties": _CASE},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]},
                            "uniqueItems": True},
                "record_every": {"type": "integer", "minimum": 1},
            },
        },
    },
}

_DEFAULTS = {
    "synthesis": {"gamma_rel": 1.0, "workers": None, "tolerances": {}},
    "scenario": {"dt": 0.01, "t_end": 800.0, "switch_period": 1.0, "initial_states": {},
                 "cases": {}},
    "output": {"directory": "raidd-out", "formats": ["csv", "json"], "record_every": 1},
}


def _location(path) -> str:
    loc = "$"
    for p in path:
        loc += f"[{p}]" if isinstance(p, int) else f".{p}"
    return loc


def _matrix(data, loc, shape=None):
    rows = {len(r) for r in data}
    if len(rows) != 1:
        raise ConfigError("rows of unequal length", loc)
    M = np.array(data, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ConfigError("non-finite matrix entry", loc)
    if shape is not None and M.shape != shape:
        raise ConfigError(f"expected shape {shape}, got {M.shape}", loc)
    return M


class Config:
    """A validated configuration with defaults filled in.

    ``to_dict`` returns the normalized document; feeding it back through
    :meth:`from_dict` reproduces it field for field.
    """

    def __init__(self, data: dict):
        self._data = data

    @classmethod
    def from_dict(cls, raw) -> "Config":
        validator = jsonschema.Draft202012Validator(SCHEMA)
        err = jsonschema.exceptions.best_match(validator.iter_errors(raw))
        if err is not None:
            raise ConfigError(err.message, _location(err.absolute_path))
        data = copy.deepcopy(raw)
        for section, defaults in _DEFAULTS.items():
            block = data.setdefault(section, {})
            for k, v in defaults.items():
                block.setdefault(k, copy.deepcopy(v))
        agent = data["agent"]
        agent.setdefault("grid_count", 21)
        cfg = cls(data)
        cfg._check()
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "$") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", "$") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return copy.deepcopy(self._data)

    def dumps(self) -> str:
        return json.dumps(self._data, indent=2) + "\n"

    # -- semantic checks -------------------------------------------------

    def _check(self):
        a = self._data["agent"]
        A = _matrix(a["A"], "$.agent.A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ConfigError(f"A must be square, got {A.shape}", "$.agent.A")
        B = _matrix(a["B"], "$.agent.B")
        if B.shape[0] != n:
            raise ConfigError(f"B needs {n} rows", "$.agent.B")
        C = _matrix(a["C"], "$.agent.C")
        if C.shape[1] != n:
            raise ConfigError(f"C needs {n} columns", "$.agent.C")
        m = B.shape[1]
        for k, v in a.get("perturbation", {}).items():
            _matrix(v, f"$.agent.perturbation.{k}", (n, n) if k.startswith("dA") else (n, m))
        if "parameter" in a:
            _matrix(a["parameter"]["dA_direction"], "$.agent.parameter.dA_direction", (n, n))
            if "dB_direction" in a["parameter"]:
                _matrix(a["parameter"]["dB_direction"], "$.agent.parameter.dB_direction", (n, m))
        try:
            self.box()
        except ValueError as exc:
            raise ConfigError(str(exc), "$.agent.perturbation") from exc

        banks = self._data["topology"]["banks"]
        default = self._data["topology"].get("default_bank")
        if default is not None and default not in banks:
            raise ConfigError(f"unknown bank {default!r}", "$.topology.default_bank")
        for name in banks:
            self._bank(name)

        sc = self._data["scenario"]
        for key, vec in sc["initial_states"].items():
            if len(vec) != n:
                raise ConfigError(f"state needs {n} entries", f"$.scenario.initial_states.{key}")
        for key, case in sc["cases"].items():
            self._check_case(key, case, n, m, banks)

    def _check_case(self, key, case, n, m, banks):
        loc = f"$.scenario.cases.{key}"
        known = {int(k) for k in self._data["scenario"]["initial_states"]}
        known |= {int(k) for k in case.get("initial_states", {})}
        for k, vec in case.get("initial_states", {}).items():
            if len(vec) != n:
                raise ConfigError(f"state needs {n} entries", f"{loc}.initial_states.{k}")
        for i in case["initial_agents"]:
            if i not in known:
                raise ConfigError(f"no initial state for agent {i}", f"{loc}.initial_agents")
        if "dA" in case:
            _matrix(case["dA"], f"{loc}.dA", (n, n))
        if "dB" in case:
            _matrix(case["dB"], f"{loc}.dB", (n, m))
        if case.get("parameter_values") and "parameter" not in self._data["agent"]:
            raise ConfigError("parameter_values needs agent.parameter", f"{loc}.parameter_values")
        if "bank" in case and case["bank"] not in banks:
            raise ConfigError(f"unknown bank {case['bank']!r}", f"{loc}.bank")
        for j, ev in enumerate(case.get("events", [])):
            eloc = f"{loc}.events[{j}]"
            for s in ev.get("states", []):
                if len(s) != n:
                    raise ConfigError(f"state needs {n} entries", f"{eloc}.states")
            if ev["kind"] == "switch_set" and ev.get("bank") not in banks:
                raise ConfigError(f"unknown bank {ev.get('bank')!r}", f"{eloc}.bank")
            if ev["kind"] == "add" and not ev.get("states"):
                for a in ev.get("agents", []):
                    if a not in known:
                        raise ConfigError(f"no initial state for agent {a}", f"{eloc}.agents")
            try:
                Event(**ev)
            except ValueError as exc:
                raise ConfigError(str(exc), eloc) from exc

    # -- conversions -----------------------------------------------------

    @property
    def data(self):
        return self._data

    def agent(self) -> StateSpace:
        a = self._data["agent"]
        C = np.array(a["C"], dtype=float)
        B = np.array(a["B"], dtype=float)
        return StateSpace(a["A"], B, C, np.zeros((C.shape[0], B.shape[1])))

    def box(self, grid_count: int | None = None) -> PerturbationBox:
        a = self._data["agent"]
        P = self.agent()
        n, m = P.nstates, P.ninputs
        pert = a.get("perturbation", {})
        get = lambda k, shape: np.array(pert[k], dtype=float) if k in pert else np.zeros(shape)
        return PerturbationBox(get("dA_lower", (n, n)), get("dA_upper", (n, n)),
                               get("dB_lower", (n, m)), get("dB_upper", (n, m)),
                               grid_count if grid_count is not None else a["grid_count"])

    def _bank(self, name) -> TopologyBank:
        spec = self._data["topology"]["banks"][name]
        sets = {}
        for key, graphs in spec["graphs"].items():
            count = int(key)
            sets[count] = []
            for h, g in enumerate(graphs):
                try:
                    G = Graph(count, frozenset(tuple(e) for e in g["edges"]),
                              g.get("name") or f"{name}-{count}-{h}")
                except ValueError as exc:
                    raise ConfigError(str(exc),
                                      f"$.topology.banks.{name}.graphs.{key}[{h}]") from exc
                sets[count].append(G)
        roles = {}
        for role in ("nominal", "reduced", "enlarged"):
            c = spec.get(role)
            if c is not None and c not in sets:
                raise ConfigError(f"no graphs on {c} nodes", f"$.topology.banks.{name}.{role}")
            roles[role] = c
        if roles["nominal"] is None:
            roles["nominal"] = min(sets)
        return TopologyBank(sets, **roles)

    def bank_names(self):
        return list(self._data["topology"]["banks"])

    @property
    def default_bank(self) -> str:
        return self._data["topology"].get("default_bank") or self.bank_names()[0]

    def bank(self, name: str | None = None) -> TopologyBank:
        return self._bank(name or self.default_bank)

    def banks(self) -> dict:
        return {name: self._bank(name) for name in self.bank_names()}

    def settings(self) -> NumericSettings:
        tol = dict(self._data["synthesis"]["tolerances"])
        if "bisection_max_iter" in tol:
            tol["bisection_max_iter"] = int(tol["bisection_max_iter"])
        return NumericSettings(**tol)

    @property
    def gamma_rel(self) -> float:
        return float(self._data["synthesis"]["gamma_rel"])

    @property
    def workers(self):
        return self._data["synthesis"]["workers"]

    @property
    def output(self) -> dict:
        return self._data["output"]

    def case_names(self):
        return list(self._data["scenario"]["cases"])

    def perturbation_for(self, value):
        """``(dA, dB)`` for a value of the uncertain agent parameter."""
        P = self.agent()
        n, m = P.nstates, P.ninputs
        par = self._data["agent"].get("parameter")
        if value is None or par is None:
            return np.zeros((n, n)), np.zeros((n, m))
        delta = float(value) - float(par["nominal"])
        dA = delta * np.array(par["dA_direction"], dtype=float)
        dB = delta * np.array(par.get("dB_direction", np.zeros((n, m))), dtype=float)
        return dA, dB

    def scenarios(self, case, controller, values=None) -> list[Scenario]:
        """One :class:`Scenario` per parameter value of a configured case."""
        key = str(case)
        cases = self._data["scenario"]["cases"]
        if key not in cases:
            raise ConfigError(f"no case {key!r} (have {sorted(cases)})", "$.scenario.cases")
        c = cases[key]
        sc = self._data["scenario"]
        par = self._data["agent"].get("parameter")
        if values is None:
            values = c.get("parameter_values") or [None]
        states = {int(k): v for k, v in sc["initial_states"].items()}
        states.update({int(k): v for k, v in c.get("initial_states", {}).items()})
        banks = self.banks()
        out = []
        for val in values:
            dA, dB = self.perturbation_for(val)
            if "dA" in c:
                dA = dA + np.array(c["dA"], dtype=float)
            if "dB" in c:
                dB = dB + np.array(c["dB"], dtype=float)
            label = f"case{key}" if key.isdigit() else key
            if val is not None:
                label += f"_{par['name']}{float(val):.4f}"
            out.append(Scenario(
                agent_nominal=self.agent(), controller=controller, banks=banks,
                initial_states={i: states[i] for i in c["initial_agents"]},
                events=[Event(**ev) for ev in c.get("events", [])],
                t_end=float(c.get("t_end", sc["t_end"])), dt=float(c.get("dt", sc["dt"])),
                switch_period=float(c.get("switch_period", sc["switch_period"])),
                dA=dA, dB=dB, active_bank=c.get("bank", self.default_bank),
                default_states=states, label=label,
            ))
        return out


def load_config(path) -> Config:
    return Config.load(path)


def load_default_config() -> Config:
    """The case-study configuration shipped inside the package."""
    text = resources.files("raidd").joinpath("data/uuv_case_study.json").read_text("utf-8")
    return Config.from_dict(json.loads(text))


def synthesize_from_config(cfg: Config, gamma_rel: float | None = None, report=None):
    """Convenience wrapper around :func:`raidd.pipeline.synthesize`."""
    from .pipeline import synthesize
    return synthesize(cfg, gamma_rel=gamma_rel, report=report)
