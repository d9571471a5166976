"""JSON run configurations: schema, validation and the bundled figure setups.

All model rates are dimensionless (units of the reference coupling g).
Physical units appear only in the ``fit`` block (picoseconds).
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass

import jsonschema
import numpy as np

from .liouvillian import SystemParams
from .operators import Space, build_space
from .sweep import AXIS_NAMES, OBSERVABLES, Axis, SweepSpec

__all__ = ["ConfigError", "SCHEMA", "load_config", "validate", "RunConfig", "BUILTIN", "builtin"]

_RATE = {"type": "number", "minimum": 0}
_POS = {"type": "number", "exclusiveMinimum": 0}

_MODEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_emitters", "kappa", "pump"],
    "properties": {
        "n_emitters": {"type": "integer", "minimum": 1, "maximum": 4},
        "fock_cutoff": {"type": "integer", "minimum": 1},
        "kappa": _RATE,
        "pump": _RATE,
        "dephasing": _RATE,
        "gamma_r": _RATE,
        "coupling": _RATE,
        "detunings": {"type": "array", "items": {"type": "number"}},
    },
}

_AXIS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "min", "max", "points"],
    "properties": {
        "name": {"enum": list(AXIS_NAMES)},
        "scale": {"enum": ["log", "linear"]},
        "min": {"type": "number"},
        "max": {"type": "number"},
        "points": {"type": "integer", "minimum": 2},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": _MODEL,
        "steady": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"observables": {"type": "array", "items": {"enum": list(OBSERVABLES)},
                                           "uniqueItems": True}},
        },
        "evolve": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_max", "points"],
            "properties": {
                "t_max": _RATE,
                "points": {"type": "integer", "minimum": 1},
                "initial_state": {"enum": ["ground", "fully-excited", "custom-diagonal"]},
                "populations": {"type": "array", "items": _RATE},
                "method": {"enum": ["RK45", "DOP853", "BDF", "expm"]},
            },
        },
        "g2": {
            "type": "object",
            "additionalProperties": False,
            "required": ["tau_max", "points"],
            "properties": {
                "tau_max": _RATE,
                "points": {"type": "integer", "minimum": 1},
                "kind": {"enum": ["collective", "cavity"]},
                "method": {"enum": ["RK45", "DOP853", "BDF", "expm"]},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axes"],
            "properties": {
                "axes": {"type": "array", "items": _AXIS, "minItems": 1, "maxItems": 2},
                "observables": {"type": "array", "items": {"enum": list(OBSERVABLES)},
                                "minItems": 1, "uniqueItems": True},
                "max_fock_cutoff": {"type": "integer", "minimum": 1},
            },
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "required": ["data", "tau_norm_ps"],
            "properties": {
                "data": {"type": "string"},
                "tau_norm_ps": _POS,
                "irf_sigma_ps": _RATE,
                "normalized": {"type": "boolean"},
                "init": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["A", "B", "T_a_ps", "T_b_ps"],
                    "properties": {"A": {"type": "number"}, "B": {"type": "number"},
                                   "T_a_ps": _POS, "T_b_ps": _POS},
                },
            },
        },
    },
}

REQUIRED_BLOCKS = {
    "steady": ("model",),
    "evolve": ("model", "evolve"),
    "g2": ("model", "g2"),
    "sweep": ("model", "sweep"),
    "fit": ("fit",),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration with its model objects resolved."""

    raw: dict
    space: Space | None = None
    params: SystemParams | None = None
    sweep: SweepSpec | None = None
    rho0_diagonal: np.ndarray | None = None


def load_config(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _model_objects(model: dict) -> tuple[Space, SystemParams]:
    n = model["n_emitters"]
    space = build_space(n, model.get("fock_cutoff", 3))
    det = model.get("detunings")
    if det is not None and len(det) != n:
        raise ConfigError(f"model.detunings has {len(det)} entries for {n} emitters")
    params = SystemParams(kappa=model["kappa"], pump=model["pump"],
                          dephasing=model.get("dephasing", 0.0),
                          gamma_r=model.get("gamma_r", 0.0),
                          g=model.get("coupling", 1.0), detunings=det)
    return space, params


def validate(cfg: dict, command: str) -> RunConfig:
    """Schema and semantic checks; no computation is performed."""
    if command not in REQUIRED_BLOCKS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    missing = [b for b in REQUIRED_BLOCKS[command] if b not in cfg]
    if missing:
        raise ConfigError(f"command {command!r} needs config block(s) {missing}")
    space = params = spec = diag = None
    try:
        if "model" in cfg:
            space, params = _model_objects(cfg["model"])
        if command == "evolve":
            ev = cfg["evolve"]
            init = ev.get("initial_state", "ground")
            if init == "custom-diagonal":
                pops = ev.get("populations")
                if pops is None:
                    raise ConfigError("custom-diagonal initial state needs evolve.populations")
                if len(pops) != space.emitter_dim:
                    raise ConfigError(
                        f"evolve.populations needs {space.emitter_dim} entries (one per emitter basis state)")
                if abs(sum(pops) - 1.0) > 1e-10:
                    raise ConfigError(f"evolve.populations sum to {sum(pops)!r}, not 1")
                diag = np.array(pops, dtype=float)
            elif "populations" in ev:
                raise ConfigError("evolve.populations is only allowed with initial_state 'custom-diagonal'")
            if space.n_emitters != 2:
                raise ConfigError("evolve reports Dicke populations and needs n_emitters = 2")
        if command == "steady" and "steady" in cfg:
            wanted = cfg["steady"].get("observables", [])
            dicke = {"p_gg", "p_ee", "p_plus", "p_minus", "contrast"}
            if space.n_emitters != 2 and dicke.intersection(wanted):
                raise ConfigError(
                    f"unsupported emitter count: Dicke populations need n_emitters = 2, "
                    f"got {space.n_emitters}")
        if command == "sweep":
            sw = cfg["sweep"]
            axes = tuple(Axis(a["name"], a["min"], a["max"], a["points"], a.get("scale", "log"))
                         for a in sw["axes"])
            spec = SweepSpec(axes=axes, fixed=params,
                             observables=tuple(sw.get("observables", OBSERVABLES)),
                             fock_cutoff=space.fock_cutoff, n_emitters=space.n_emitters,
                             max_fock_cutoff=sw.get("max_fock_cutoff"))
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(cfg, space, params, spec, diag)


_FIG3_AXES = [
    {"name": "kappa", "scale": "log", "min": 0.1, "max": 100.0, "points": 40},
    {"name": "pump", "scale": "log", "min": 1e-4, "max": 100.0, "points": 40},
]

BUILTIN: dict[str, dict] = {
    # steady-state maps versus cavity loss and pump
    "fig3": {
        "model": {"n_emitters": 2, "fock_cutoff": 3, "kappa": 1.0, "pump": 1.0},
        "sweep": {"axes": _FIG3_AXES, "observables": list(OBSERVABLES)},
    },
    # population dynamics from |gg,0>; one run per pump rate
    "figS3": {
        "model": {"n_emitters": 2, "fock_cutoff": 10, "kappa": 3.0, "pump": 0.1},
        "evolve": {"t_max": 100.0, "points": 401, "initial_state": "ground"},
        "pumps": [0.1, 1.0, 10.0],
    },
    # cavity loss versus coupling at weak pump
    "figS4": {
        "model": {"n_emitters": 2, "fock_cutoff": 3, "kappa": 1.0, "pump": 9e-4},
        "sweep": {"axes": [
            {"name": "kappa", "scale": "log", "min": 0.1, "max": 100.0, "points": 40},
            {"name": "coupling", "scale": "log", "min": 0.1, "max": 10.0, "points": 40},
        ], "observables": list(OBSERVABLES), "max_fock_cutoff": 24},
    },
    # pump versus dephasing at kappa = 11.7
    "figS5": {
        "model": {"n_emitters": 2, "fock_cutoff": 3, "kappa": 11.7, "pump": 1.0},
        "sweep": {"axes": [
            {"name": "pump", "scale": "log", "min": 1e-4, "max": 100.0, "points": 40},
            {"name": "dephasing", "scale": "log", "min": 1e-3, "max": 100.0, "points": 40},
        ], "observables": list(OBSERVABLES), "max_fock_cutoff": 24},
    },
    # g2(0) versus kappa for several dephasing rates
    "figS6": {
        "model": {"n_emitters": 2, "fock_cutoff": 3, "kappa": 1.0, "pump": 9e-4},
        "dephasings": [0.0, 0.01, 0.1, 1.0],
        "kappa_range": [0.1, 100.0],
        "points": 40,
    },
}


def builtin(name: str) -> dict:
    if name not in BUILTIN:
        raise ConfigError(f"unknown figure {name!r}; choose from {sorted(BUILTIN)}")
    return copy.deepcopy(BUILTIN[name])
