"""Run configuration: a JSON document checked against a published schema."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .model import ContagionParams, SymmetricCompetitorParams, validate
from .pricing import ScheduleError, SwapSchedule, build_schedule
from .quadrature import QuadConfig


class ConfigError(ValueError):
    pass


_RATE = {"type": "number"}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "contagion-cds run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "description": "Symmetric competitor form {b0, c0, b, c} or general form {b0, c0, b1, c1, b2, c2}.",
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["b0", "c0", "b", "c"],
                    "properties": {k: _RATE for k in ("b0", "c0", "b", "c")},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["b0", "c0", "b1", "c1", "b2", "c2"],
                    "properties": {k: _RATE for k in ("b0", "c0", "b1", "c1", "b2", "c2")},
                },
            ],
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "maturity": _RATE,
                "interval": _RATE,
                "settlement_lag": _RATE,
                "rate": _RATE,
            },
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "paths": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
                "workers": {"type": "integer", "minimum": 1},
            },
        },
        "quad": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "abs_tol": _RATE,
                "rel_tol": _RATE,
                "tail_epsilon": _RATE,
                "max_subdivisions": {"type": "integer"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": ["string", "null"]},
            },
        },
    },
}

DEFAULTS = {
    "model": {"b0": 0.1, "c0": 0.2, "b": 0.05, "c": 0.1},
    "schedule": {"maturity": 5.0, "interval": 0.25, "settlement_lag": 0.1, "rate": 0.05},
    "mc": {"paths": 1_000_000, "seed": 42, "workers": 1},
    "quad": {"abs_tol": 1e-10, "rel_tol": 1e-9, "tail_epsilon": 1e-12, "max_subdivisions": 100_000},
    "output": {"format": "json", "path": None},
}


@dataclass(frozen=True)
class RunConfig:
    model: ContagionParams | SymmetricCompetitorParams
    schedule: SwapSchedule
    paths: int
    seed: int
    workers: int
    quad: QuadConfig
    out_format: str
    out_path: str | None
    raw: dict

    def symmetric(self) -> SymmetricCompetitorParams:
        if not isinstance(self.model, SymmetricCompetitorParams):
            raise ConfigError(
                "this command needs the symmetric competitor model {b0, c0, b, c}"
            )
        return self.model


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if key == "model":
            out[key] = copy.deepcopy(value)
        elif isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def apply_override(doc: dict, assignment: str) -> None:
    """Apply ``section.key=value`` in place; the value is parsed as JSON if possible."""
    path, sep, text = assignment.partition("=")
    if not sep or "." not in path:
        raise ConfigError(f"override {assignment!r} is not of the form section.key=value")
    section, key = path.split(".", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    if section == "model" and key in ("b", "c", "b1", "c1", "b2", "c2"):
        general = {"b1", "c1", "b2", "c2"}
        model = doc.setdefault("model", {})
        # switching form drops the keys of the other form
        if key in general:
            for k in ("b", "c"):
                model.pop(k, None)
        else:
            for k in general:
                model.pop(k, None)
    doc.setdefault(section, {})[key] = value


def load(path: str | Path | None = None, overrides: list[str] = ()) -> RunConfig:
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    doc = _merge(DEFAULTS, doc)
    for item in overrides:
        apply_override(doc, item)
    return from_dict(doc)


def from_dict(doc: dict) -> RunConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc

    m = doc["model"]
    if "b" in m:
        model = SymmetricCompetitorParams(m["b0"], m["c0"], m["b"], m["c"])
    else:
        model = ContagionParams(m["b0"], m["c0"], m["b1"], m["c1"], m["b2"], m["c2"])
    violations = validate(model)
    if violations:
        raise ConfigError("invalid model parameters: " + ", ".join(violations))

    s = doc["schedule"]
    try:
        schedule = build_schedule(s["maturity"], s["interval"], s["settlement_lag"], s["rate"])
        quad = QuadConfig(**doc["quad"])
    except (ScheduleError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        model=model,
        schedule=schedule,
        paths=doc["mc"]["paths"],
        seed=doc["mc"]["seed"],
        workers=doc["mc"]["workers"],
        quad=quad,
        out_format=doc["output"]["format"],
        out_path=doc["output"]["path"],
        raw=doc,
    )
