"""Strict instance-file loading and saving.

Instances are JSON objects.  Table form:

    {"m": 3, "values": [0.0, 1.0, 1.0],
     "actions": [{"cost": 0.0, "pmf": [1.0, 0.0, 0.0]}, ...]}

Complementary-CDF form ("ccdf" holds one breakpoint list per outcome
threshold 1..m-1):

    {"m": 3, "values": [0.0, 1.0, 1.0], "cost_max": 0.8,
     "ccdf": [[{"cost": 0.0, "value": 0.0}, {"cost": 0.8, "value": 0.5}], ...]}

The loader rejects unknown keys at every level; the null action can be
auto-inserted behind an explicit flag, but the default is strict rejection
at validation time.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .instances import (
    Action,
    CcdfInstance,
    FiniteInstance,
    OutcomeSpace,
    dedupe_equal_actions,
    validate_ccdf,
    validate_finite,
)
from .piecewise import from_breakpoints
from .tolerances import ABS_TOL

Instance = Union[FiniteInstance, CcdfInstance]


class InstanceFormatError(ValueError):
    """Raised on malformed instance files (schema, JSON, or validation)."""


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceFormatError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise InstanceFormatError(f"missing key(s) {sorted(missing)} in {where}")


def parse_instance(text: str, insert_null: bool = False) -> Instance:
    """Parse without semantic validation (callers may want the report)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("top level must be an object")
    try:
        return _build_instance(data, insert_null)
    except InstanceFormatError:
        raise
    except (TypeError, ValueError) as exc:
        # Structural type confusion (strings where numbers belong, scalars
        # where arrays belong, non-increasing breakpoints, ...).
        raise InstanceFormatError(str(exc)) from exc


def _build_instance(data: dict, insert_null: bool) -> Instance:
    if "actions" in data:
        _require_keys(data, {"m", "values", "actions"}, {"m", "values", "actions"}, "top level")
        m = int(data["m"])
        values = tuple(float(v) for v in data["values"])
        if len(values) != m:
            raise InstanceFormatError(f"'values' has {len(values)} entries, expected m={m}")
        actions = []
        for i, entry in enumerate(data["actions"]):
            if not isinstance(entry, dict):
                raise InstanceFormatError(f"action {i} is not an object")
            _require_keys(entry, {"cost", "pmf"}, {"cost", "pmf"}, f"action {i}")
            actions.append(Action(float(entry["cost"]), tuple(float(p) for p in entry["pmf"])))
        if insert_null and not any(
            abs(a.cost) <= ABS_TOL and abs(a.pmf[0] - 1.0) <= ABS_TOL for a in actions if len(a.pmf) == m
        ):
            actions.insert(0, Action(0.0, (1.0,) + (0.0,) * (m - 1)))
        return FiniteInstance(OutcomeSpace(values), dedupe_equal_actions(actions))

    if "ccdf" in data:
        _require_keys(data, {"m", "values", "ccdf", "cost_max"}, {"m", "values", "ccdf", "cost_max"}, "top level")
        m = int(data["m"])
        values = tuple(float(v) for v in data["values"])
        if len(values) != m:
            raise InstanceFormatError(f"'values' has {len(values)} entries, expected m={m}")
        if len(data["ccdf"]) != m - 1:
            raise InstanceFormatError(f"'ccdf' has {len(data['ccdf'])} curves, expected m-1={m - 1}")
        fns = []
        for w, pts in enumerate(data["ccdf"], start=1):
            bkpts = []
            for i, entry in enumerate(pts):
                if not isinstance(entry, dict):
                    raise InstanceFormatError(f"breakpoint {i} of curve {w} is not an object")
                _require_keys(entry, {"cost", "value"}, {"cost", "value"}, f"curve {w} breakpoint {i}")
                bkpts.append((float(entry["cost"]), float(entry["value"])))
            if len(bkpts) < 2:
                raise InstanceFormatError(f"curve {w} needs at least 2 breakpoints")
            fns.append(from_breakpoints(sorted(bkpts)))
        return CcdfInstance(OutcomeSpace(values), tuple(fns), float(data["cost_max"]))

    raise InstanceFormatError("expected either an 'actions' or a 'ccdf' key")


def load_instance(path: Union[str, Path], insert_null: bool = False, validate: bool = True) -> Instance:
    text = Path(path).read_text()
    try:
        instance = parse_instance(text, insert_null=insert_null)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
    if validate:
        report = validate_finite(instance) if isinstance(instance, FiniteInstance) else validate_ccdf(instance)
        if not report.ok:
            raise InstanceFormatError(f"{path}: invalid instance\n{report}")
    return instance


def instance_to_json(instance: Instance) -> str:
    if isinstance(instance, FiniteInstance):
        data = {
            "m": instance.m,
            "values": list(instance.outcomes.values),
            "actions": [{"cost": a.cost, "pmf": list(a.pmf)} for a in instance.actions],
        }
    elif isinstance(instance, CcdfInstance):
        data = {
            "m": instance.m,
            "values": list(instance.outcomes.values),
            "ccdf": [
                [{"cost": x, "value": y} for x, y in fn.breakpoints()] for fn in instance.ccdf
            ],
            "cost_max": instance.cost_max,
        }
    else:
        raise TypeError(f"unsupported instance type {type(instance)!r}")
    return json.dumps(data, indent=2) + "\n"


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(instance_to_json(instance))
