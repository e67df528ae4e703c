"""JSON-shaped model and composition documents.

A model document looks like::

    {
    "schema_version": 1,
    "name": "fig1",
    "compartments": 3,
    "edges": [[1, 2], [2, 1], [2, 3], [3, 1]],
    "inputs": [1],
    "outputs": [1],
    "leaks": [1, 2, 3],
    "parameters": {"edges": {"1->2": "3/1"}, "leaks": {"1": "5/2"}}
    }

``name`` and ``parameters`` are optional.  The canonical form puts one
top-level key per line with sorted edges and vertex sets, so serializing a
parsed document a second time is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .graphs import DirectedGraph, GraphError
from .model import CompartmentModel, ModelError, ParameterPoint
from .transforms import TieredUnionSpec, TransformError

SCHEMA_VERSION = 1
MODEL_KEYS = ("schema_version", "name", "compartments", "edges", "inputs", "outputs", "leaks", "parameters")
COMPOSE_KEYS = ("schema_version", "name", "m1", "m2", "w1", "w2")


class DocumentError(ValueError):
    pass


@dataclass(frozen=True)
class ModelDocument:
    model: CompartmentModel
    point: ParameterPoint | None = None


def _int(v: Any, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise DocumentError(f"{what} must be an integer, got {v!r}")
    return v


def _vertex_list(raw: dict, key: str) -> list[int]:
    v = raw.get(key, [])
    if not isinstance(v, list):
        raise DocumentError(f"'{key}' must be a list of vertices")
    out = [_int(x, f"entry of '{key}'") for x in v]
    if len(set(out)) != len(out):
        raise DocumentError(f"'{key}' lists a vertex twice")
    return out


def parse_rational(s: Any, what: str) -> Fraction:
    if not isinstance(s, str):
        raise DocumentError(f"{what} must be a rational string 'p/q', got {s!r}")
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"{what}: cannot parse rational {s!r}") from exc


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def model_from_dict(raw: Any) -> ModelDocument:
    if not isinstance(raw, dict):
        raise DocumentError("model document must be a JSON object")
    unknown = set(raw) - set(MODEL_KEYS)
    if unknown:
        raise DocumentError(f"unknown keys: {sorted(unknown)}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {raw.get('schema_version')!r}; expected {SCHEMA_VERSION}")
    if "compartments" not in raw:
        raise DocumentError("missing 'compartments'")
    n = _int(raw["compartments"], "'compartments'")
    name = raw.get("name")
    if name is not None and not isinstance(name, str):
        raise DocumentError("'name' must be a string")
    edges_raw = raw.get("edges", [])
    if not isinstance(edges_raw, list):
        raise DocumentError("'edges' must be a list of [from, to] pairs")
    edges = []
    for e in edges_raw:
        if not isinstance(e, list) or len(e) != 2:
            raise DocumentError(f"edge {e!r} is not a [from, to] pair")
        edges.append((_int(e[0], "edge endpoint"), _int(e[1], "edge endpoint")))
    try:
        model = CompartmentModel(
            DirectedGraph(n, tuple(edges)),
            frozenset(_vertex_list(raw, "inputs")),
            frozenset(_vertex_list(raw, "outputs")),
            frozenset(_vertex_list(raw, "leaks")),
            name,
        )
    except (GraphError, ModelError) as exc:
        raise DocumentError(str(exc)) from exc
    point = None
    if "parameters" in raw:
        point = _parse_point(raw["parameters"], model)
    return ModelDocument(model, point)


def _parse_point(raw: Any, model: CompartmentModel) -> ParameterPoint:
    if not isinstance(raw, dict) or set(raw) - {"edges", "leaks"}:
        raise DocumentError("'parameters' must be an object with 'edges' and 'leaks'")
    values = {}
    for key, val in (raw.get("edges") or {}).items():
        try:
            a, b = (int(t) for t in key.split("->"))
        except ValueError as exc:
            raise DocumentError(f"edge parameter key {key!r} is not 'from->to'") from exc
        if not model.graph.has_edge(a, b):
            raise DocumentError(f"parameter given for missing edge {key}")
        values[(b, a)] = parse_rational(val, f"rate of edge {key}")
    for key, val in (raw.get("leaks") or {}).items():
        try:
            k = int(key)
        except ValueError as exc:
            raise DocumentError(f"leak parameter key {key!r} is not a vertex") from exc
        if k not in model.leaks:
            raise DocumentError(f"parameter given for missing leak {key}")
        values[(0, k)] = parse_rational(val, f"leak rate at {key}")
    point = ParameterPoint(values)
    try:
        point.check(model)
    except ModelError as exc:
        raise DocumentError(str(exc)) from exc
    return point


def model_to_dict(model: CompartmentModel, point: ParameterPoint | None = None) -> dict:
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if model.name is not None:
        out["name"] = model.name
    out["compartments"] = model.n
    out["edges"] = [list(e) for e in sorted(model.graph.edges)]
    out["inputs"] = sorted(model.inputs)
    out["outputs"] = sorted(model.outputs)
    out["leaks"] = sorted(model.leaks)
    if point is not None:
        out["parameters"] = {
            "edges": {f"{a}->{b}": format_rational(v) for (a, b), v in sorted(point.edge_rates.items())},
            "leaks": {str(k): format_rational(v) for k, v in sorted(point.leak_rates.items())},
        }
    return out


def dump_lines(d: dict) -> str:
    """One top-level key per line, values as compact JSON."""
    body = ",\n".join(f"{json.dumps(k)}: {json.dumps(v, ensure_ascii=False)}" for k, v in d.items())
    return "{\n" + body + "\n}\n"


def serialize_model(model: CompartmentModel, point: ParameterPoint | None = None) -> str:
    return dump_lines(model_to_dict(model, point))


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc


def parse_model(text: str) -> ModelDocument:
    return model_from_dict(_loads(text))


def load_model(path: str | Path) -> ModelDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_model(text)


def parse_compose(text: str) -> tuple[TieredUnionSpec, str | None]:
    raw = _loads(text)
    if not isinstance(raw, dict):
        raise DocumentError("compose document must be a JSON object")
    unknown = set(raw) - set(COMPOSE_KEYS)
    if unknown:
        raise DocumentError(f"unknown keys: {sorted(unknown)}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {raw.get('schema_version')!r}; expected {SCHEMA_VERSION}")
    for key in ("m1", "m2", "w1", "w2"):
        if key not in raw:
            raise DocumentError(f"missing '{key}'")
    m1 = model_from_dict(raw["m1"]).model
    m2 = model_from_dict(raw["m2"]).model
    w1 = _vertex_seq(raw["w1"], "w1")
    w2 = _vertex_seq(raw["w2"], "w2")
    name = raw.get("name")
    try:
        return TieredUnionSpec(m1, m2, w1, w2), name
    except TransformError as exc:
        raise DocumentError(str(exc)) from exc


def _vertex_seq(v: Any, key: str) -> tuple[int, ...]:
    if not isinstance(v, list):
        raise DocumentError(f"'{key}' must be a list of vertices")
    return tuple(_int(x, f"entry of '{key}'") for x in v)


def load_compose(path: str | Path) -> tuple[TieredUnionSpec, str | None]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_compose(text)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture such as ``"fig1.model"``."""
    p = Path(__file__).parent / "fixtures" / name
    if not p.exists():
        raise DocumentError(f"no bundled fixture {name!r}")
    return p


def load_fixture(name: str) -> CompartmentModel:
    return load_model(fixture_path(name)).model
