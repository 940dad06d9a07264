"""Node library: loading, validating and serving the catalog of node specs.

The registry is an immutable, versioned JSON file shipped with the package.
Every lookup is exact; fuzzy matching is deliberately absent.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterator

SCHEMA_VERSION = 1

CATEGORIES = ("input", "output", "processor")

# Closed set of edge data types. The coarse "features" family is split into
# concrete types so that edge type-checking has real granularity.
DATA_TYPES = frozenset(
    {"image", "text", "masks", "landmarks", "tensor", "url", "string_list"}
)

_ID_RE = re.compile(r"^[a-z][a-z0-9]*(_[a-z0-9]+)*$")


class RegistryError(ValueError):
    """Malformed or invalid registry file; message names the offending spec/field."""


@dataclass(frozen=True)
class SocketSpec:
    socket_id: str
    data_types: tuple[str, ...]


@dataclass(frozen=True)
class NodeSpec:
    node_spec_id: str
    category: str
    short_description: str
    description: str
    input_specs: tuple[SocketSpec, ...]
    output_specs: tuple[SocketSpec, ...]
    recommended_nodes: tuple[str, ...] = ()
    default_params: dict[str, Any] = field(default_factory=dict)
    examples: tuple[str, ...] = ()
    provenance: str | None = None

    def input_socket(self, socket_id: str) -> SocketSpec | None:
        for sock in self.input_specs:
            if sock.socket_id == socket_id:
                return sock
        return None

    def output_socket(self, socket_id: str) -> SocketSpec | None:
        for sock in self.output_specs:
            if sock.socket_id == socket_id:
                return sock
        return None

    @property
    def default_output(self) -> SocketSpec | None:
        """First declared output socket; where unqualified references land."""
        return self.output_specs[0] if self.output_specs else None


@dataclass(frozen=True)
class Registry:
    version: int
    specs: dict[str, NodeSpec]

    def get(self, node_spec_id: str) -> NodeSpec | None:
        """Exact, case-sensitive lookup; None when absent."""
        return self.specs.get(node_spec_id)

    def __contains__(self, node_spec_id: str) -> bool:
        return node_spec_id in self.specs

    def __iter__(self) -> Iterator[NodeSpec]:
        return iter(self.specs.values())

    def __len__(self) -> int:
        return len(self.specs)

    @property
    def counts(self) -> dict[str, int]:
        totals = {c: 0 for c in CATEGORIES}
        for spec in self.specs.values():
            totals[spec.category] += 1
        return totals


def default_parameters(spec: NodeSpec) -> dict[str, Any]:
    """Copy of the spec's default parameters; empty when none are defined."""
    return dict(spec.default_params)


def _socket_from_dict(raw: Any, where: str) -> SocketSpec:
    if not isinstance(raw, dict):
        raise RegistryError(f"{where}: socket entry must be an object")
    socket_id = raw.get("socketId")
    data_types = raw.get("dataTypes")
    if not isinstance(socket_id, str) or not socket_id:
        raise RegistryError(f"{where}: missing or empty socketId")
    if not isinstance(data_types, list) or not data_types:
        raise RegistryError(f"{where}.{socket_id}: dataTypes must be a non-empty list")
    for dt in data_types:
        if dt not in DATA_TYPES:
            raise RegistryError(f"{where}.{socket_id}: unknown data type {dt!r}")
    return SocketSpec(socket_id=socket_id, data_types=tuple(data_types))


def _spec_from_dict(raw: dict[str, Any]) -> NodeSpec:
    node_id = raw.get("nodeSpecId")
    if not isinstance(node_id, str) or not _ID_RE.match(node_id):
        raise RegistryError(f"nodeSpecId {node_id!r} is not lowercase snake_case")
    where = f"nodes[{node_id}]"

    category = raw.get("category")
    if category not in CATEGORIES:
        raise RegistryError(f"{where}: invalid category {category!r}")

    inputs = tuple(
        _socket_from_dict(s, f"{where}.inputSpecs") for s in raw.get("inputSpecs", [])
    )
    outputs = tuple(
        _socket_from_dict(s, f"{where}.outputSpecs") for s in raw.get("outputSpecs", [])
    )

    seen: set[str] = set()
    for sock in (*inputs, *outputs):
        if sock.socket_id in seen:
            raise RegistryError(f"{where}: duplicate socket id {sock.socket_id!r}")
        seen.add(sock.socket_id)

    if category == "input" and inputs:
        raise RegistryError(f"{where}: input nodes must not declare inputSpecs")
    if category == "output" and outputs:
        raise RegistryError(f"{where}: output nodes must not declare outputSpecs")
    if category == "processor" and (not inputs or not outputs):
        raise RegistryError(f"{where}: processor nodes need inputSpecs and outputSpecs")

    params = raw.get("defaultParams", {})
    if not isinstance(params, dict):
        raise RegistryError(f"{where}: defaultParams must be an object")
    input_names = {s.socket_id for s in inputs}
    for key in params:
        if key in input_names:
            raise RegistryError(
                f"{where}: default param {key!r} collides with an input socket"
            )

    return NodeSpec(
        node_spec_id=node_id,
        category=category,
        short_description=str(raw.get("shortDescription", "")),
        description=str(raw.get("description", "")),
        input_specs=inputs,
        output_specs=outputs,
        recommended_nodes=tuple(raw.get("recommendedNodes", [])),
        default_params=dict(params),
        examples=tuple(raw.get("examples", [])),
        provenance=raw.get("provenance"),
    )


def load_registry(path: str | Path) -> Registry:
    """Load and validate a registry file; deterministic for a given file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise RegistryError(f"cannot read registry {path}: {exc}") from exc
    return registry_from_dict(raw)


def registry_from_dict(raw: Any) -> Registry:
    if not isinstance(raw, dict):
        raise RegistryError("registry root must be an object")
    version = raw.get("version")
    if not isinstance(version, int):
        raise RegistryError("registry is missing an integer 'version' field")
    nodes = raw.get("nodes")
    if not isinstance(nodes, list):
        raise RegistryError("registry 'nodes' must be a list")

    specs: dict[str, NodeSpec] = {}
    for entry in nodes:
        if not isinstance(entry, dict):
            raise RegistryError("every node entry must be an object")
        spec = _spec_from_dict(entry)
        if spec.node_spec_id in specs:
            raise RegistryError(f"duplicate node_spec_id {spec.node_spec_id!r}")
        specs[spec.node_spec_id] = spec

    for spec in specs.values():
        for rec in spec.recommended_nodes:
            if rec not in specs:
                raise RegistryError(
                    f"nodes[{spec.node_spec_id}]: recommended node {rec!r} not in registry"
                )

    return Registry(version=version, specs=specs)


def registry_to_dict(reg: Registry) -> dict[str, Any]:
    """Inverse of registry_from_dict; round-trips to an identical registry."""
    nodes = []
    for spec in reg:
        entry: dict[str, Any] = {
            "nodeSpecId": spec.node_spec_id,
            "category": spec.category,
            "shortDescription": spec.short_description,
            "description": spec.description,
            "inputSpecs": [
                {"socketId": s.socket_id, "dataTypes": list(s.data_types)}
                for s in spec.input_specs
            ],
            "outputSpecs": [
                {"socketId": s.socket_id, "dataTypes": list(s.data_types)}
                for s in spec.output_specs
            ],
            "recommendedNodes": list(spec.recommended_nodes),
            "defaultParams": dict(spec.default_params),
            "examples": list(spec.examples),
        }
        if spec.provenance is not None:
            entry["provenance"] = spec.provenance
        nodes.append(entry)
    return {"version": reg.version, "nodes": nodes}


def canonical_registry_path() -> Path:
    return Path(str(resources.files("pipeforge").joinpath("data/registry.json")))


def load_canonical_registry() -> Registry:
    return load_registry(canonical_registry_path())
