"""YAML documents validated by JSON Schema, with line-numbered errors."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema
import yaml


class ConfigError(ValueError):
    """Invalid configuration document; ``line`` is 1-based when known."""

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        where = source or "<document>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line
        self.detail = message


def schema(name: str) -> dict:
    """A JSON schema shipped in ``spintempo/schemas``."""
    return json.loads(resources.files("spintempo").joinpath("schemas", f"{name}.json").read_text())


def _node_at(node, path):
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == key), None)
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


def line_of(text: str, path) -> int | None:
    """1-based line of the YAML node at ``path`` (keys and indices)."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return None
    if root is None:
        return None
    return _node_at(root, list(path)).start_mark.line + 1


def parse(text: str, schema_name: str, source: str | None = None) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", source, mark.line + 1 if mark else None) from None
    if data is None:
        data = {}
    validator = jsonschema.Draft202012Validator(schema(schema_name))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        loc = "/".join(str(p) for p in path) or "(top level)"
        raise ConfigError(f"{loc}: {err.message}", source, line_of(text, path))
    return data


def load(path, schema_name: str) -> tuple[dict, str]:
    """Read and validate a document; returns the data and the raw text."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", str(p)) from None
    return parse(text, schema_name, str(p)), text


def validate(data, schema_name: str):
    """Validate an in-memory document (used for reports)."""
    jsonschema.validate(data, schema(schema_name), cls=jsonschema.Draft202012Validator)
