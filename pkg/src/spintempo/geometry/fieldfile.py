"""Field-definition documents.

Example::

    family: point-mass
    params: {mu: 0.05, center: [0, 0, 0]}
    r_min: 2.0
    domain: {lo: [-50, -50, -50], hi: [50, 50, 50]}
    weak_cap: 0.05
    checks: {samples: 100, tolerance: 1.0e-12, seed: 0, shell: [2, 10]}

``superposition`` takes ``params.components``, a list of documents of the
same shape (without ``domain``, ``weak_cap`` or ``checks``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import docio
from .metric import DEFAULT_CAP, FieldError, MetricModel, make_field

DEFAULT_CHECKS = {"samples": 100, "tolerance": 1e-12, "seed": 0, "shell": [2.0, 10.0]}


@dataclass(frozen=True)
class FieldDocument:
    model: MetricModel
    checks: dict = field(default_factory=lambda: dict(DEFAULT_CHECKS))
    description: str = ""
    source: str | None = None
    explicit_checks: frozenset = frozenset()


def _build(doc: dict, domain, cap: float) -> MetricModel:
    params = dict(doc.get("params") or {})
    if doc["family"] == "superposition":
        params["components"] = [_build(c, domain, cap) for c in params.get("components", [])]
    return make_field(
        doc["family"],
        params,
        domain=domain,
        r_min=doc.get("r_min"),
        weak_cap=cap,
        strict=doc.get("strict", True),
    )


def field_from_dict(data: dict, source: str | None = None, text: str | None = None) -> FieldDocument:
    """Build a model from an already schema-validated document."""
    cap = float(data.get("weak_cap", DEFAULT_CAP))
    try:
        model = _build(data, data.get("domain"), cap)
    except FieldError as exc:
        line = docio.line_of(text, ["params"]) if text else None
        raise docio.ConfigError(str(exc), source, line) from None
    checks = dict(DEFAULT_CHECKS)
    checks.update(data.get("checks") or {})
    given = frozenset(data.get("checks") or {})
    return FieldDocument(model, checks, data.get("description", ""), source, given)


def parse_field(text: str, source: str | None = None) -> FieldDocument:
    data = docio.parse(text, "field", source)
    return field_from_dict(data, source, text)


def load_field(path) -> FieldDocument:
    data, text = docio.load(path, "field")
    return field_from_dict(data, str(path), text)
