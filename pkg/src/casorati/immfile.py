"""Immersion files: a flat JSON document with expression strings.

Example::

    {
      "name": "torus",
      "n": 2,
      "ambient_dim": 4,
      "components": ["r1*cos(u1)", "r2*cos(u2)", "r1*sin(u1)", "r2*sin(u2)"],
      "params": {"r1": 1.0, "r2": 2.0},
      "complex_pairing": "block",
      "sample": {"point": [0.5, 1.3], "box": [[0, 6.28], [0, 6.28]], "resolution": 10}
    }

Expressions stay strings in the file; they are parsed on load.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CasoratiError
from .geometry import ImmersionSpec

SCHEMA = 1


class FileFormatError(CasoratiError):
    pass


@dataclass
class ImmersionFile:
    name: str
    n: int
    ambient_dim: int
    components: list
    params: dict = field(default_factory=dict)
    complex_pairing: str = "none"
    sample: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) != self.ambient_dim:
            raise FileFormatError(
                f"{len(self.components)} components given for ambient_dim {self.ambient_dim}"
            )

    def to_spec(self) -> ImmersionSpec:
        return ImmersionSpec.from_strings(self.name, self.n, self.components, self.params, self.complex_pairing)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "n": self.n,
            "ambient_dim": self.ambient_dim,
            "components": list(self.components),
            "params": dict(self.params),
            "complex_pairing": self.complex_pairing,
        }
        if self.sample:
            d["sample"] = self.sample
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ImmersionFile":
        try:
            return cls(
                name=str(d.get("name", "immersion")),
                n=int(d["n"]),
                ambient_dim=int(d.get("ambient_dim", len(d["components"]))),
                components=[str(c) for c in d["components"]],
                params={str(k): float(v) for k, v in d.get("params", {}).items()},
                complex_pairing=str(d.get("complex_pairing", "none")),
                sample=dict(d.get("sample", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"malformed immersion file: {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> "ImmersionFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FileFormatError("immersion file must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ImmersionFile":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def from_spec(cls, spec: ImmersionSpec, sample=None) -> "ImmersionFile":
        return cls(
            name=spec.name,
            n=spec.n,
            ambient_dim=spec.N,
            components=spec.sources(),
            params=dict(spec.params),
            complex_pairing=spec.complex_pairing,
            sample=dict(sample or {}),
        )
