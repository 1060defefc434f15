"""
Run configuration: JSON loading, schema validation and per-command checks.
"""

from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .io import digest

#: keys each subcommand cannot run without
REQUIRED = {
    "adjacency": ("dimension", "kernel"),
    "simulate": ("dimension", "kernel", "lambda", "box", "samples"),
    "tau": ("dimension", "kernel", "lambda", "box", "samples", "displacements"),
    "chi": ("dimension", "kernel", "lambda", "box", "samples"),
    "lambda-c": ("dimension", "kernel", "box", "samples"),
    "oz": ("dimension", "kernel", "lambda", "box", "grid"),
    "certify": (),
    "compare": ("inputs",),
    "fit": ("inputs",),
}

DEFAULT_BUDGET_CELLS = 2**24
DEFAULT_BUDGET_SAMPLES = 10**7


class ConfigError(ValueError):
    """Invalid or incomplete configuration (exit code 2)."""


class BudgetExceeded(RuntimeError):
    """A run would exceed its resource budget (exit code 3)."""


def load_schema(name: str) -> dict:
    text = resources.files("rcmlab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, schema_name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{schema_name}: {where}: {exc.message}") from None


@dataclass(frozen=True)
class Seeds:
    master: int = 0
    point: int | None = None
    edge: int | None = None

    @property
    def sample_seed(self) -> int:
        return self.point if self.point is not None else self.master


@dataclass(frozen=True)
class Budget:
    cells: int = DEFAULT_BUDGET_CELLS
    samples: int = DEFAULT_BUDGET_SAMPLES


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration for one subcommand."""

    command: str
    raw: dict
    dimension: int | None = None
    kernel: dict | None = None
    lam: float | None = None
    L: float | None = None
    samples: int | None = None
    seeds: Seeds = field(default_factory=Seeds)
    budget: Budget = field(default_factory=Budget)

    @property
    def digest(self) -> str:
        return digest({"command": self.command, "config": self.raw})

    def section(self, key: str, default=None):
        return self.raw.get(key, default)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        return d


def _from_manifest(doc: dict) -> dict:
    """A manifest embeds its resolved config; re-running uses that."""
    if "config" in doc and "config_digest" in doc:
        return doc["config"]
    return doc


def build_config(command: str, doc: dict, seed: int | None = None,
                 budget_cells: int | None = None) -> RunConfig:
    if command not in REQUIRED:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = json.loads(json.dumps(_from_manifest(doc)))
    for key in REQUIRED[command]:
        if key not in doc:
            raise ConfigError(f"missing required key {key!r} for {command}")
    if seed is not None:
        doc.setdefault("seeds", {})["master"] = int(seed)
    if budget_cells is not None:
        doc.setdefault("budget", {})["cells"] = int(budget_cells)
    validate(doc, "config")
    box = doc.get("box", {})
    if command in ("simulate", "tau", "chi", "oz") and "L" not in box:
        raise ConfigError(f"missing required key 'box.L' for {command}")
    if command == "lambda-c" and "sizes" not in box:
        raise ConfigError("missing required key 'box.sizes' for lambda-c")
    if "displacements" in doc and "dimension" in doc:
        for x in doc["displacements"]:
            if len(x) != doc["dimension"]:
                raise ConfigError("displacement length does not match dimension")
    s = doc.get("seeds", {})
    b = doc.get("budget", {})
    return RunConfig(
        command=command,
        raw=doc,
        dimension=doc.get("dimension"),
        kernel=doc.get("kernel"),
        lam=doc.get("lambda"),
        L=box.get("L"),
        samples=doc.get("samples"),
        seeds=Seeds(s.get("master", 0), s.get("point"), s.get("edge")),
        budget=Budget(b.get("cells", DEFAULT_BUDGET_CELLS),
                      b.get("samples", DEFAULT_BUDGET_SAMPLES)),
    )


def load_config(command: str, path, **overrides) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return build_config(command, doc, **overrides)


def parse_p(p) -> float:
    return math.inf if p in ("inf", math.inf) else float(p)


def versions() -> dict:
    import numpy
    import scipy

    from . import __version__

    return {"rcmlab": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}
