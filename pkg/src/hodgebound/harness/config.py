"""Experiment configuration files.

INI syntax (``key = value`` lines under ``[section]`` headers).  Lists are
comma separated.  Sections:

[experiment]  id, kind, seed, output, workers
[domain]      outer, holes (for kinds built on an explicit domain)
[family]      family, n, p, plus family extras
[grid]        swept parameters, one list per key; ``h`` is the mesh ladder
[solver]      k, tol, maxiter
[cover]       margin, r0_coefficient, lam
[check]       experiment-specific acceptance settings
[instance.*]  named instances for experiments that loop over domains
"""

from __future__ import annotations

import configparser
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..geometry import Ball, DomainSpec, Hole, Polytope

KINDS = (
    "spectrum",
    "family_sweep",
    "perforation",
    "annulus_scaling",
    "union_bound",
    "mcgowan",
    "primitive",
    "partition",
    "structure",
)


class ConfigError(ValueError):
    pass


def parse_list(text: str, conv=float) -> list:
    return [conv(t.strip()) for t in text.split(",") if t.strip()]


def parse_outer(text: str, n: int | None = None) -> Ball | Polytope:
    """``ball cx cy [cz] r`` or ``box x0 y0 [z0] x1 y1 [z1]``."""
    parts = text.split()
    if not parts:
        raise ConfigError("empty outer description")
    kind, nums = parts[0], [float(t) for t in parts[1:]]
    if kind == "ball":
        return Ball(np.array(nums[:-1]), nums[-1])
    if kind == "box":
        d = len(nums) // 2
        lo, hi = np.array(nums[:d]), np.array(nums[d:])
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        return Polytope(corners)
    raise ConfigError(f"unknown outer body {kind!r}")


def parse_holes(text: str) -> list[Hole]:
    holes = []
    for chunk in text.split(";"):
        nums = [float(t) for t in chunk.split()]
        if nums:
            holes.append(Hole(np.array(nums[:-1]), nums[-1]))
    return holes


def domain_from_section(sec) -> DomainSpec:
    outer = parse_outer(sec["outer"])
    holes = parse_holes(sec.get("holes", ""))
    n = len(outer.center) if isinstance(outer, Ball) else outer.vertices.shape[1]
    return DomainSpec(n, outer, holes)


@dataclass
class ExperimentConfig:
    id: str
    kind: str
    seed: int = 0
    output: str = "runs"
    workers: int = 1
    grid: dict[str, list[float]] = field(default_factory=dict)
    h: list[float] = field(default_factory=list)
    k: int = 1
    tol: float = 1e-8
    maxiter: int = 1000
    sections: dict[str, dict[str, str]] = field(default_factory=dict)
    source: str = ""

    def section(self, name: str) -> dict[str, str]:
        return self.sections.get(name, {})

    def instances(self) -> list[tuple[str, dict[str, str]]]:
        return [(k.split(".", 1)[1], v) for k, v in self.sections.items() if k.startswith("instance.")]

    def points(self) -> list[dict[str, float]]:
        """Cartesian product of the grid (the h ladder excluded)."""
        keys = list(self.grid)
        if not keys:
            return [{}]
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]

    def get(self, section: str, key: str, default=None, conv=str):
        v = self.sections.get(section, {}).get(key)
        return default if v is None else conv(v)


def validate(cfg: ExperimentConfig) -> None:
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    if not cfg.h:
        raise ConfigError("empty h ladder")
    if any(b >= a for a, b in zip(cfg.h, cfg.h[1:])):
        raise ConfigError("h ladder must be strictly decreasing")
    for k, v in cfg.grid.items():
        if not v:
            raise ConfigError(f"empty grid for {k}")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    if cfg.k < 1:
        raise ConfigError("k must be at least 1")


def loads(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    cp.read_string(text)
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    sections = {s: dict(cp[s]) for s in cp.sections()}
    ex = sections["experiment"]
    grid = {}
    h = [0.1]
    if "grid" in sections:
        for key, val in sections["grid"].items():
            vals = parse_list(val)
            if key == "h":
                h = vals
            else:
                grid[key] = vals
    solver = sections.get("solver", {})
    cfg = ExperimentConfig(
        id=ex.get("id", "experiment"),
        kind=ex.get("kind", ""),
        seed=int(ex.get("seed", 0)),
        output=ex.get("output", "runs"),
        workers=int(ex.get("workers", 1)),
        grid=grid,
        h=h,
        k=int(solver.get("k", 1)),
        tol=float(solver.get("tol", 1e-8)),
        maxiter=int(solver.get("maxiter", 1000)),
        sections=sections,
        source=text,
    )
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    return loads(Path(path).read_text())
