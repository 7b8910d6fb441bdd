"""Configuration search space: parameter definitions, sampling and encoding.

A space is an ordered list of parameters; a configuration is an ordered list
of values aligned with it. Categorical values are encoded as their ordinal
index in the declared value list so every tree model sees a fixed-width
numeric feature vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import yaml


class SpaceError(ValueError):
    """Invalid parameter definition or value outside its domain."""


class PoolExhaustedError(RuntimeError):
    """The space cannot supply the requested number of distinct points."""


CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    lo: float | None = None
    hi: float | None = None
    values: tuple = ()
    units: str = ""

    def __post_init__(self):
        if self.kind in (CONTINUOUS, INTEGER):
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise SpaceError(f"{self.name}: need lo < hi for {self.kind} parameter")
        elif self.kind == CATEGORICAL:
            if not self.values:
                raise SpaceError(f"{self.name}: categorical value list is empty")
            if len(set(self.values)) != len(self.values):
                raise SpaceError(f"{self.name}: duplicate categorical values")
        else:
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")

    def contains(self, value) -> bool:
        if self.kind == CONTINUOUS:
            return isinstance(value, (int, float)) and self.lo <= value <= self.hi
        if self.kind == INTEGER:
            return float(value).is_integer() and self.lo <= value <= self.hi
        return value in self.values

    def sample(self, rng: np.random.Generator):
        if self.kind == CONTINUOUS:
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == INTEGER:
            return int(rng.integers(int(self.lo), int(self.hi) + 1))
        return self.values[int(rng.integers(len(self.values)))]

    def encode_value(self, value) -> float:
        if not self.contains(value):
            raise SpaceError(f"{self.name}: value {value!r} outside domain")
        if self.kind == CATEGORICAL:
            return float(self.values.index(value))
        return float(value)

    @property
    def cardinality(self) -> float:
        """Number of distinct values (inf for continuous)."""
        if self.kind == CONTINUOUS:
            return float("inf")
        if self.kind == INTEGER:
            return int(self.hi) - int(self.lo) + 1
        return len(self.values)


@dataclass(frozen=True)
class ConfigSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise SpaceError("parameter names must be unique")

    def __len__(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def validate(self, config: "Configuration") -> None:
        if len(config.values) != len(self.params):
            raise SpaceError(
                f"configuration has {len(config.values)} values, space has {len(self.params)}"
            )
        for spec, value in zip(self.params, config.values):
            if not spec.contains(value):
                raise SpaceError(f"{spec.name}: value {value!r} outside domain")

    @property
    def cardinality(self) -> float:
        total = 1.0
        for p in self.params:
            total *= p.cardinality
        return total


@dataclass(frozen=True)
class Configuration:
    values: tuple

    def key(self) -> tuple:
        return self.values


def sample_random(space: ConfigSpace, rng: np.random.Generator) -> Configuration:
    return Configuration(tuple(p.sample(rng) for p in space.params))


def encode(space: ConfigSpace, config: Configuration) -> np.ndarray:
    space.validate(config)
    return np.array(
        [p.encode_value(v) for p, v in zip(space.params, config.values)], dtype=np.float64
    )


def encode_pool(space: ConfigSpace, pool: Sequence[Configuration]) -> np.ndarray:
    return np.stack([encode(space, c) for c in pool]) if pool else np.empty((0, len(space)))


def candidate_pool(space: ConfigSpace, n: int, rng: np.random.Generator) -> list[Configuration]:
    """Sample n distinct configurations; rejection-samples duplicates."""
    if n < 1:
        raise SpaceError("pool size must be >= 1")
    if space.cardinality < n:
        raise PoolExhaustedError(
            f"space has only {space.cardinality:.0f} distinct points, {n} requested"
        )
    seen: set[tuple] = set()
    pool: list[Configuration] = []
    attempts = 0
    max_attempts = 1000 * n
    while len(pool) < n:
        cfg = sample_random(space, rng)
        attempts += 1
        if cfg.key() not in seen:
            seen.add(cfg.key())
            pool.append(cfg)
        elif attempts > max_attempts:
            raise PoolExhaustedError(f"could not draw {n} distinct points")
    return pool


# ---------------------------------------------------------------------------
# Space definition files.
#
# YAML schema:
#   params:
#     - name: cpu.freq
#       kind: continuous        # continuous | integer | categorical
#       range: [1.0, 3.7]       # numeric kinds
#       units: GHz              # optional free-form label
#     - name: hyperthreading
#       kind: categorical
#       values: ["off", "on"]   # quote on/off/true/false (YAML booleans)
# ---------------------------------------------------------------------------


def _param_from_dict(d: dict) -> ParamSpec:
    name = d["name"]
    kind = d["kind"]
    units = d.get("units", "")
    if kind == CATEGORICAL:
        values = d.get("values", [])
        for v in values:
            if isinstance(v, bool):
                raise SpaceError(
                    f"{name}: YAML parsed {v} as a boolean; quote on/off/true/false values"
                )
        return ParamSpec(name=name, kind=kind, values=tuple(values), units=units)
    lo, hi = d["range"]
    return ParamSpec(name=name, kind=kind, lo=float(lo), hi=float(hi), units=units)


def load_space(path) -> ConfigSpace:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or "params" not in doc:
        raise SpaceError(f"{path}: expected a top-level 'params' list")
    return ConfigSpace(tuple(_param_from_dict(d) for d in doc["params"]))


def save_space(space: ConfigSpace, path) -> None:
    out = {"params": []}
    for p in space.params:
        d: dict[str, Any] = {"name": p.name, "kind": p.kind}
        if p.kind == CATEGORICAL:
            d["values"] = [str(v) if isinstance(v, str) else v for v in p.values]
        else:
            d["range"] = [p.lo, p.hi]
        if p.units:
            d["units"] = p.units
        out["params"].append(d)
    with open(path, "w") as fh:
        yaml.safe_dump(out, fh, sort_keys=False)
