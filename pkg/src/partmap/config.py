"""Engine configuration: code-book parameters and the relation strategy.

Everything has a default matching the reference setup; scenario files only
name the fields they override.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any

import numpy as np

from .codes import DispCodebook, GridModule, HeadingCode, OvcCodebook
from .errors import ScenarioError


def seed_stream(seed: int, name: str) -> np.random.Generator:
    """Independent, reproducible RNG stream for one purpose.

    Streams are keyed by name, so adding a new consumer never shifts the
    draws of existing ones.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(key,)))


class RelationStrategy(Enum):
    """How stored edges answer part-to-part relation queries.

    LEARNED_ONLY reads exactly what was stored. WITH_REVERSE additionally
    negates a stored opposite-direction edge. PATH_AGGREGATE sums decoded
    displacements along the fewest-hop path, traversing edges either way.
    DISABLED answers nothing; attention shifts then fall back to continuity.
    """

    LEARNED_ONLY = "LEARNED_ONLY"
    WITH_REVERSE = "WITH_REVERSE"
    PATH_AGGREGATE = "PATH_AGGREGATE"
    DISABLED = "DISABLED"


@dataclass(frozen=True)
class OvcParams:
    n_dir: int = 24
    n_ring: int = 10
    r0: float = 0.25
    growth: float = 1.4


@dataclass(frozen=True)
class GridParams:
    period: float = 2.0
    m: int = 20


@dataclass(frozen=True)
class DispParams:
    n_dir: int = 12
    n_ring: int = 6
    d0: float = 0.5
    growth: float = 1.6
    still_threshold: float = 0.05


@dataclass(frozen=True)
class HeadingParams:
    n_bins: int = 72


@dataclass(frozen=True)
class EngramParams:
    dim: int = 2048
    bits: int = 40
    overlap_max: int = 10


@dataclass(frozen=True)
class DescriptorParams:
    dim: int = 256
    bits: int = 16
    similarity_threshold: float = 0.75


@dataclass(frozen=True)
class EngineConfig:
    ovc: OvcParams = field(default_factory=OvcParams)
    grid: GridParams = field(default_factory=GridParams)
    disp: DispParams = field(default_factory=DispParams)
    heading: HeadingParams = field(default_factory=HeadingParams)
    engram: EngramParams = field(default_factory=EngramParams)
    descriptor: DescriptorParams = field(default_factory=DescriptorParams)
    strategy: RelationStrategy = RelationStrategy.WITH_REVERSE

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, RelationStrategy):
                out[f.name] = value.value
            else:
                out[f.name] = {g.name: getattr(value, g.name) for g in fields(value)}
        return out


_SECTIONS = {
    "ovc": OvcParams,
    "grid": GridParams,
    "disp": DispParams,
    "heading": HeadingParams,
    "engram": EngramParams,
    "descriptor": DescriptorParams,
}


def config_from_dict(raw: dict[str, Any]) -> EngineConfig:
    """Build a validated EngineConfig from a (possibly partial) plain dict."""
    if not isinstance(raw, dict):
        raise ScenarioError("config must be an object")
    unknown = set(raw) - set(_SECTIONS) - {"strategy"}
    if unknown:
        raise ScenarioError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ScenarioError(f"config.{name} must be an object")
        allowed = {f.name for f in fields(cls)}
        bad = set(section) - allowed
        if bad:
            raise ScenarioError(f"unknown config.{name} keys: {sorted(bad)}")
        try:
            kwargs[name] = cls(**section)
        except TypeError as exc:
            raise ScenarioError(f"bad config.{name}: {exc}") from exc
    strategy = raw.get("strategy", RelationStrategy.WITH_REVERSE.value)
    try:
        kwargs["strategy"] = RelationStrategy(strategy)
    except ValueError as exc:
        names = [s.value for s in RelationStrategy]
        raise ScenarioError(f"strategy must be one of {names}") from exc
    config = EngineConfig(**kwargs)
    _validate(config)
    return config


def _validate(config: EngineConfig) -> None:
    o, g, d = config.ovc, config.grid, config.disp
    checks = [
        (o.n_dir >= 2 and o.n_dir % 2 == 0, "ovc.n_dir must be even and >= 2"),
        (o.n_ring >= 1, "ovc.n_ring must be >= 1"),
        (o.r0 > 0.0 and o.growth > 1.0, "ovc needs r0 > 0, growth > 1"),
        (g.period > 0.0 and g.m >= 1, "grid needs period > 0, m >= 1"),
        (d.n_dir >= 2 and d.n_dir % 2 == 0, "disp.n_dir must be even and >= 2"),
        (d.n_ring >= 1, "disp.n_ring must be >= 1"),
        (d.d0 > 0.0 and d.growth > 1.0, "disp needs d0 > 0, growth > 1"),
        (0.0 < d.still_threshold < d.d0, "disp.still_threshold must sit in (0, d0)"),
        (config.heading.n_bins >= 1, "heading.n_bins must be >= 1"),
        (0 < config.engram.bits <= config.engram.dim, "engram bits must fit in dim"),
        (0 <= config.engram.overlap_max < config.engram.bits,
         "engram.overlap_max must sit in [0, bits)"),
        (0 < config.descriptor.bits <= config.descriptor.dim,
         "descriptor bits must fit in dim"),
        (0.0 < config.descriptor.similarity_threshold <= 1.0,
         "descriptor.similarity_threshold must sit in (0, 1]"),
    ]
    for ok, message in checks:
        if not ok:
            raise ScenarioError(message)


@dataclass(frozen=True)
class CodeSuite:
    """The concrete code books built from one configuration."""

    heading: HeadingCode
    ovc: OvcCodebook
    grid: GridModule
    disp: DispCodebook


def build_codes(config: EngineConfig) -> CodeSuite:
    return CodeSuite(
        heading=HeadingCode(config.heading.n_bins),
        ovc=OvcCodebook(config.ovc.n_dir, config.ovc.n_ring,
                        config.ovc.r0, config.ovc.growth),
        grid=GridModule(config.grid.period, config.grid.m),
        disp=DispCodebook(config.disp.n_dir, config.disp.n_ring,
                          config.disp.d0, config.disp.growth,
                          config.disp.still_threshold),
    )
