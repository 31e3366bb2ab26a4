"""Experiment configuration: a YAML (or JSON) file of nested sections.

Every key has a default, listed by ``sparsweep print-config``.  Unknown keys
and ill-typed values are rejected with the line they appear on.
"""
from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    n: int = 64                     # nodes per side of the unit square, h = 1/n
    omega: float | None = None      # default: omega = n (omega h = 1)
    ppw: float | None = None        # alternative to omega: points per wavelength
    min_ppw: float = 6.0


@dataclass
class MediumConfig:
    kind: str = "smooth_bump"
    params: dict = field(default_factory=lambda: {"amplitude": 0.2})
    margin: float = 0.1


@dataclass
class PartitionConfig:
    L: int | None = None            # default: max(1, round(n / 50))
    L_vertical: int | None = None   # default: same as L
    q: int = 10
    shift_strength: float = 1.0
    local_solver: str = "banded"


@dataclass
class SparsifyConfig:
    window_radius: int = 12
    diagonal_rule: str = "cell"


@dataclass
class SolverConfig:
    outer_tol: float = 1e-10
    inner_tol: float = 1e-3
    sparse_tol: float = 1e-6
    flexible: bool = True
    bidirectional: bool = True
    max_outer: int = 200
    max_inner: int = 200


@dataclass
class WavesConfig:
    count: int = 64
    jitter: float = 0.0             # fraction of the angular spacing, seeded


@dataclass
class ScalingConfig:
    sizes: list = field(default_factory=lambda: [64, 128, 256])
    repeats: int = 3
    waves: int = 4


@dataclass
class OutputConfig:
    dir: str = "results"
    dump_field: bool = False
    export_matrix: bool = False


@dataclass
class ExperimentConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    medium: MediumConfig = field(default_factory=MediumConfig)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    sparsify: SparsifyConfig = field(default_factory=SparsifyConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    waves: WavesConfig = field(default_factory=WavesConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    workers: int = 1

    def omega_for(self, n: int) -> float:
        """Frequency on an ``n x n`` grid, keeping omega h (or ppw) fixed."""
        g = self.grid
        if g.ppw is not None:
            return 2.0 * math.pi * n / g.ppw
        if g.omega is not None:
            return g.omega * n / g.n
        return float(n)

    @property
    def omega(self) -> float:
        return self.omega_for(self.grid.n)

    def medium_spec(self) -> dict:
        return {"kind": self.medium.kind, **copy.deepcopy(self.medium.params)}

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)


_CHOICES = {
    ("medium", "kind"): ("smooth_bump", "gaussian_bumps", "plasma_ring", "zero"),
    ("partition", "local_solver"): ("banded", "superlu"),
    ("sparsify", "diagonal_rule"): ("cell", "corrected"),
}


def _coerce(value, annotation: str, where: str):
    opt = "None" in annotation
    if value is None:
        if opt:
            return None
        raise ConfigError(f"{where}: value may not be null")
    if annotation.startswith("bool"):
        if isinstance(value, bool):
            return value
    elif annotation.startswith("int"):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif annotation.startswith("float"):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif annotation.startswith("str"):
        if isinstance(value, str):
            return value
    elif annotation.startswith("dict"):
        if isinstance(value, dict):
            return value
    elif annotation.startswith("list"):
        if isinstance(value, list):
            return value
    raise ConfigError(f"{where}: expected {annotation}, got {type(value).__name__} {value!r}")


def _line(node):
    return f"line {node.start_mark.line + 1}"


def _apply_section(obj, node, data, section):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{_line(node)}: section '{section}' must be a mapping")
    known = {f.name: f for f in fields(obj)}
    for key_node, val_node in node.value:
        key = key_node.value
        if key not in known:
            raise ConfigError(f"{_line(key_node)}: unknown key '{section}.{key}' "
                              f"(allowed: {', '.join(known)})")
        where = f"{_line(val_node)}: {section}.{key}"
        value = _coerce(data[key], str(known[key].type), where)
        choices = _CHOICES.get((section, key))
        if choices and value not in choices:
            raise ConfigError(f"{where}: {value!r} is not one of {choices}")
        setattr(obj, key, value)


def parse_config(text: str) -> ExperimentConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    cfg = ExperimentConfig()
    if node is None:
        return validate(cfg)
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{_line(node)}: configuration must be a mapping")
    sections = {f.name for f in fields(cfg)}
    for key_node, val_node in node.value:
        key = key_node.value
        if key not in sections:
            raise ConfigError(f"{_line(key_node)}: unknown key '{key}' "
                              f"(allowed: {', '.join(sorted(sections))})")
        current = getattr(cfg, key)
        if key in ("seed", "workers"):
            setattr(cfg, key, _coerce(data[key], "int", f"{_line(val_node)}: {key}"))
        else:
            _apply_section(current, val_node, data[key], key)
    return validate(cfg)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    g, p, s = cfg.grid, cfg.partition, cfg.solver
    if g.n < 4:
        raise ConfigError("grid.n must be at least 4")
    if g.omega is not None and g.ppw is not None:
        raise ConfigError("give at most one of grid.omega and grid.ppw")
    if (g.omega is not None and g.omega <= 0) or (g.ppw is not None and g.ppw <= 0):
        raise ConfigError("grid.omega / grid.ppw must be positive")
    if p.L is not None and p.L < 1:
        raise ConfigError("partition.L must be at least 1")
    if p.q < 1:
        raise ConfigError("partition.q must be at least 1")
    if p.shift_strength < 0:
        raise ConfigError("partition.shift_strength must be non-negative")
    for name in ("outer_tol", "inner_tol", "sparse_tol"):
        t = getattr(s, name)
        if not 0 < t < 1:
            raise ConfigError(f"solver.{name} must lie in (0, 1)")
    if cfg.waves.count < 1:
        raise ConfigError("waves.count must be at least 1")
    sizes = cfg.scaling.sizes
    if not sizes or any(not isinstance(n, int) or n < 4 for n in sizes):
        raise ConfigError("scaling.sizes must be a list of integers >= 4")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("scaling.sizes must be strictly increasing")
    if cfg.scaling.repeats < 1 or cfg.scaling.waves < 1:
        raise ConfigError("scaling.repeats and scaling.waves must be at least 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if not isinstance(cfg.medium.params, dict):
        raise ConfigError("medium.params must be a mapping")
    return cfg
