"""Strict JSON experiment configs and the bundled presets.

Every section is a frozen dataclass; unknown keys and wrong types are
rejected with the dotted path of the offending field.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

KINDS = ("verify_lie", "toda", "xxz")


@dataclass(frozen=True)
class LieSection:
    algebra: str = "sl3"
    automorphism: str = "theta"
    algebra_file: str | None = None  # JSON algebra definition; overrides `algebra`
    samples: int = 100  # random (x, y) pairs for the mCYBE scan


@dataclass(frozen=True)
class TodaSection:
    n: int = 2
    p: list | None = None
    q: list | None = None
    random_seed: int | None = None  # falls back to the top-level seed
    m: int = 1
    t_final: float = 1.0
    dt: float = 1e-3
    kappa: float | None = None  # None: calibrate
    output_times: list | None = None


@dataclass(frozen=True)
class XXZSection:
    N: int = 3
    t: float | None = 1.5
    t_n: list | None = None
    xi_plus: float = 2.0
    xi_minus: float = 2.0
    sites: list | None = None  # [[k, e, f], ...]
    random_seed: int | None = None
    hamiltonian: str = "local"  # local | transfer | omega_<n>
    hamiltonian_z: float = 1.3  # spectral point for hamiltonian = transfer
    sample_z: list = field(default_factory=lambda: [1.3, 1.7])
    t_final: float = 1.0
    dt: float = 5e-3


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    output_dir: str = "out"
    tolerances: dict = field(default_factory=dict)
    checks: list | None = None  # names for `verify`; None: every check of this kind
    lie: LieSection = field(default_factory=LieSection)
    toda: TodaSection = field(default_factory=TodaSection)
    xxz: XXZSection = field(default_factory=XXZSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest_fields(self) -> dict:
        """Everything that affects results; the output location does not."""
        d = self.to_dict()
        d.pop("output_dir")
        return d


SECTIONS = {"lie": LieSection, "toda": TodaSection, "xxz": XXZSection}


def _check_type(path, value, annotation):
    ann = str(annotation)
    if value is None:
        if "None" in ann:
            return value
        raise ConfigError(f"{path}: null is not allowed")
    if ann.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
    elif ann.startswith("float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        value = float(value)
    elif ann.startswith("str"):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
    elif ann.startswith("list"):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
    elif ann.startswith("dict"):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object, got {value!r}")
    return value


def _build(cls, doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - set(fields))
    if unknown:
        raise ConfigError(f"{path or 'config'}: unknown key(s) {unknown}")
    kwargs = {}
    for name, value in doc.items():
        sub = f"{path}.{name}" if path else name
        if name in SECTIONS and cls is ExperimentConfig:
            kwargs[name] = _build(SECTIONS[name], value, sub)
        else:
            kwargs[name] = _check_type(sub, value, fields[name].type)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from None


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("config: missing required key 'kind'")
    cfg = _build(ExperimentConfig, doc, "")
    if cfg.kind not in KINDS:
        raise ConfigError(f"kind: expected one of {list(KINDS)}, got {cfg.kind!r}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed: must be an unsigned 64-bit integer")
    for k, v in cfg.tolerances.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ConfigError(f"tolerances.{k}: expected a nonnegative number")
    return cfg


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def with_overrides(cfg: ExperimentConfig, seed=None, output_dir=None, tolerances=None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        changes["seed"] = seed
    if output_dir is not None:
        changes["output_dir"] = str(output_dir)
    if tolerances:
        changes["tolerances"] = {**cfg.tolerances, **tolerances}
    return dataclasses.replace(cfg, **changes)


# presets ---------------------------------------------------------------------------

EXAMPLE_PRESETS = {
    "sl2": {"kind": "verify_lie", "lie": {"algebra": "sl2", "automorphism": "theta"}},
    "sl3": {"kind": "verify_lie", "lie": {"algebra": "sl3", "automorphism": "theta"}},
    "sl3_cyclic": {"kind": "verify_lie", "lie": {"algebra": "sl3", "automorphism": "cyclic"}},
    "sl2+sl2_swap": {"kind": "verify_lie", "lie": {"algebra": "sl2+sl2", "automorphism": "swap"}},
    "toda_coxeter": {"kind": "toda", "toda": {"n": 2, "m": 1, "t_final": 1.0, "dt": 1e-3}},
    "gl2_loop_xxz": {"kind": "xxz", "xxz": {"N": 3, "t": 1.5, "hamiltonian": "local",
                                            "t_final": 0.5, "dt": 5e-3}},
}


def preset_names() -> list:
    from .checks import CHECKS

    return sorted(EXAMPLE_PRESETS) + sorted(CHECKS)


def preset(name: str) -> ExperimentConfig:
    """Example configs, plus one config per registered check name."""
    from .checks import CHECKS

    if name in EXAMPLE_PRESETS:
        return config_from_dict(EXAMPLE_PRESETS[name])
    if name in CHECKS:
        return config_from_dict({"kind": CHECKS[name].kind, "checks": [name]})
    raise ConfigError(f"unknown preset {name!r}; see `reflectlax presets`")
