"""Experiment configuration: nested dataclasses loaded from YAML with strict keys."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

SUITES = ("cv-bound", "wick-heat", "covariance", "beals", "compose", "stochastic", "qed", "dim-scaling")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSpec:
    kind: str = "trig"
    count: int = 10
    max_terms: int = 3
    max_freq: float = 2.0

    def validate(self):
        if self.kind not in ("trig", "constant"):
            raise ConfigError(f"corpus.kind must be trig or constant, got {self.kind!r}")
        if not 0 <= self.count <= 10_000:
            raise ConfigError("corpus.count must be in [0, 10000]")
        if not 1 <= self.max_terms <= 10:
            raise ConfigError("corpus.max_terms must be in [1, 10]")
        if not 0 < self.max_freq <= 10:
            raise ConfigError("corpus.max_freq must be in (0, 10]")


@dataclass(frozen=True)
class FormSpec:
    profile: str = "geometric"
    ratio: float = 0.25
    scale: float = 1.0
    random_ratio: bool = True
    rotate: bool = True

    def validate(self):
        if self.profile != "geometric":
            raise ConfigError("form.profile must be geometric")
        if not 0 < self.ratio <= 1:
            raise ConfigError("form.ratio must be in (0, 1]")
        if not 0 < self.scale <= 100:
            raise ConfigError("form.scale must be in (0, 100]")


@dataclass(frozen=True)
class QedScenario:
    modes: tuple = ((0.6, 0.3, 0.8),)
    weights: tuple = (1.0,)
    n_max: int = 3
    positions: tuple = ((0.0, 0.0, 0.0),)
    beta: tuple = (0.3, -0.2, 0.5)
    cutoff: str = "gaussian"
    infrared: float = 0.0
    times: tuple = (0.4, 0.9)
    n_directions: int = 50
    ceiling: int = 512

    def validate(self):
        if not 1 <= len(self.modes) <= 4:
            raise ConfigError("qed.modes must list 1 to 4 wave vectors")
        if len(self.weights) != len(self.modes):
            raise ConfigError("qed.weights must match qed.modes")
        if any(len(k) != 3 for k in self.modes) or any(len(x) != 3 for x in self.positions):
            raise ConfigError("qed wave vectors and positions are 3-vectors")
        if not 1 <= self.n_max <= 8:
            raise ConfigError("qed.n_max must be in [1, 8]")
        if not 1 <= len(self.positions) <= 4:
            raise ConfigError("qed.positions must list 1 to 4 particles")
        if len(self.beta) != 3:
            raise ConfigError("qed.beta is a 3-vector")
        if self.cutoff not in ("gaussian", "zero"):
            raise ConfigError("qed.cutoff must be gaussian or zero")
        if not 1 <= self.ceiling <= 4096:
            raise ConfigError("qed.ceiling must be in [1, 4096]")


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    d: tuple = (1,)
    N: int = 40
    h: tuple = (0.5,)
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    form: FormSpec = field(default_factory=FormSpec)
    qed: QedScenario = field(default_factory=QedScenario)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    margin: int = 4
    probes: int = 20
    samples: int = 100_000
    d_max: int = 8
    n_work: tuple = ()
    check_degree: int = -1
    n_requant: int = 16
    output_dir: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if not self.d or any(not 1 <= int(x) <= 8 for x in self.d):
            raise ConfigError("d values must be in [1, 8]")
        if not 2 <= self.N <= 120:
            raise ConfigError("N must be in [2, 120]")
        if not self.h or any(not 0 < float(x) <= 1 for x in self.h):
            raise ConfigError("h values must be in (0, 1]")
        if not 0 <= self.margin < self.N:
            raise ConfigError("margin must be in [0, N)")
        if not 1 <= self.probes <= 1000:
            raise ConfigError("probes must be in [1, 1000]")
        if not 100 <= self.samples <= 10_000_000:
            raise ConfigError("samples must be in [100, 1e7]")
        if not 1 <= self.d_max <= 12:
            raise ConfigError("d_max must be in [1, 12]")
        if any(not 2 <= int(n) <= 120 for n in self.n_work):
            raise ConfigError("n_work values must be in [2, 120]")
        if self.check_degree > self.N:
            raise ConfigError("check_degree must not exceed N")
        if not 2 <= self.n_requant <= 60:
            raise ConfigError("n_requant must be in [2, 60]")
        if any(not isinstance(v, (int, float)) for v in self.tolerances.values()):
            raise ConfigError("tolerances must be numbers")
        self.corpus.validate()
        self.form.validate()
        self.qed.validate()
        return self

    def work_N(self, d: int) -> int:
        """Truncation for dimension d: the matching n_work entry if given, else N."""
        ds = [int(x) for x in self.d]
        if self.n_work and d in ds:
            return int(self.n_work[ds.index(d)])
        return self.N

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def digest(self) -> str:
        """Hash of everything that affects results (the output path does not)."""
        payload = self.to_dict()
        payload.pop("output_dir", None)
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _tupled(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(_tupled(x) for x in v)
    return v


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        sub = {"corpus": CorpusSpec, "form": FormSpec, "qed": QedScenario}.get(key) if cls is ExperimentConfig else None
        if sub is not None:
            kwargs[key] = _build(sub, value, key)
        elif key == "tolerances":
            if not isinstance(value, dict):
                raise ConfigError("tolerances must be a mapping")
            kwargs[key] = dict(value)
        elif key in ("d", "h") and not isinstance(value, list):
            kwargs[key] = (value,)
        else:
            kwargs[key] = _tupled(value)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_from_dict(data: dict) -> ExperimentConfig:
    if "suite" not in data:
        raise ConfigError("missing key: suite")
    return _build(ExperimentConfig, data, "").validate()


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    data = data or {}
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    return config_from_dict(data)
