"""Experiment configuration: defaults, a flat key-value file format, and validation."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

EXPERIMENTS = (
    "counterexample",
    "easy-direction",
    "support-size",
    "degree-lb",
    "conversions",
    "partial-adaptive",
    "certify",
)

# Per-experiment defaults; anything left as None in a config is filled from here.
DEFAULTS: dict[str, dict] = {
    "counterexample": dict(domain_size=2, eta=0.5, n=2, m_values=(2, 4, 8), k_max=1, resolution=200),
    "easy-direction": dict(domain_size=2, eta=0.5, epsilon=0.5, n=2, m=400, trials=100_000),
    "support-size": dict(
        k=400, large_k=40_000, eta=0.5, epsilon=0.2, prop_k=100, trials=100_000, calibration_trials=20_000
    ),
    "degree-lb": dict(d=12, n=6, m=30, b=1.5, delta=0.5, trials=20_000, calibration_trials=5_000),
    "conversions": dict(domain_size=3, eta=1 / 3, epsilon=0.1, n=2, m=6),
    "partial-adaptive": dict(domain_size=3, eta=0.25, n=2, m=8, trials=100_000),
    "certify": dict(
        domain_size=2, eta=0.5, epsilon=0.1, n=2, m_values=(4, 6, 8), functions=20, test="no-null", cost="subtractive"
    ),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    domain_size: int | None = None
    eta: float | None = None
    epsilon: float | None = None
    b: float | None = None
    delta: float | None = None
    n: int | None = None
    m: int | None = None
    m_values: tuple | None = None
    k_max: int | None = None
    k: int | None = None
    large_k: int | None = None
    prop_k: int | None = None
    d: int | None = None
    trials: int | None = None
    calibration_trials: int | None = None
    functions: int | None = None
    resolution: int | None = None
    test: str | None = None
    cost: str | None = None
    cost_file: str | None = None
    base: tuple | None = None
    seed: int = 0
    cap: int = 10**7
    feasible_cap: int = 10**6
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def resolved(self) -> "ExperimentConfig":
        """A copy with unset fields filled from the experiment's defaults, then validated."""
        if self.experiment not in DEFAULTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        cfg = dataclasses.replace(self)
        for key, val in DEFAULTS[self.experiment].items():
            if getattr(cfg, key) is None:
                setattr(cfg, key, val)
        if cfg.m is not None and self.m_values is None and "m_values" in DEFAULTS[cfg.experiment]:
            cfg.m_values = (cfg.m,)
        validate(cfg)
        return cfg

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name in ("out", "extra"):
                continue
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_INT_FIELDS = {
    "domain_size", "n", "m", "k_max", "k", "large_k", "prop_k", "d", "trials",
    "calibration_trials", "functions", "resolution", "seed", "cap", "feasible_cap",
}
_FLOAT_FIELDS = {"eta", "epsilon", "b", "delta"}
_TUPLE_INT = {"m_values"}
_TUPLE_FLOAT = {"base"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_FIELDS:
            v = float(raw)
            if v != int(v):
                raise ConfigError(f"{key} must be an integer, got {raw!r}")
            return int(v)
        if key in _FLOAT_FIELDS:
            return float(raw)
        if key in _TUPLE_INT:
            return tuple(int(x) for x in raw.replace(",", " ").split())
        if key in _TUPLE_FLOAT:
            return tuple(float(x) for x in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    names = {f.name for f in fields(ExperimentConfig)} - {"extra"}
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split(sep, 1))
        key = key.replace("-", "_")
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text())
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "experiment" not in values:
        raise ConfigError("config needs an experiment name")
    return ExperimentConfig(**values)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key, val in cfg.as_dict().items():
        if isinstance(val, list):
            val = ",".join(str(x) for x in val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate(cfg: ExperimentConfig) -> None:
    """Reject parameter combinations outside the hypotheses each experiment relies on."""
    e = cfg.experiment
    if cfg.trials is not None:
        _require(cfg.trials >= 20, "trials must be at least 20 (standard errors need several batches)")
    if cfg.eta is not None:
        _require(0 < cfg.eta <= 1, "eta must lie in (0, 1]")
    if cfg.epsilon is not None:
        _require(0 < cfg.epsilon <= 1, "epsilon must lie in (0, 1]")
    if cfg.n is not None:
        _require(cfg.n >= 1, "n must be positive")
    if cfg.cap <= 0 or cfg.feasible_cap <= 0:
        raise ConfigError("caps must be positive")

    if e == "counterexample":
        _require(cfg.domain_size == 2, "the counterexample lives on {0, 1}")
        _require(cfg.eta == 0.5, "the counterexample uses eta = 1/2")
        _require(cfg.n == 2, "the counterexample uses n = 2")
        _require(all(m >= cfg.n for m in cfg.m_values), "need m >= n")
        _require(cfg.k_max >= 0, "k_max must be nonnegative")
        _require(all(2 ** m * m <= cfg.cap for m in cfg.m_values), "2^m exceeds the enumeration cap")
    elif e == "easy-direction":
        need = 25 * cfg.n**2 / cfg.epsilon**2
        _require(cfg.m >= need, f"the simulation guarantee needs m >= 25 n^2 / eps^2 = {need:g}")
        _require(cfg.domain_size >= 2, "domain_size must be at least 2")
    elif e == "support-size":
        _require(cfg.large_k > cfg.k >= 4, "need 4 <= k < large_k")
        _require(0 < cfg.eta < 1, "the subtractive budget must lie in (0, 1)")
        _require(cfg.epsilon < 1, "epsilon must be below 1")
        _require(math.floor(cfg.epsilon * cfg.prop_k / 2) >= 1, "floor(eps k / 2) must be at least 1")
    elif e == "degree-lb":
        _require(cfg.d >= 2, "need at least 2 bits")
        _require(cfg.m > cfg.n >= 2, "need m > n >= 2")
        _require(cfg.b > 0 and cfg.delta > 0, "b and delta must be positive")
        _require(cfg.b >= 1 + cfg.delta, "costs are at least 1 + delta off the diagonal, so b-bounded "
                 "degree 2^d needs b >= 1 + delta")
    elif e == "conversions":
        _require(cfg.domain_size <= 3, "exact conversions are limited to |X| <= 3")
        _require(cfg.m <= 8, "exact conversions are limited to m <= 8")
        _require(0 < cfg.eta < 1, "eta must lie in (0, 1)")
        _require(cfg.epsilon < 1, "epsilon must be below 1")
        _require(cfg.m - math.floor(cfg.eta * cfg.m) >= cfg.n, "too few points survive the deletions")
    elif e == "partial-adaptive":
        _require(cfg.domain_size <= 3, "exact additive maxima are limited to |X| <= 3")
        _require(cfg.m <= 8 and cfg.m >= cfg.n, "need n <= m <= 8")
        _require(cfg.eta < 1, "eta must be below 1")
    elif e == "certify":
        _require(all(m >= cfg.n for m in cfg.m_values), "need m >= n for every m")
        _require(cfg.functions >= 0, "functions must be nonnegative")
        _require(cfg.cost in ("subtractive", "strong", "identity", "file"), "cost must be subtractive, strong, identity or file")
        if cfg.cost == "file":
            _require(cfg.cost_file is not None, "cost = file needs cost_file")
