"""TOML configuration for the command-line tools.

Every default can be overridden; unknown sections or keys are rejected so a
typo never silently falls back to a default.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .params import ACCOUNTING_MODES, LinkParams, ModulationParams, SecurityParams
from .session import EveConfig

__all__ = ["ConfigError", "SweepSpec", "SessionSpec", "Config", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    loss_db_start: float = 0.0
    loss_db_stop: float = 40.0
    loss_db_step: float = 2.0
    n_values: tuple[int, ...] = (10**5, 2 * 10**5, 10**6, 10**7)
    accounting: str | None = None

    def __post_init__(self):
        if not self.loss_db_step > 0:
            raise ValueError("loss_db_step must be positive")
        if self.loss_db_stop < self.loss_db_start:
            raise ValueError("loss grid is empty (stop < start)")
        if not self.n_values:
            raise ValueError("n_values is empty")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be strictly increasing")
        if any(n < 1000 for n in self.n_values):
            raise ValueError("n_values must be >= 1000")
        if self.accounting is not None and self.accounting not in ACCOUNTING_MODES:
            raise ValueError(f"accounting must be one of {ACCOUNTING_MODES}")

    def losses(self) -> list[float]:
        count = int(math.floor((self.loss_db_stop - self.loss_db_start) / self.loss_db_step + 1e-9)) + 1
        return [self.loss_db_start + i * self.loss_db_step for i in range(count)]


@dataclass(frozen=True)
class SessionSpec:
    N: int = 10**6
    seed: int = 0
    eve: str = "none"
    p_usd: float | None = None
    ceiling: float = 1.0
    record_rounds: bool = False

    def __post_init__(self):
        if self.eve not in ("none", "usd"):
            raise ValueError("eve must be 'none' or 'usd'")

    def eve_config(self) -> EveConfig | None:
        return None if self.eve == "none" else EveConfig(p_usd=self.p_usd, ceiling=self.ceiling)


@dataclass(frozen=True)
class Config:
    modulation: ModulationParams = field(default_factory=ModulationParams)
    link: LinkParams = field(default_factory=LinkParams)
    security: SecurityParams = field(default_factory=SecurityParams)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    session: SessionSpec = field(default_factory=SessionSpec)


_SECTIONS = {
    "modulation": ModulationParams,
    "link": LinkParams,
    "security": SecurityParams,
    "sweep": SweepSpec,
    "session": SessionSpec,
}
# config-file spellings that differ from the dataclass field
_ALIASES = {("link", "delta_phi_deg"): ("delta_phi", math.radians)}


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text: str, section: str, key: str | None = None) -> str:
    line = _line_of(text, key) if key else None
    loc = f"[{section}]" + (f" {key}" if key else "")
    return f"line {line}: {loc}" if line else loc


def parse_config(text: str) -> Config:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from None

    built = {}
    for section, values in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        cls = _SECTIONS[section]
        allowed = {f.name for f in fields(cls) if f.init}
        kwargs = {}
        for key, value in values.items():
            if (section, key) in _ALIASES:
                name, convert = _ALIASES[(section, key)]
                value = convert(value)
            else:
                name = key
            if name not in allowed or (section, key) == ("link", "delta_phi"):
                raise ConfigError(f"{_where(text, section, key)}: unknown key")
            if name == "n_values":
                if not isinstance(value, list):
                    raise ConfigError(f"{_where(text, section, key)}: expected a list of integers")
                value = tuple(int(v) for v in value)
            kwargs[name] = value
        try:
            built[section] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{_where(text, section)}: {exc}") from None
    return Config(**built)


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)
