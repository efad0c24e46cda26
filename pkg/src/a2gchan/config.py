"""INI-style run configuration with source tracking.

Every value is resolved with precedence command-line flag > config file >
built-in default, and the winning source is recorded for the run report.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .geodesy import GeodeticPosition, MountOrientation
from .linkbudget import LinkBudgetConfig
from .patterns import AntennaPattern, builtin_pattern, load_pattern
from .segmentation import HoverParams
from .simulator import ErrorModel

__all__ = ["Settings", "load_settings"]

_MISSING = object()


@dataclass
class Settings:
    parser: configparser.ConfigParser
    base_dir: Path
    flags: dict = field(default_factory=dict)
    used: dict = field(default_factory=dict)

    def has(self, section: str, key: str) -> bool:
        return (section, key) in self.flags or self.parser.has_option(section, key)

    def get(self, section: str, key: str, default=_MISSING, kind=float):
        name = f"{section}.{key}"
        if self.flags.get((section, key)) is not None:
            value, source = self.flags[(section, key)], "flag"
        elif self.parser.has_option(section, key):
            raw = self.parser.get(section, key)
            try:
                value = _convert(raw, kind)
            except ValueError:
                raise ConfigError(f"{name}: cannot interpret {raw!r} as {kind.__name__}") from None
            source = "file"
        elif default is not _MISSING:
            value, source = default, "default"
        else:
            raise ConfigError(f"missing required setting {name}")
        self.used[name] = {"value": value, "source": source}
        return value

    def path(self, section: str, key: str, default=_MISSING) -> Path | None:
        raw = self.get(section, key, default, kind=str)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p

    def input_path(self, section: str, key: str, default=_MISSING) -> Path | None:
        p = self.path(section, key, default)
        if p is not None and not p.is_file():
            raise ConfigError(f"{section}.{key}: file not found: {p}")
        return p

    def floats(self, section: str, key: str, default) -> tuple[float, ...]:
        raw = self.get(section, key, default, kind=str)
        if isinstance(raw, tuple):
            return raw
        try:
            return tuple(float(v) for v in str(raw).split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"{section}.{key}: expected comma-separated numbers") from None

    # --- domain objects ---------------------------------------------------

    def tx_position(self) -> GeodeticPosition:
        try:
            return GeodeticPosition(self.get("transmitter", "lat_deg"), self.get("transmitter", "lon_deg"),
                                    self.get("transmitter", "alt_m"))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"transmitter position: {exc}") from None

    def link_budget(self) -> LinkBudgetConfig:
        # the horn's boresight azimuth has no sensible default and must be configured
        try:
            tx_mount = MountOrientation(
                self.get("transmitter", "boresight_azimuth_deg"),
                self.get("transmitter", "uptilt_deg", 15.0),
                self.get("transmitter", "roll_deg", 0.0),
            )
            rx_mount = MountOrientation(
                self.get("receiver", "boresight_azimuth_deg", 0.0),
                self.get("receiver", "uptilt_deg", 0.0),
                self.get("receiver", "roll_deg", 0.0),
            )
            return LinkBudgetConfig(
                tx_power_dbm=self.get("linkbudget", "tx_power_dbm", 22.0),
                tx_cable_loss_db=self.get("linkbudget", "tx_cable_loss_db", 10.0),
                rx_cable_loss_db=self.get("linkbudget", "rx_cable_loss_db", 2.5),
                amplifier_gain_db=self.get("linkbudget", "amplifier_gain_db", 55.0),
                frequency_hz=self.get("linkbudget", "frequency_hz", 28e9),
                tx_mount=tx_mount,
                rx_mount=rx_mount,
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def pattern(self, key: str, default=_MISSING) -> AntennaPattern:
        raw = self.get("patterns", key, default, kind=str)
        if raw.startswith("builtin:"):
            try:
                return builtin_pattern(raw.split(":", 1)[1])
            except KeyError as exc:
                raise ConfigError(f"patterns.{key}: {exc.args[0]}") from None
        return load_pattern(self.input_path("patterns", key))

    def hover_params(self) -> HoverParams:
        return HoverParams(
            speed_threshold_mps=self.get("segmentation", "speed_threshold_mps", 0.5),
            min_dwell_s=self.get("segmentation", "min_dwell_s", 10.0),
            min_samples=self.get("segmentation", "min_samples", 30, kind=int),
            median_window_s=self.get("segmentation", "median_window_s", 1.0),
        )

    def error_model(self) -> ErrorModel:
        names = ErrorModel.__dataclass_fields__
        try:
            return ErrorModel(**{n: self.get("errors", n, 0.0) for n in names})
        except ValueError as exc:
            raise ConfigError(f"errors: {exc}") from None


def _convert(raw: str, kind):
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if kind is int:
        return int(raw.strip())
    if kind is str:
        return raw.strip()
    return float(raw)


def load_settings(path, flags: dict | None = None) -> Settings:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(p, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return Settings(parser, p.parent, dict(flags or {}))
