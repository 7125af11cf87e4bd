"""Run configuration: model, grid, quadrature, seeds, output directory.

Flat key=value (INI style) config files with CLI-flag overrides; flags
win. Keys mirror the CLI flag names with underscores:

    a, b, c, r, grid_halfwidth, grid_nodes, kmax_mult, k_nodes,
    seed, out_dir, tol_ac1 .. tol_ac9

``grid_halfwidth`` empty or absent means the model-derived default.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = ["ConfigError", "RunConfig"]


class ConfigError(ValueError):
    """Malformed configuration input."""


@dataclass(frozen=True)
class RunConfig:
    a: float = 1.0
    b: float = 0.0
    c: float = -1.0
    r: float = 0.0
    grid_halfwidth: float | None = None
    grid_nodes: int = 4001
    kmax_mult: float = 40.0
    k_nodes: int = 400
    seed: int = 12345
    out_dir: str = "out"
    tolerance_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.grid_nodes < 101 or self.grid_nodes % 2 == 0:
            raise ConfigError(
                f"grid_nodes must be odd and >= 101 (center node at x=0), got {self.grid_nodes}"
            )
        if self.k_nodes < 8:
            raise ConfigError(f"k_nodes must be >= 8, got {self.k_nodes}")
        if self.kmax_mult <= 0 or not math.isfinite(self.kmax_mult):
            raise ConfigError(f"kmax_mult must be positive, got {self.kmax_mult}")
        if self.grid_halfwidth is not None and self.grid_halfwidth <= 0:
            raise ConfigError("grid_halfwidth must be positive when given")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        parser = configparser.ConfigParser()
        text = Path(path).read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        values: dict[str, str] = dict(parser["DEFAULT"])
        for section in parser.sections():
            values.update(parser[section])
        return cls._from_mapping(values, source=str(path))

    @classmethod
    def _from_mapping(cls, values: dict[str, str], source: str = "<flags>") -> "RunConfig":
        kwargs: dict = {}
        tols: dict[str, float] = {}
        for key, raw in values.items():
            key = key.strip().lower()
            if raw is None or str(raw).strip() == "":
                continue
            try:
                if key in ("a", "b", "c", "r", "grid_halfwidth", "kmax_mult"):
                    kwargs[key] = float(raw)
                elif key in ("grid_nodes", "k_nodes", "seed"):
                    kwargs[key] = int(raw)
                elif key == "out_dir":
                    kwargs[key] = str(raw)
                elif key.startswith("tol_"):
                    tols[key.removeprefix("tol_").upper().replace("AC", "AC-")] = float(raw)
                else:
                    raise ConfigError(f"unknown config key '{key}' in {source}")
            except ValueError as exc:
                raise ConfigError(f"bad value for '{key}' in {source}: {raw!r}") from exc
        if tols:
            kwargs["tolerance_overrides"] = tols
        return cls(**kwargs)

    def override(self, **updates) -> "RunConfig":
        """New config with non-None updates applied (flags over file)."""
        clean = {k: v for k, v in updates.items() if v is not None}
        return replace(self, **clean)
