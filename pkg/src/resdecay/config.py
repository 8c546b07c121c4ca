"""Flat ``key = value`` run configuration for the command-line front end."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, InvalidParameterError
from .oracle import GridConfig
from .poles import SearchBox
from .potential import BarrierShellParams, PotentialSpec, Segment, make_barrier_shell


def _key(field_name: str) -> str:
    section, _, rest = field_name.partition("_")
    return f"{section}.{rest}"


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run.  Field ``section_name`` is read from key ``section.name``."""

    potential_V: float = 30.0
    potential_w: float = 1.0
    potential_b: float = 0.3
    potential_segments: str = ""
    init_kind: str = "quantum_box"
    init_width: float | None = None
    poles_N: int = 200
    poles_box: str = "auto"
    time_min_lifetimes: float = 0.01
    time_max_lifetimes: float = 100.0
    time_points: int = 400
    time_spacing: str = "geometric"
    ersak_T: float = 1000.0
    ersak_T_lifetimes: float | None = None
    out_csv: str = ""
    out_svg: str = ""
    tol_strength: float = 1e-3
    tol_closure: float = 1e-2
    tol_closure_box: float = 5e-2
    tol_sum_rule: float = 1e-6
    tol_sum_rule_s2: float = 1e-3
    tol_split: float = 1e-10
    tol_oracle: float = 5e-3
    verify_oracle: bool = True
    verify_closure_N: int = 30
    oracle_dr: float = 0.005
    oracle_dt: float = 0.001
    oracle_r_max: float = 60.0
    oracle_absorber_start: float = 10.0
    oracle_absorber_strength: float = 30.0
    oracle_max_lifetimes: float = 10.0

    def __post_init__(self):
        if self.poles_N < 1:
            raise ConfigError(f"poles.N must be >= 1, got {self.poles_N}")
        if self.verify_closure_N < 1:
            raise ConfigError("verify.closure_N must be >= 1")
        if not self.time_max_lifetimes > self.time_min_lifetimes:
            raise ConfigError("time.max_lifetimes must exceed time.min_lifetimes")
        if self.time_min_lifetimes < 0:
            raise ConfigError("time.min_lifetimes must be non-negative")
        if self.time_spacing not in ("geometric", "linear"):
            raise ConfigError(f"time.spacing must be 'geometric' or 'linear', got {self.time_spacing!r}")
        if self.time_spacing == "geometric" and self.time_min_lifetimes == 0:
            raise ConfigError("geometric spacing needs time.min_lifetimes > 0")
        if self.time_points < 2:
            raise ConfigError("time.points must be >= 2")
        if not self.ersak_T > 0:
            raise ConfigError(f"ersak.T must be positive, got {self.ersak_T}")
        if self.ersak_T_lifetimes is not None and not self.ersak_T_lifetimes > 0:
            raise ConfigError("ersak.T_lifetimes must be positive")
        if self.init_kind != "quantum_box":
            raise ConfigError(f"unknown init.kind {self.init_kind!r} (supported: quantum_box)")
        if self.out_csv and self.out_csv == self.out_svg:
            raise ConfigError("out.csv and out.svg point to the same file")
        for f in dataclasses.fields(self):
            if f.name.startswith("tol_") and not getattr(self, f.name) > 0:
                raise ConfigError(f"{_key(f.name)} must be positive")
        # surface parameter errors as configuration errors
        self.potential()
        self.search_box()

    # -- construction ----------------------------------------------------

    @classmethod
    def keys(cls) -> list[str]:
        return [_key(f.name) for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], base: "RunConfig | None" = None) -> "RunConfig":
        fields = {_key(f.name): f for f in dataclasses.fields(cls)}
        kwargs = dataclasses.asdict(base) if base is not None else {}
        for key, raw in values.items():
            if key not in fields:
                raise ConfigError(f"unknown configuration key {key!r}")
            f = fields[key]
            kwargs[f.name] = _parse(key, f.type, raw)
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        return cls.from_mapping(parse_lines(text.splitlines()), base)

    @classmethod
    def from_file(cls, path: str | Path, base: "RunConfig | None" = None) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        return cls.from_text(text, base)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{_key(f.name)} = {value}")
        return "\n".join(lines) + "\n"

    # -- derived objects ---------------------------------------------------

    def potential(self) -> PotentialSpec:
        try:
            if self.potential_segments:
                return parse_segments(self.potential_segments)
            return make_barrier_shell(self.barrier_params())
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def barrier_params(self) -> BarrierShellParams:
        try:
            return BarrierShellParams(self.potential_V, self.potential_w, self.potential_b)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def box_width(self) -> float:
        """Quantum-box width: ``init.width`` or the first segment."""
        if self.init_width is not None:
            return self.init_width
        return self.potential().segments[0].r_hi

    def search_box(self) -> SearchBox | None:
        if self.poles_box.strip().lower() == "auto":
            return None
        parts = [p for p in self.poles_box.replace(",", " ").split()]
        if len(parts) != 4:
            raise ConfigError("poles.box needs 'auto' or four numbers: re_lo re_hi im_lo im_hi")
        try:
            return SearchBox(*map(float, parts))
        except (ValueError, InvalidParameterError) as exc:
            raise ConfigError(f"bad poles.box: {exc}") from exc

    def grid(self, reference_energy: float | None = None, total_time: float = 1.0) -> GridConfig:
        return GridConfig(dr=self.oracle_dr, dt=self.oracle_dt, r_max=self.oracle_r_max,
                          absorber_start=self.oracle_absorber_start,
                          absorber_strength=self.oracle_absorber_strength,
                          total_time=total_time, reference_energy=reference_energy)

    def ersak_time(self, tau: float) -> float:
        if self.ersak_T_lifetimes is not None:
            return self.ersak_T_lifetimes * tau
        return self.ersak_T


def parse_lines(lines: Iterable[str]) -> dict[str, str]:
    """``key = value`` pairs; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def parse_segments(text: str) -> PotentialSpec:
    """``"0:1:0, 1:1.3:30"`` -> segments ``r_lo:r_hi:height``."""
    segs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"segment {chunk!r} must read r_lo:r_hi:height")
        try:
            segs.append(Segment(*map(float, parts)))
        except ValueError as exc:
            raise ConfigError(f"segment {chunk!r}: {exc}") from exc
    try:
        return PotentialSpec(tuple(segs))
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _parse(key: str, annotation: str, raw: str):
    raw = raw.strip()
    kind = annotation.replace(" | None", "")
    optional = "None" in annotation
    if optional and raw.lower() in ("", "none"):
        return None
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if not np.isfinite(value):
                raise ValueError("must be finite")
            return value
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
