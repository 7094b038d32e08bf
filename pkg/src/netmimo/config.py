"""System configuration: physical and network parameters.

All powers are converted to linear watts once, here, and used in linear
units everywhere else.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParameterError


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) / 1e3


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def noise_power_dbm(n_o: float, bandwidth: float, noise_figure: float) -> float:
    """Thermal noise over ``bandwidth`` Hz plus receiver noise figure, in dBm."""
    return n_o + 10.0 * math.log10(bandwidth) + noise_figure


@dataclass(frozen=True)
class SystemConfig:
    """Network parameters. Defaults reproduce the reference deployment.

    lambda_ : BS density [1/m^2]
    W       : bandwidth [Hz]
    P_T     : per-BS transmit power [dBm]
    N_o     : noise spectral density [dBm/Hz]
    N_f     : receiver noise figure [dB]
    gap     : SNR gap [dB]
    alpha   : path-loss exponent (> 2)
    d_o     : path-loss reference distance [m]
    M       : antennas per BS
    """

    lambda_: float = 1.0 / (math.pi * 500.0**2)
    W: float = 20e6
    P_T: float = 43.0
    N_o: float = -174.0
    N_f: float = 9.0
    gap: float = 3.0
    alpha: float = 3.76
    d_o: float = 0.3920
    M: int = 5

    def __post_init__(self):
        _check("lambda", self.lambda_ > 0, "lambda > 0 required")
        _check("W", self.W > 0, "W > 0 required")
        _check("alpha", self.alpha > 2, "alpha > 2 required")
        _check("d_o", self.d_o > 0, "d_o > 0 required")
        _check("M", int(self.M) == self.M and self.M >= 1, "M must be a positive integer")
        _check("gap", self.gap >= 0, "gap >= 0 dB required (linear gap >= 1)")
        for key in ("lambda_", "W", "P_T", "N_o", "N_f", "gap", "alpha", "d_o"):
            _check(key.rstrip("_"), math.isfinite(getattr(self, key)), "must be finite")
        object.__setattr__(self, "M", int(self.M))

    @property
    def tx_power_w(self) -> float:
        return dbm_to_watts(self.P_T)

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(noise_power_dbm(self.N_o, self.W, self.N_f))

    @property
    def gap_linear(self) -> float:
        return db_to_linear(self.gap)

    def snr(self, eta: float) -> float:
        """Per-beam SNR P_T / (eta M sigma^2)."""
        if not 0 < eta <= 1:
            raise ParameterError(f"eta must lie in (0, 1], got {eta}")
        return self.tx_power_w / (eta * self.M * self.noise_w)

    def to_dict(self) -> dict:
        return {_external_key(f.name): getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, values: dict) -> "SystemConfig":
        known = {_external_key(f.name): f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise ParameterError(f"unknown configuration key {key!r}")
            kwargs[known[key]] = value
        return cls(**kwargs)

    def digest(self) -> str:
        return stable_digest(self.to_dict())


def _external_key(name: str) -> str:
    return "lambda" if name == "lambda_" else name


def _check(key: str, ok: bool, constraint: str) -> None:
    if not ok:
        raise ParameterError(f"{key}: {constraint}")


def stable_digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def parse_config_text(text: str) -> SystemConfig:
    """Parse flat ``key = value`` text. Blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            number = float(value)
        except ValueError:
            raise ParameterError(f"{key}: {value!r} is not a number") from None
        if key in values:
            raise ParameterError(f"{key}: specified more than once")
        values[key] = number
    if "M" in values:
        m = values["M"]
        if m != int(m):
            raise ParameterError("M: must be a positive integer")
        values["M"] = int(m)
    return SystemConfig.from_dict(values)


def load_config(path) -> SystemConfig:
    """Read a configuration file; unspecified keys keep their defaults."""
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
