"""Two-color driving field: configuration, squeezed-frame sampling and classical realizations.

The strong ω field is a classical coherent amplitude. The weak 2ω field is
described in the rotated "γ frame", where its limiting Husimi distribution is a
Gaussian of variance ``4 * I_squ`` along one axis (squeezed drivers), along both
axes (thermal drivers) or a delta (coherent drivers).
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

__all__ = [
    "ConfigError",
    "SqueezingSpec",
    "TimeGrid",
    "DriverConfig",
    "PhaseSpaceSample",
    "frame_transform",
    "realize_field",
    "field_on_grid",
    "vector_potential",
    "sample_phase_space",
]

DEFAULT_SQUEEZED_NODES = 21
DEFAULT_THERMAL_NODES = 11
# ~0.11 a.u. at the default ω; resolves harmonics far past the cutoff
STEPS_PER_CYCLE = 1024


class ConfigError(ValueError):
    """Invalid driver configuration. ``field_name`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class SqueezingSpec:
    kind: Literal["coherent", "squeezed", "thermal"] = "squeezed"
    I_squ: float = 1e-6
    # "amplitude" squeezing: reduced amplitude noise, so the enlarged
    # Gaussian variance sits on the phase (gamma_y) axis, and vice versa.
    axis: Literal["amplitude", "phase"] = "amplitude"

    def __post_init__(self):
        if self.kind not in ("coherent", "squeezed", "thermal"):
            raise ConfigError("squeezing.kind", f"unknown kind {self.kind!r}")
        if self.axis not in ("amplitude", "phase"):
            raise ConfigError("squeezing.axis", f"unknown axis {self.axis!r}")
        if not np.isfinite(self.I_squ) or self.I_squ < 0:
            raise ConfigError("squeezing.I_squ", "must be a finite number >= 0")
        if self.kind == "coherent" and self.I_squ != 0:
            object.__setattr__(self, "I_squ", 0.0)

    @property
    def variance(self) -> float:
        """Field variance of the enlarged quadrature, 4 * I_squ (a.u.^2)."""
        return 4.0 * self.I_squ

    @property
    def fluctuation_axis(self) -> int:
        """Index (0 = gamma_x, 1 = gamma_y) of the axis carrying the Gaussian spread."""
        return 1 if self.axis == "amplitude" else 0


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def times(self) -> np.ndarray:
        # periodic grid: endpoint excluded so whole periods are orthogonal
        return self.t_start + self.dt * np.arange(self.n_steps)


@dataclass(frozen=True)
class DriverConfig:
    """Physical specification of the ω + 2ω drive (atomic units throughout)."""

    omega: float = 0.057
    E_omega: float = 0.053
    epsilon_ratio: float = 1e-2
    phi: float = 0.0
    squeezing: SqueezingSpec = field(default_factory=SqueezingSpec)
    Ip: float = 0.5
    n_cycles: int = 5
    # flat = periodic steady-state drive; a 5-cycle sin² pulse blurs even/odd lines
    envelope: Literal["flat", "sin2"] = "flat"
    time_grid: TimeGrid | None = None
    rho_coupling: float | None = None
    q_cutoff: int | None = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError("omega", "must be > 0")
        if not self.E_omega > 0:
            raise ConfigError("E_omega", "must be > 0")
        if not 0 <= self.epsilon_ratio < 0.2:
            raise ConfigError("epsilon_ratio", "must satisfy 0 <= epsilon_ratio < 0.2")
        if self.epsilon_ratio > 0.05:
            warnings.warn(f"epsilon_ratio={self.epsilon_ratio} is outside the perturbative regime (> 0.05)")
        if not np.isfinite(self.phi):
            raise ConfigError("phi", "must be finite")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))
        if not self.Ip > 0:
            raise ConfigError("Ip", "must be > 0")
        if int(self.n_cycles) != self.n_cycles or self.n_cycles < 1:
            raise ConfigError("n_cycles", "must be a positive integer")
        if self.envelope not in ("flat", "sin2"):
            raise ConfigError("envelope", f"unknown envelope {self.envelope!r}")
        if self.rho_coupling is not None and not self.rho_coupling > 0:
            raise ConfigError("rho_coupling", "must be > 0")
        if self.q_cutoff is None:
            object.__setattr__(self, "q_cutoff", _odd_cutoff(self.Ip, self.E_omega, self.omega))
        if self.time_grid is None:
            n_steps = STEPS_PER_CYCLE * self.n_cycles
            object.__setattr__(self, "time_grid", TimeGrid(0.0, self.duration, n_steps))
        tg = self.time_grid
        if not tg.t_end > tg.t_start:
            raise ConfigError("time_grid", "t_end must exceed t_start")
        if tg.n_steps < 4 * self.q_cutoff * self.n_cycles:
            raise ConfigError(
                "time_grid.n_steps",
                f"{tg.n_steps} steps cannot resolve harmonic 2*q_cutoff (need >= {4 * self.q_cutoff * self.n_cycles})",
            )

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def duration(self) -> float:
        return self.n_cycles * self.period

    @property
    def E_2omega(self) -> float:
        """Mean 2ω field amplitude |ᾱ| = ε E_ω."""
        return self.epsilon_ratio * self.E_omega

    def replace(self, **changes) -> "DriverConfig":
        return dataclasses.replace(self, **changes)

    def with_steps(self, n_steps: int) -> "DriverConfig":
        tg = self.time_grid
        return self.replace(time_grid=TimeGrid(tg.t_start, tg.t_end, n_steps))

    def physical_dict(self) -> dict:
        """Fields that determine dipole responses (excludes phi and rho_coupling)."""
        d = dataclasses.asdict(self)
        d.pop("rho_coupling")
        d.pop("phi")
        d.pop("q_cutoff")
        return d

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "DriverConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        sq = data.get("squeezing")
        if isinstance(sq, dict):
            try:
                data["squeezing"] = SqueezingSpec(**sq)
            except TypeError as exc:
                raise ConfigError("squeezing", str(exc)) from None
        tg = data.get("time_grid")
        if isinstance(tg, dict):
            try:
                data["time_grid"] = TimeGrid(float(tg["t_start"]), float(tg["t_end"]), int(tg["n_steps"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("time_grid", f"expected t_start, t_end, n_steps ({exc})") from None
        for key in ("omega", "E_omega", "epsilon_ratio", "phi", "Ip"):
            if key in data:
                try:
                    data[key] = float(data[key])
                except (TypeError, ValueError):
                    raise ConfigError(key, "must be a number") from None
        return cls(**data)


def _odd_cutoff(Ip: float, E_omega: float, omega: float) -> int:
    q = (Ip + 3.17 * E_omega**2 / (4 * omega**2)) / omega
    return int(2 * np.floor((q - 1) / 2 + 0.5) + 1)


@dataclass(frozen=True)
class PhaseSpaceSample:
    gamma_x: float
    gamma_y: float
    weight: float
    sample_id: int = 0


def frame_transform(sample: PhaseSpaceSample, config: DriverConfig) -> tuple[float, float]:
    """Map γ-frame fluctuation coordinates to the 2ω quadratures (E_2ω,x, E_2ω,y).

    The squeezing angle follows the two-color phase (θ̄ = 2φ), so the γ frame is
    the lab frame rotated by φ and shifted by the mean amplitude along γ_x.
    """
    c, s = np.cos(config.phi), np.sin(config.phi)
    gx = sample.gamma_x + config.E_2omega
    return gx * c - sample.gamma_y * s, gx * s + sample.gamma_y * c


def _envelope(config: DriverConfig, t):
    tg = config.time_grid
    if config.envelope == "flat":
        return np.ones_like(np.asarray(t, dtype=float))
    return np.sin(np.pi * (np.asarray(t) - tg.t_start) / (tg.t_end - tg.t_start)) ** 2


def realize_field(sample: PhaseSpaceSample, config: DriverConfig, t):
    """Electric field E(t) of one phase-space realization (scalar or array ``t``)."""
    tg = config.time_grid
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < tg.t_start) or np.any(t_arr > tg.t_end):
        raise ValueError(f"t outside time grid [{tg.t_start}, {tg.t_end}]")
    ex, ey = frame_transform(sample, config)
    w = config.omega
    out = _envelope(config, t_arr) * (
        config.E_omega * np.cos(w * t_arr) + ex * np.cos(2 * w * t_arr) + ey * np.sin(2 * w * t_arr)
    )
    return float(out) if out.ndim == 0 else out


def field_on_grid(sample: PhaseSpaceSample, config: DriverConfig) -> tuple[np.ndarray, np.ndarray]:
    t = config.time_grid.times()
    return t, realize_field(sample, config, t)


def vector_potential(E: np.ndarray, dt: float) -> np.ndarray:
    """A(t) = -∫ E dt from the grid start (cumulative trapezoid)."""
    A = np.zeros_like(E)
    A[1:] = -np.cumsum(0.5 * (E[1:] + E[:-1])) * dt
    return A


def sample_phase_space(config: DriverConfig, n_samples: int | None = None) -> list[PhaseSpaceSample]:
    """Quadrature nodes of the limiting Husimi distribution of the 2ω field.

    Squeezed drivers get a 1-D Gauss-Hermite rule on the enlarged axis; thermal
    drivers a tensor rule on both axes (``n_samples`` nodes per axis); coherent
    drivers a single delta node.
    """
    sq = config.squeezing
    if n_samples is None:
        n_samples = DEFAULT_THERMAL_NODES if sq.kind == "thermal" else DEFAULT_SQUEEZED_NODES
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if sq.kind == "coherent" or n_samples == 1:
        return [PhaseSpaceSample(0.0, 0.0, 1.0, 0)]

    # probabilists' Hermite: exact for E[p(z)], z ~ N(0, 1), deg p <= 2n - 1
    z, w = np.polynomial.hermite_e.hermegauss(n_samples)
    w = w / w.sum()
    sd = np.sqrt(sq.variance)
    if sq.kind == "squeezed":
        samples = []
        for k, (zk, wk) in enumerate(zip(z, w)):
            g = [0.0, 0.0]
            g[sq.fluctuation_axis] = sd * zk
            samples.append(PhaseSpaceSample(g[0], g[1], wk, k))
        return samples

    gx, gy = np.meshgrid(sd * z, sd * z, indexing="ij")
    ww = np.outer(w, w)
    ww = ww / ww.sum()
    return [
        PhaseSpaceSample(float(x), float(y), float(v), k)
        for k, (x, y, v) in enumerate(zip(gx.ravel(), gy.ravel(), ww.ravel()))
    ]
