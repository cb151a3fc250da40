"""Time-frequency maps of the emitted dipole and the complex action correction σ.

``σ = σ_x + iσ_y`` is the 2ω-induced shift of the semiclassical action; with a
classical driver it fixes the odd/even intensity split, and with a squeezed
driver it can only be probed through quadrature means.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .dipole import DipoleRecord
from .field import DriverConfig, PhaseSpaceSample, TimeGrid
from .phasespace import HarmonicMixture

__all__ = [
    "InversionDomainError",
    "GaborMap",
    "SigmaEstimate",
    "ProbeResult",
    "gabor_window",
    "gabor_transform",
    "ensemble_gabor",
    "map_distance",
    "sigma_inversion",
    "intensity_model",
    "homodyne_sigma_probe",
]

GABOR_DELTA = 6.0
AU_TIME_AS = 24.188843265857


class InversionDomainError(ValueError):
    """Intensities outside the range the classical two-color model can produce."""


@dataclass(frozen=True)
class GaborMap:
    tau_axis: np.ndarray
    omega_axis: np.ndarray
    magnitude: np.ndarray  # (len(omega_axis), len(tau_axis))
    delta: float


@dataclass(frozen=True)
class SigmaEstimate:
    sigma_x: float
    sigma_y: float
    source: Literal["intensity_inversion", "homodyne_probe"] = "intensity_inversion"

    @property
    def sigma(self) -> complex:
        return complex(self.sigma_x, self.sigma_y)


@dataclass(frozen=True)
class ProbeResult:
    q: float
    theta: np.ndarray
    values: np.ndarray
    # values = amplitude * cos(theta - phase)
    amplitude: float
    phase: float


def gabor_window(t: np.ndarray, tau: float, delta: float) -> np.ndarray:
    """w(t - τ) = exp(-(t - τ)²/δ²) / (δ√π), renormalized so the grid sum times dt is 1."""
    w = np.exp(-(((t - tau) / delta) ** 2)) / (delta * np.sqrt(np.pi))
    dt = t[1] - t[0]
    s = w.sum() * dt
    return w / s if s > 0 else w


def gabor_transform(
    d_t,
    time_grid: TimeGrid,
    delta: float = GABOR_DELTA,
    tau_axis=None,
    omega_axis=None,
) -> GaborMap:
    """|G(ω, τ)| with G = Σ_t dt d(t) w(t - τ) e^{-iωt}, by direct quadrature on the stored grid."""
    d_t = np.asarray(d_t, dtype=float)
    t = time_grid.times()
    if d_t.shape != t.shape:
        raise ValueError("d_t does not match the time grid")
    dt = time_grid.dt
    if not delta > 0:
        raise ValueError("delta must be positive")
    if delta < 2 * dt:
        raise ValueError(f"window width {delta} is below two time steps ({2 * dt:.4g})")
    if tau_axis is None:
        tau_axis = np.linspace(t[0] + 2 * delta, t[-1] - 2 * delta, 200)
    tau_axis = np.asarray(tau_axis, dtype=float)
    if np.any(tau_axis < t[0]) or np.any(tau_axis > t[-1]):
        raise ValueError("tau values must lie within the time grid")
    if omega_axis is None:
        omega_axis = np.linspace(0, 2 * np.pi / (4 * delta) * 10, 300)
    omega_axis = np.asarray(omega_axis, dtype=float)

    windows = np.stack([gabor_window(t, tau, delta) for tau in tau_axis], axis=1)  # (n_t, n_tau)
    G = np.exp(-1j * np.outer(omega_axis, t)) @ (windows * d_t[:, None]) * dt
    return GaborMap(tau_axis, omega_axis, np.abs(G), float(delta))


def ensemble_gabor(
    config: DriverConfig,
    samples: list[PhaseSpaceSample],
    records: list[DipoleRecord],
    delta: float = GABOR_DELTA,
    tau_axis=None,
    omega_axis=None,
) -> GaborMap:
    """Gabor map of the weight-averaged dipole Σ_k w_k d_k(t)."""
    if len(records) != len(samples) or any(r.sample_id != s.sample_id for r, s in zip(records, samples)):
        raise ValueError("records and samples are not aligned")
    w = np.array([s.weight for s in samples])
    mean = (w / w.sum()) @ np.stack([r.d_t for r in records])
    if omega_axis is None:
        omega_axis = config.omega * np.linspace(0, 2 * config.q_cutoff + 10, 400)
    return gabor_transform(mean, config.time_grid, delta, tau_axis, omega_axis)


def map_distance(a: GaborMap, b: GaborMap) -> float:
    """‖|G_a| - |G_b|‖₂ / ‖|G_a|‖₂."""
    if a.magnitude.shape != b.magnitude.shape:
        raise ValueError("maps have different shapes")
    ref = np.linalg.norm(a.magnitude)
    if ref == 0:
        raise ValueError("reference map is identically zero")
    return float(np.linalg.norm(a.magnitude - b.magnitude) / ref)


def sigma_inversion(I_odd: float, I_even: float, I_0: float, tol: float = 1e-12) -> SigmaEstimate:
    """Principal-branch σ from consecutive odd/even intensities of a classical two-color drive."""
    if not I_0 > 0:
        raise InversionDomainError("I_0 must be positive")
    c = (I_odd - I_even) / I_0
    h = (I_odd + I_even) / I_0
    if abs(c) > 1 + tol:
        raise InversionDomainError(f"|I_odd - I_even| / I_0 = {abs(c):.6g} exceeds 1")
    if h < 1 - tol:
        raise InversionDomainError(f"(I_odd + I_even) / I_0 = {h:.6g} is below 1")
    return SigmaEstimate(
        0.5 * float(np.arccos(np.clip(c, -1.0, 1.0))),
        0.5 * float(np.arccosh(max(h, 1.0))),
        "intensity_inversion",
    )


def intensity_model(sigma: complex, I_0: float, parity: Literal["odd", "even"]) -> float:
    """I_0 |cos σ|² for odd orders, I_0 |sin σ|² for even ones."""
    if not I_0 > 0:
        raise ValueError("I_0 must be positive")
    sx, sy = complex(sigma).real, complex(sigma).imag
    if parity == "odd":
        f = np.cos(sx) ** 2 * np.cosh(sy) ** 2 + np.sin(sx) ** 2 * np.sinh(sy) ** 2
    elif parity == "even":
        f = np.sin(sx) ** 2 * np.cosh(sy) ** 2 + np.cos(sx) ** 2 * np.sinh(sy) ** 2
    else:
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    return float(I_0 * f)


def homodyne_sigma_probe(
    even_mixture: HarmonicMixture,
    records: list[DipoleRecord],
    samples: list[PhaseSpaceSample],
    theta_list,
) -> ProbeResult:
    """Mean-field quadrature signal Σ_k w_k [Re d_k cos θ + Im d_k sin θ] of an even harmonic.

    The dipole phase arg(x) is not recoverable here, so the result is reported
    as the sinusoid (amplitude, phase) rather than separate σ_x and σ_y.
    """
    q = even_mixture.q
    if abs(q - round(q)) > 1e-9 or round(q) % 2:
        raise ValueError(f"q={q} is not an even harmonic")
    if len(records) != len(samples) or any(r.sample_id != s.sample_id for r, s in zip(records, samples)):
        raise ValueError("records and samples are not aligned")
    if even_mixture.sample_ids is not None and even_mixture.sample_ids != tuple(s.sample_id for s in samples):
        raise ValueError("mixture was built from a different sample set")
    w = np.array([s.weight for s in samples])
    mean_d = (w / w.sum()) @ np.array([r.at(q) for r in records])
    theta = np.atleast_1d(np.asarray(theta_list, dtype=float))
    values = mean_d.real * np.cos(theta) + mean_d.imag * np.sin(theta)
    return ProbeResult(q, theta, values, float(abs(mean_d)), float(np.angle(mean_d)))
