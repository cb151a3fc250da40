"""Wigner functions and truncated Fock-basis density matrices of coherent-state mixtures."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .phasespace import HarmonicMixture

__all__ = [
    "TruncationError",
    "PhaseSpaceGrid",
    "FockDensity",
    "default_axes",
    "wigner_grid",
    "coherent_amplitudes",
    "fock_density",
    "annihilation",
    "wigner_density",
    "wigner_maximum_angle",
]

DEFAULT_N_CUTOFF = 200


class TruncationError(ValueError):
    def __init__(self, deficit: float, n_cutoff: int):
        super().__init__(f"Fock truncation at n_cutoff={n_cutoff} loses {deficit:.3e} of the trace")
        self.deficit = deficit
        self.n_cutoff = n_cutoff


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # shape (len(x_axis), len(p_axis))

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p_axis, axis=1), self.x_axis))

    def moments(self, radius: float | None = None, center=None):
        """(mean_x, mean_p, covariance 2x2) by trapezoidal quadrature.

        With ``radius`` the integrals are restricted to a disk around ``center``
        (default: the grid maximum), which keeps the far-field ringing of a
        band-limited reconstruction out of the second moments.
        """
        X, P = np.meshgrid(self.x_axis, self.p_axis, indexing="ij")
        values = self.values
        if radius is not None:
            if center is None:
                i, j = np.unravel_index(np.argmax(values), values.shape)
                center = (self.x_axis[i], self.p_axis[j])
            values = np.where((X - center[0]) ** 2 + (P - center[1]) ** 2 <= radius**2, values, 0.0)

        def integ(f):
            return np.trapezoid(np.trapezoid(f * values, self.p_axis, axis=1), self.x_axis)

        norm = integ(1.0)
        mx, mp = integ(X) / norm, integ(P) / norm
        cxx = integ((X - mx) ** 2) / norm
        cpp = integ((P - mp) ** 2) / norm
        cxp = integ((X - mx) * (P - mp)) / norm
        return mx, mp, np.array([[cxx, cxp], [cxp, cpp]])


@dataclass(frozen=True)
class FockDensity:
    n_cutoff: int
    matrix: np.ndarray
    trace_deficit: float

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def _check_axis(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 2 or np.any(np.diff(a) <= 0):
        raise ValueError("axes must be strictly increasing 1-D arrays")
    return a


def default_axes(mixture: HarmonicMixture, n: int = 201):
    half = float(np.max(np.sqrt(2) * np.abs(mixture.betas))) + 5.0
    axis = np.linspace(-half, half, n)
    return axis, axis.copy()


def wigner_grid(mixture: HarmonicMixture, x_axis=None, p_axis=None) -> PhaseSpaceGrid:
    """W(x, p) = Σ_k w_k exp(-(x - x_k)² - (p - p_k)²) / π; each coherent state is a vacuum Gaussian."""
    if x_axis is None or p_axis is None:
        x_axis, p_axis = default_axes(mixture)
    x_axis, p_axis = _check_axis(x_axis), _check_axis(p_axis)
    xk = np.sqrt(2) * mixture.betas.real
    pk = np.sqrt(2) * mixture.betas.imag
    gx = np.exp(-((x_axis[None, :] - xk[:, None]) ** 2))
    gp = np.exp(-((p_axis[None, :] - pk[:, None]) ** 2))
    values = (gx * mixture.weights[:, None]).T @ gp / np.pi
    return PhaseSpaceGrid(x_axis, p_axis, values)


def coherent_amplitudes(beta: complex, n_cutoff: int) -> np.ndarray:
    """⟨n|β⟩ = e^{-|β|²/2} βⁿ / √(n!) for n < n_cutoff, via logarithms."""
    n = np.arange(n_cutoff)
    if beta == 0:
        out = np.zeros(n_cutoff, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(beta) ** 2 + n * np.log(abs(beta)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(beta))


def fock_density(mixture: HarmonicMixture, n_cutoff: int = DEFAULT_N_CUTOFF, tol: float = 1e-3) -> FockDensity:
    if n_cutoff < 16:
        raise ValueError("n_cutoff must be >= 16")
    bmax = float(np.max(np.abs(mixture.betas)))
    if bmax**2 + 6 * bmax > n_cutoff:
        warnings.warn(f"n_cutoff={n_cutoff} may truncate components with |beta| up to {bmax:.2f}")
    amps = np.array([coherent_amplitudes(complex(b), n_cutoff) for b in mixture.betas])
    rho = (amps.T * mixture.weights) @ amps.conj()
    rho = 0.5 * (rho + rho.conj().T)
    deficit = float(1.0 - np.real(np.trace(rho)))
    if deficit > tol:
        raise TruncationError(deficit, n_cutoff)
    return FockDensity(n_cutoff, rho, deficit)


def annihilation(n_cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_cutoff)), k=1).astype(complex)


def wigner_density(mixture: HarmonicMixture, x: float, p: float) -> float:
    xk = np.sqrt(2) * mixture.betas.real
    pk = np.sqrt(2) * mixture.betas.imag
    return float(mixture.weights @ np.exp(-((x - xk) ** 2) - (p - pk) ** 2) / np.pi)


def wigner_maximum_angle(grid: PhaseSpaceGrid, mixture: HarmonicMixture | None = None) -> float:
    """Polar angle atan2(p*, x*) of the Wigner maximum, in [0, 2π).

    From the grid alone, ties go to the smallest angle. Given the ``mixture``
    that produced the grid, the peak is polished on the continuous function,
    which matters when the maximum sits close to the origin where grid cells
    span a wide range of angles.
    """
    v = grid.values
    if not np.any(v):
        raise ValueError("Wigner grid is identically zero")
    peak = v.max()
    ix, ip = np.nonzero(v >= peak - 1e-12 * abs(peak))
    angles = np.mod(np.arctan2(grid.p_axis[ip], grid.x_axis[ix]), 2 * np.pi)
    if mixture is None:
        return float(angles.min())
    k = int(np.argmin(angles))
    start = [grid.x_axis[ix[k]], grid.p_axis[ip[k]]]
    res = minimize(
        lambda z: -wigner_density(mixture, z[0], z[1]),
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14},
    )
    return float(np.mod(np.arctan2(res.x[1], res.x[0]), 2 * np.pi))
