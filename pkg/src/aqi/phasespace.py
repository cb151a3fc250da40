"""Harmonic states as weighted mixtures of coherent states.

In the classical and quasi-thermodynamic limit the state of harmonic q is
``Σ_k w_k |β_k⟩⟨β_k|`` with ``β_k = √q ϱ d_k(ω_q)``, one component per
phase-space node of the driver.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .dipole import DipoleRecord
from .field import DriverConfig, PhaseSpaceSample

__all__ = [
    "HarmonicMixture",
    "build_mixture",
    "calibrate_rho",
    "expectation",
    "refine_mixture",
    "CALIBRATION_Q",
    "CALIBRATION_PHOTONS",
]

CALIBRATION_Q = 12
CALIBRATION_PHOTONS = 5.0
# max |Δβ| between neighbouring dense nodes; the overlap kernel exp(-|Δβ|²) has width ~0.7
DENSE_SPACING = 0.2
DENSE_SPAN = 8.0


@dataclass(frozen=True)
class HarmonicMixture:
    q: float
    weights: np.ndarray
    betas: np.ndarray
    phi: float = 0.0
    rho_coupling: float = 1.0
    sample_ids: tuple | None = None
    # (K, 2) γ-frame coordinates of each component, kept for refinement
    nodes: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.betas, dtype=complex)
        if w.shape != b.shape or w.ndim != 1 or len(w) == 0:
            raise ValueError("weights and betas must be nonempty 1-D arrays of equal length")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "betas", b)

    def __len__(self):
        return len(self.weights)

    @classmethod
    def coherent(cls, beta: complex, q: float = 1.0) -> "HarmonicMixture":
        return cls(q, np.ones(1), np.array([beta], dtype=complex))

    @classmethod
    def from_pairs(cls, weights, betas, q: float = 1.0) -> "HarmonicMixture":
        w = np.asarray(weights, dtype=float)
        return cls(q, w / w.sum(), np.asarray(betas, dtype=complex))

    def same_samples(self, other: "HarmonicMixture") -> bool:
        if len(self) != len(other) or not np.array_equal(self.weights, other.weights):
            return False
        if self.sample_ids is not None and other.sample_ids is not None:
            return self.sample_ids == other.sample_ids
        if self.nodes is not None and other.nodes is not None:
            return np.array_equal(self.nodes, other.nodes)
        return self.sample_ids is None and other.sample_ids is None and len(self) == 1


def _on_grid(q: float) -> bool:
    return q > 0 and abs(2 * q - round(2 * q)) < 1e-9


def build_mixture(
    q: float,
    records: list[DipoleRecord],
    samples: list[PhaseSpaceSample],
    config: DriverConfig,
    rho_coupling: float | None = None,
) -> HarmonicMixture:
    """Mixture for harmonic ``q`` from an ensemble of dipole records aligned with ``samples``."""
    if not _on_grid(q):
        raise ValueError(f"harmonic order {q} is not on the integer/half-integer grid")
    if len(records) != len(samples) or any(r.sample_id != s.sample_id for r, s in zip(records, samples)):
        raise ValueError("records and samples are not aligned")
    rho = rho_coupling if rho_coupling is not None else config.rho_coupling
    if rho is None:
        raise ValueError("rho_coupling is unset; calibrate it with calibrate_rho")
    d = np.array([r.at(q) for r in records])
    w = np.array([s.weight for s in samples])
    nodes = np.array([[s.gamma_x, s.gamma_y] for s in samples])
    return HarmonicMixture(
        q=float(q),
        weights=w / w.sum(),
        betas=np.sqrt(q) * rho * d,
        phi=config.phi,
        rho_coupling=rho,
        sample_ids=tuple(s.sample_id for s in samples),
        nodes=nodes,
    )


def calibrate_rho(
    records: list[DipoleRecord],
    samples: list[PhaseSpaceSample],
    q: float = CALIBRATION_Q,
    photons: float = CALIBRATION_PHOTONS,
) -> float:
    """Coupling ϱ that gives harmonic ``q`` a mean photon number ``photons``."""
    w = np.array([s.weight for s in samples])
    n_unit = q * np.sum(w * np.abs([r.at(q) for r in records]) ** 2) / w.sum()
    if not n_unit > 0:
        raise ValueError(f"harmonic {q} carries no signal; cannot calibrate rho")
    return float(np.sqrt(photons / n_unit))


def expectation(mixture: HarmonicMixture, f: Callable[[complex], complex]):
    """Σ_k w_k f(β_k) for a coherent-state evaluator ``f``."""
    total = 0.0
    for k, (w, b) in enumerate(zip(mixture.weights, mixture.betas)):
        try:
            total = total + w * f(complex(b))
        except Exception as exc:
            raise type(exc)(f"evaluator failed on component {k}: {exc}") from exc
    return total


def _dense_axis(z: np.ndarray, n: int):
    grid = np.linspace(max(z.min(), -DENSE_SPAN), min(z.max(), DENSE_SPAN), n)
    w = np.exp(-0.5 * grid**2)
    return grid, w


def refine_mixture(mixture: HarmonicMixture, max_nodes: int = 3201) -> HarmonicMixture:
    """Resample a Gauss-Hermite mixture on a dense node set.

    β is interpolated (barycentric, through all Gauss-Hermite nodes) as a smooth
    function of the standardized driver fluctuation and re-integrated on a
    uniform grid fine enough that neighbouring components overlap. Polynomial
    moments are unchanged to quadrature accuracy; overlap-type quantities
    (purity, Wigner and quadrature densities) lose the spurious graininess of
    a coarse node set.
    """
    if mixture.nodes is None or len(mixture) == 1:
        return mixture
    nodes = mixture.nodes
    w = mixture.weights
    active = [a for a in range(2) if np.ptp(nodes[:, a]) > 0]
    if not active:
        return mixture
    sd = {a: np.sqrt(np.sum(w * nodes[:, a] ** 2)) for a in active}

    if len(active) == 1:
        a = active[0]
        z = nodes[:, a] / sd[a]
        order = np.argsort(z)
        interp = BarycentricInterpolator(z[order], mixture.betas[order])
        n = 201
        while True:
            grid, gw = _dense_axis(z, n)
            betas = interp(grid)
            core = np.abs(grid) < 4
            if np.max(np.abs(np.diff(betas[core]))) <= DENSE_SPACING or n >= max_nodes:
                break
            n = 2 * n - 1
        dense = np.zeros((n, 2))
        dense[:, a] = grid * sd[a]
        return replace(mixture, weights=gw / gw.sum(), betas=betas, sample_ids=None, nodes=dense)

    # tensor grid (thermal drivers)
    zx = np.unique(nodes[:, 0]) / sd[0]
    zy = np.unique(nodes[:, 1]) / sd[1]
    if len(zx) * len(zy) != len(mixture):
        raise ValueError("2-D refinement needs a full tensor node grid")
    table = np.empty((len(zx), len(zy)), dtype=complex)
    ix = np.searchsorted(zx, nodes[:, 0] / sd[0])
    iy = np.searchsorted(zy, nodes[:, 1] / sd[1])
    ix = np.clip(ix, 0, len(zx) - 1)
    iy = np.clip(iy, 0, len(zy) - 1)
    table[ix, iy] = mixture.betas
    n = 41
    while True:
        gx, wx = _dense_axis(zx, n)
        gy, wy = _dense_axis(zy, n)
        rows = BarycentricInterpolator(zx, table)(gx)  # (n, len(zy))
        betas = BarycentricInterpolator(zy, rows.T)(gy).T  # (n, n)
        step = max(np.max(np.abs(np.diff(betas, axis=0))), np.max(np.abs(np.diff(betas, axis=1))))
        if step <= DENSE_SPACING or n * n >= max_nodes * 4:
            break
        n = 2 * n - 1
    ww = np.outer(wx, wy)
    dense = np.stack(np.meshgrid(gx * sd[0], gy * sd[1], indexing="ij"), axis=-1).reshape(-1, 2)
    return replace(
        mixture, weights=(ww / ww.sum()).ravel(), betas=betas.ravel(), sample_ids=None, nodes=dense
    )
