"""Quantum-optical analysis of two-color high-harmonic generation driven by squeezed light."""
from .field import ConfigError, DriverConfig, PhaseSpaceSample, SqueezingSpec, TimeGrid, sample_phase_space
from .dipole import DipoleRecord, NumericalError, ensemble_dipoles, harmonic_spectrum, sfa_dipole
from .phasespace import HarmonicMixture, build_mixture, calibrate_rho, refine_mixture
from .pipeline import Pipeline, sweep_phi

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DriverConfig",
    "PhaseSpaceSample",
    "SqueezingSpec",
    "TimeGrid",
    "sample_phase_space",
    "DipoleRecord",
    "NumericalError",
    "ensemble_dipoles",
    "harmonic_spectrum",
    "sfa_dipole",
    "HarmonicMixture",
    "build_mixture",
    "calibrate_rho",
    "refine_mixture",
    "Pipeline",
    "sweep_phi",
]
