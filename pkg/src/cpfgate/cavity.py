"""Reflection of a photon off the one-sided atom-cavity system.

Rates are angular frequencies divided by 2*pi, in MHz, so a detuning given
in MHz enters the input-output relation directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


@dataclass(frozen=True)
class CavityParams:
    g: float = 7.0
    kappa: float = 2.5
    kappa_r: float = 2.5
    gamma: float = 3.0
    delta_pol: float = 420.0  # kHz; only enters the gate through the birefringence angle

    def __post_init__(self):
        for name in ("g", "kappa", "kappa_r", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.kappa_r > self.kappa:
            raise ValueError("kappa_r cannot exceed kappa")
        if self.delta_pol < 0:
            raise ValueError("delta_pol must be non-negative")

    @property
    def cooperativity(self) -> float:
        return self.g**2 / (2 * self.kappa * self.gamma)


@dataclass(frozen=True)
class ReflectionResult:
    r: complex

    @property
    def phase(self) -> float:
        """arg r in (-pi, pi]."""
        ph = float(np.angle(self.r))
        return np.pi if ph == -np.pi else ph

    @property
    def reflectivity(self) -> float:
        return float(abs(self.r) ** 2)


@dataclass(frozen=True)
class EfficiencyChain:
    t_fiber: float = 0.404
    r_cavity: float = 0.67
    t_optics: float = 0.81

    def __post_init__(self):
        for name in ("t_fiber", "r_cavity", "t_optics"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


def _r(p: CavityParams, delta, coupled: bool):
    d = np.asarray(delta, dtype=float)
    g2 = p.g**2 if coupled else 0.0
    return 1 - 2 * p.kappa_r * (p.gamma + 1j * d) / ((p.kappa + 1j * d) * (p.gamma + 1j * d) + g2)


def reflection_coefficient(p: CavityParams, delta: float = 0.0, coupled: bool = True) -> ReflectionResult:
    """Single-mode input-output reflection amplitude.

    ``coupled`` selects the atom in the up state with an R photon; otherwise
    the photon sees an empty cavity.
    """
    return ReflectionResult(complex(_r(p, delta, coupled)))


def conditional_phase(p: CavityParams, delta):
    """Phase of the coupled relative to the empty reflection, in [0, 2*pi).

    The interval is centred on pi so the result is continuous across resonance.
    Vectorized over ``delta``.
    """
    ph = np.mod(np.angle(_r(p, delta, True) / _r(p, delta, False)), 2 * np.pi)
    return float(ph) if np.ndim(ph) == 0 else ph


def solve_kappa_r(p: CavityParams, reflectivity: float = 0.67) -> CavityParams:
    """Outcoupling rate that gives the empty cavity the requested resonant reflectivity.

    Picks the over-coupled root (kappa_r > kappa/2), where the empty cavity
    reflects with a pi phase.
    """
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity outside [0, 1]")
    # empty cavity on resonance: r = 1 - 2 kappa_r / kappa
    kappa_r = p.kappa * (1 + np.sqrt(reflectivity)) / 2
    return CavityParams(p.g, p.kappa, float(kappa_r), p.gamma, p.delta_pol)


def phase_accuracy_bandwidth(p: CavityParams, tol: float, span: float = 50.0,
                             resolution: float = 1e-3) -> float:
    """Full width (MHz) of the detuning band where the phase stays within ``tol`` of pi.

    Returns 0.0 for an empty band and ``2*span`` when the band covers the whole
    searched interval [-span, span].
    """
    if not 0.0 < tol < np.pi:
        raise ValueError("tol must lie in (0, pi)")

    def excess(d):
        return abs(conditional_phase(p, d) - np.pi) - tol

    edges = []
    for sign in (1.0, -1.0):
        if excess(sign * span) <= 0:
            edges.append(span)
            continue
        edges.append(brentq(lambda x: excess(sign * x), 0.0, span, xtol=resolution / 4))
    if excess(0.0) > 0:
        return 0.0
    return float(np.round(sum(edges) / resolution) * resolution)


def pulse_phase_statistics(p: CavityParams, spectrum_fwhm: float, nodes: int = 64) -> tuple[float, float]:
    """Mean and std of the conditional phase over a Gaussian photon spectrum (FWHM in MHz)."""
    if spectrum_fwhm <= 0:
        raise ValueError("spectrum_fwhm must be positive")
    if nodes < 32:
        raise ValueError("use at least 32 quadrature nodes")
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    ph = conditional_phase(p, spectrum_fwhm * FWHM_TO_SIGMA * x)
    mean = float(np.dot(w, ph))
    return mean, float(np.sqrt(np.dot(w, (ph - mean) ** 2)))


def efficiency_budget(c: EfficiencyChain) -> tuple[float, float]:
    """(per-photon transmission, two-photon gate efficiency)."""
    per_photon = c.t_fiber * c.r_cavity * c.t_optics
    return per_photon, per_photon**2
