"""Photon-number statistics of the weak coherent input pulses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, poisson

N_MAX = 10  # tail mass beyond this is < 1e-12 at nbar = 0.17

LOSS_BEFORE_GATE = "loss-before-gate"
LOSS_AFTER_GATE = "loss-after-gate"
CONVENTIONS = (LOSS_BEFORE_GATE, LOSS_AFTER_GATE)


@dataclass(frozen=True)
class PulseStats:
    nbar: float = 0.17
    eta_chain: float = 0.22

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError("nbar must be non-negative")
        if not 0.0 <= self.eta_chain <= 1.0:
            raise ValueError("eta_chain must lie in [0, 1]")


def poisson_pn(nbar: float, n: int) -> float:
    """e^-nbar nbar^n / n!"""
    if n < 0:
        raise ValueError("photon number must be non-negative")
    return float(poisson.pmf(n, nbar))


def thinned_distribution(nbar: float, eta: float, n_max: int = N_MAX) -> np.ndarray:
    """Joint table P(n at the cavity, k detected), shape (n_max+1, n_max+1)."""
    n = np.arange(n_max + 1)
    pn = poisson.pmf(n, nbar)
    return pn[:, None] * binom.pmf(n[None, :], n[:, None], eta)


def multi_photon_weight(s: PulseStats, convention: str = LOSS_BEFORE_GATE) -> float:
    """Probability that a detected qubit mode carried two or more photons at the cavity.

    ``nbar`` is the mean photon number impinging on the cavity. With
    ``loss-before-gate`` every loss is upstream of the cavity and already
    folded into ``nbar``, so a detected mode is simply a populated one:
    P(n >= 2 | n >= 1). With ``loss-after-gate`` the Poisson(nbar) pulse
    interacts first and the chain ``eta_chain`` thins it afterwards, which
    favours multi-photon pulses among the detected ones.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown loss convention {convention!r}; expected one of {CONVENTIONS}")
    if s.nbar == 0:
        return 0.0
    if convention == LOSS_BEFORE_GATE:
        m = s.nbar
        p1plus = -np.expm1(-m)
        p2plus = p1plus - m * np.exp(-m)
        return float(p2plus / p1plus)
    if s.eta_chain == 0:
        raise ValueError("eta_chain = 0: nothing is ever detected")
    joint = thinned_distribution(s.nbar, s.eta_chain)
    detected = joint[:, 1:].sum()
    return float(joint[2:, 1:].sum() / detected)


def coincidence_probability(s: PulseStats) -> float:
    """Per-trial probability of at least one detection in each of the two output modes."""
    return float(-np.expm1(-s.eta_chain * s.nbar)) ** 2
