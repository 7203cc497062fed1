"""Three-pulse Ramsey spectroscopy of the atomic qubit rotations.

Frequencies are in kHz and times in microseconds, so ``2*pi*1e-3*f*t`` is a
phase in radians.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

TWO_PI_KHZ_US = 2 * np.pi * 1e-3
PULSE_SIGNS = (1, -1, 1)  # +pi/2, -pi/2, +pi/2


class FitError(RuntimeError):
    """Raised when the spectrum fit does not converge."""

    def __init__(self, message, best_params=None, cost=None):
        super().__init__(message)
        self.best_params = best_params
        self.cost = cost


@dataclass(frozen=True)
class RamseyParams:
    """Rectangular three-pulse sequence.

    During pulses the atom sees the detuning ``delta - delta_offset +
    light_shift + pulse_detuning_step``; during the gaps only ``delta -
    delta_offset``. Setting ``pulse_detuning_step = -light_shift`` is the
    compensation used in the gate.
    """

    rabi: float = 250.0
    delta_offset: float = 0.0
    light_shift: float = 40.0
    pulse_len: float = 1.0
    gaps: tuple[float, float] = (1.3, 1.3)
    pulse_detuning_step: float = 0.0

    def __post_init__(self):
        if not self.rabi > 0:
            raise ValueError("rabi must be positive")
        if not self.pulse_len > 0:
            raise ValueError("pulse_len must be positive")
        gaps = tuple(float(g) for g in np.broadcast_to(self.gaps, (2,)))
        if min(gaps) < 0:
            raise ValueError("gaps must be non-negative")
        object.__setattr__(self, "gaps", gaps)


@dataclass
class Spectrum:
    detunings: np.ndarray
    p_up: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, float)
        self.p_up = np.asarray(self.p_up, float)
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, float)
        if np.any(self.p_up < 0) or np.any(self.p_up > 1):
            raise ValueError("populations must lie in [0, 1]")


@dataclass
class FitResult:
    params: RamseyParams
    stderr: dict = field(default_factory=dict)
    chi2: float = 0.0
    nfev: int = 0


def _propagators(rabi, detuning, t):
    """exp(-i t H) for H = pi*1e-3*(rabi*sigma_y + detuning*sigma_z), vectorized in detuning.

    Returns the four entries (u00, u01, u10, u11) in the basis {up, down}.
    """
    hy = 0.5 * TWO_PI_KHZ_US * rabi * np.ones_like(detuning)
    hz = 0.5 * TWO_PI_KHZ_US * detuning
    h = np.hypot(hy, hz)
    c = np.cos(h * t)
    # sin(h t)/h with the h -> 0 limit
    s = np.where(h > 0, np.sin(h * t) / np.where(h > 0, h, 1.0), t)
    # -i (hy sigma_y + hz sigma_z): sigma_y = [[0, -i], [i, 0]]
    return (c - 1j * s * hz, -s * hy, s * hy, c + 1j * s * hz)


def _apply(u, psi):
    a, b = psi
    return u[0] * a + u[1] * b, u[2] * a + u[3] * b


def p_up_model(p: RamseyParams, deltas) -> np.ndarray:
    d = np.asarray(deltas, float) - p.delta_offset
    d_pulse = d + p.light_shift + p.pulse_detuning_step
    psi = (np.ones_like(d, dtype=complex), np.zeros_like(d, dtype=complex))
    for k, sign in enumerate(PULSE_SIGNS):
        psi = _apply(_propagators(sign * p.rabi, d_pulse, p.pulse_len), psi)
        if k < 2:
            psi = _apply(_propagators(0.0, d, p.gaps[k]), psi)
    return np.clip(np.abs(psi[0]) ** 2, 0.0, 1.0)


def simulate_three_pulse(p: RamseyParams, deltas) -> Spectrum:
    return Spectrum(np.asarray(deltas, float), p_up_model(p, deltas))


def noisy_spectrum(p: RamseyParams, deltas, shots: int, seed: int) -> Spectrum:
    """Binomial shot noise on top of the model; sigma from the true populations."""
    rng = np.random.default_rng(seed)
    p_true = p_up_model(p, deltas)
    k = rng.binomial(shots, p_true)
    sigma = np.sqrt(np.clip(p_true * (1 - p_true), 1.0 / shots, None) / shots)
    return Spectrum(np.asarray(deltas, float), k / shots, sigma)


FIT_NAMES = ("rabi", "delta_offset", "light_shift")


def fit_spectrum(data: Spectrum, guess: RamseyParams, max_nfev: int = 2000) -> FitResult:
    """Weighted least squares for (rabi, delta_offset, light_shift).

    Pulse length, gaps and the detuning step are held at their values in
    ``guess``. Standard errors come from the Jacobian at the optimum; with no
    ``sigma`` in the data they are scaled by the reduced chi-square.
    """
    if data.detunings.size < 20:
        raise ValueError("need at least 20 data points")
    sigma = data.sigma if data.sigma is not None else np.ones_like(data.p_up)

    def model(x):
        return p_up_model(replace(guess, rabi=x[0], delta_offset=x[1], light_shift=x[2]),
                          data.detunings)

    def resid(x):
        return (model(x) - data.p_up) / sigma

    x0 = np.array([guess.rabi, guess.delta_offset, guess.light_shift], float)
    scale = np.maximum(np.abs(x0), 10.0)

    def jac(x):
        # central differences: offset and light shift are strongly correlated,
        # so forward differences stall the final digits
        h = 1e-6 * scale
        cols = [(resid(x + h[i] * e) - resid(x - h[i] * e)) / (2 * h[i])
                for i, e in enumerate(np.eye(3))]
        return np.column_stack(cols)

    res = least_squares(resid, x0, jac=jac, x_scale=scale, method="lm", max_nfev=max_nfev,
                        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if res.status <= 0:
        raise FitError(f"fit did not converge: {res.message}", res.x, res.cost)
    J = res.jac
    dof = max(data.detunings.size - 3, 1)
    chi2 = float(2 * res.cost)
    try:
        cov = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular Jacobian at the optimum", res.x, res.cost) from exc
    if data.sigma is None:
        cov *= chi2 / dof
    err = np.sqrt(np.diag(cov))
    params = replace(guess, rabi=float(res.x[0]), delta_offset=float(res.x[1]),
                     light_shift=float(res.x[2]))
    return FitResult(params, dict(zip(FIT_NAMES, map(float, err))), chi2, int(res.nfev))


def fit_with_restarts(data: Spectrum, guess: RamseyParams, rabi_factors=(0.7, 0.85, 1.0, 1.15, 1.3),
                      shift_offsets=(-20.0, 0.0, 20.0), max_nfev: int = 2000) -> FitResult:
    """Best fit over a grid of starting points (lowest chi-square wins)."""
    best = None
    for f in rabi_factors:
        for d in shift_offsets:
            try:
                r = fit_spectrum(data, replace(guess, rabi=guess.rabi * f,
                                               light_shift=guess.light_shift + d), max_nfev)
            except FitError:
                continue
            if best is None or r.chi2 < best.chi2:
                best = r
    if best is None:
        raise FitError("no starting point converged")
    return best


# -- CSV I/O ---------------------------------------------------------------

def spectrum_to_csv(s: Spectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("delta_khz", "p_up", "sigma"))
    sig = s.sigma if s.sigma is not None else [""] * len(s.p_up)
    for d, p, e in zip(s.detunings, s.p_up, sig):
        w.writerow((repr(float(d)), repr(float(p)), "" if e == "" else repr(float(e))))
    return buf.getvalue()


def spectrum_from_csv(text: str) -> Spectrum:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows or set(rows[0]) != {"delta_khz", "p_up", "sigma"}:
        raise ValueError("expected columns delta_khz, p_up, sigma")
    d = np.array([float(r["delta_khz"]) for r in rows])
    p = np.array([float(r["p_up"]) for r in rows])
    sig = [r["sigma"] for r in rows]
    sigma = None if any(x == "" for x in sig) else np.array([float(x) for x in sig])
    return Spectrum(d, p, sigma)
