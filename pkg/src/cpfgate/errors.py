"""Imperfection channels of the gate and the per-effect fidelity budget.

Channels act on :class:`~cpfgate.qcore.DensityMatrix` objects. Joint states
are ordered (atom, photon1, photon2); photonic states are (photon1, photon2).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .qcore import ATOM, DensityMatrix, Operator, embed

# Z on a single photon: pi phase on its R component
PHOTON_Z = np.diag([-1.0, 1.0]).astype(complex)
ATOM_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class ErrorParams:
    """Knobs of the imperfection model.

    ``dephase`` multiplies the atomic coherences once per superposition
    interval, so 1 means no decoherence. ``sigma_bandwidth`` is the part of
    ``sigma_dphi`` caused by the finite photon bandwidth; it is bookkeeping
    for the budget and does not add to ``sigma_dphi``.
    """

    sigma_dphi: float = 0.15 * np.pi
    xi: float = 0.06 * np.pi
    p_prep: float = 0.0
    p_det: float = 0.04
    p_dark: float = 0.0
    p_mode: float = 0.0
    dephase: float = 1.0
    multi_photon_weight: float = 0.0
    p_optics: float = 0.0
    sigma_bandwidth: float = 0.0
    correlated_dphi: bool = False

    def __post_init__(self):
        for name in ("p_prep", "p_det", "p_dark", "p_mode", "dephase",
                     "multi_photon_weight", "p_optics"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.sigma_dphi < 0 or self.sigma_bandwidth < 0:
            raise ValueError("phase spreads must be non-negative")
        if self.sigma_bandwidth > self.sigma_dphi + 1e-15:
            raise ValueError("sigma_bandwidth cannot exceed the total sigma_dphi")

    @classmethod
    def ideal(cls) -> "ErrorParams":
        return cls(sigma_dphi=0.0, xi=0.0, p_det=0.0)

    def replace(self, **kw) -> "ErrorParams":
        return dataclasses.replace(self, **kw)

    @property
    def p_mode_reflection(self) -> float:
        # two independent reflections: 1 - (1 - q)^2 = p_mode
        return float(1.0 - np.sqrt(1.0 - self.p_mode))

    @property
    def sigma_cavity(self) -> float:
        """Phase spread not explained by the photon bandwidth."""
        return float(np.sqrt(max(self.sigma_dphi**2 - self.sigma_bandwidth**2, 0.0)))


@dataclass(frozen=True)
class BudgetEntry:
    effect: str
    reduction: float  # percentage points of average gate fidelity


# -- unitaries -------------------------------------------------------------

def birefringence_rotation(xi: float) -> np.ndarray:
    c, s = np.cos(xi), np.sin(xi)
    return np.array([[c, -s], [s, c]], dtype=complex)


def modified_cz(dphi: float = 0.0, xi: float = 0.0, phase_multiple: int = 1) -> Operator:
    """Atom-photon reflection unitary in the basis {upR, upL, downR, downL}.

    The coupled component picks up ``phase_multiple * (pi + dphi)``; the
    uncoupled atom-down block is rotated by the birefringence angle ``xi``.
    ``phase_multiple=2`` describes a mode carrying two photons.
    """
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = np.exp(1j * phase_multiple * (np.pi + dphi))
    U[1, 1] = 1.0
    U[2:, 2:] = birefringence_rotation(xi)
    return Operator(U, (2, 2), unitary=True)


# -- channels --------------------------------------------------------------

def _unitary_mixture(rho: DensityMatrix, terms) -> DensityMatrix:
    """sum_k w_k U_k rho U_k^dag for (weight, matrix) pairs; weights sum to 1."""
    m = sum(w * (U @ rho.matrix @ U.conj().T) for w, U in terms if w != 0.0)
    return DensityMatrix.from_unnormalized(m, rho.dims, rho.physical)


def prep_error_channel(rho: DensityMatrix, p_prep: float) -> DensityMatrix:
    """Admix the state with the atom flipped (up <-> down) with weight ``p_prep``."""
    if p_prep == 0.0:
        return rho
    X = embed(Operator(ATOM_X, (2,)), [ATOM], rho.dims).matrix
    return _unitary_mixture(rho, [(1 - p_prep, np.eye(rho.dim)), (p_prep, X)])


def dephase_channel(rho: DensityMatrix, factor: float) -> DensityMatrix:
    """Scale every atomic coherence (up/down off-diagonal block) by ``factor``."""
    if not 0.0 <= factor <= 1.0:
        raise ValueError("dephasing factor outside [0, 1]")
    h = rho.dim // 2
    m = np.array(rho.matrix)
    m[:h, h:] *= factor
    m[h:, :h] *= factor
    return DensityMatrix(m, rho.dims, rho.physical)


def dark_count_channel(rho: DensityMatrix, p_dark: float) -> DensityMatrix:
    """(1 - p) rho + p * I/d."""
    if not 0.0 <= p_dark <= 1.0:
        raise ValueError("p_dark outside [0, 1]")
    m = (1 - p_dark) * rho.matrix + p_dark * np.eye(rho.dim) / rho.dim
    return DensityMatrix(m, rho.dims, rho.physical)


def optics_channel(rho: DensityMatrix, p_optics: float) -> DensityMatrix:
    """Independent depolarization of each photon with probability ``p_optics``.

    Stands in for polarization-setting errors and drifts in the delay fibre.
    """
    if p_optics == 0.0:
        return rho
    t = rho.matrix.reshape(2, 2, 2, 2)
    # replace photon k by I/2 with probability p_optics
    red1 = np.einsum("ajbj->ab", t)  # photon1 alone
    red2 = np.einsum("iaib->ab", t)  # photon2 alone
    full1 = np.kron(np.eye(2) / 2, red2)
    full2 = np.kron(red1, np.eye(2) / 2)
    p = p_optics
    m = (1 - p) ** 2 * rho.matrix + p * (1 - p) * (full1 + full2) + p**2 * np.eye(4) / 4
    return DensityMatrix(m, rho.dims, rho.physical)


def reflection_channel(rho: DensityMatrix, photon: int, dphi: float = 0.0, xi: float = 0.0,
                       p_mode: float = 0.0, weight: float = 0.0) -> DensityMatrix:
    """Reflect ``photon`` (1 or 2) off the atom-cavity system for one value of dphi.

    Branches: mode-mismatched light (no interaction, zero phase) with weight
    ``p_mode``; of the rest, a fraction ``weight`` carries an extra photon and
    acquires twice the conditional phase.
    """
    dims = rho.dims
    single = embed(modified_cz(dphi, xi), [ATOM, photon], dims).matrix
    terms = [((1 - p_mode) * (1 - weight), single)]
    if weight:
        double = embed(modified_cz(dphi, xi, phase_multiple=2), [ATOM, photon], dims).matrix
        terms.append(((1 - p_mode) * weight, double))
    if p_mode:
        terms.append((p_mode, np.eye(rho.dim)))
    return _unitary_mixture(rho, terms)


def mode_mismatch_branch(rho: DensityMatrix, p_mode: float, photon: int = 1) -> DensityMatrix:
    """Ideal reflection of ``photon``, except a fraction ``p_mode`` that bypasses the cavity."""
    return reflection_channel(rho, photon, p_mode=p_mode)


def two_photon_branch(rho: DensityMatrix, weight: float, photon: int = 1) -> DensityMatrix:
    """Ideal reflection of ``photon`` whose mode holds an extra photon with probability ``weight``."""
    return reflection_channel(rho, photon, weight=weight)


def detection_error(branches, p_det: float):
    """Exchange the photonic sub-blocks of the two atomic outcomes with probability ``p_det``.

    ``branches`` is ``(block_up, block_down)`` of unnormalized photonic
    matrices (the projections onto each atomic outcome). Returns the blocks
    as seen by the detector, in the same order.
    """
    if not 0.0 <= p_det <= 1.0:
        raise ValueError("p_det outside [0, 1]")
    up, down = (np.asarray(b) for b in branches)
    return (1 - p_det) * up + p_det * down, (1 - p_det) * down + p_det * up


# -- budget ----------------------------------------------------------------

EFFECTS = ("two-photon", "dark counts", "bandwidth", "cavity", "atom", "other optics")


def isolate(base: ErrorParams, effect: str) -> ErrorParams:
    """Parameters with only ``effect`` switched on, taken from ``base``."""
    zero = ErrorParams.ideal().replace(correlated_dphi=base.correlated_dphi)
    if effect == "two-photon":
        return zero.replace(multi_photon_weight=base.multi_photon_weight)
    if effect == "dark counts":
        return zero.replace(p_dark=base.p_dark)
    if effect == "bandwidth":
        return zero.replace(sigma_dphi=base.sigma_bandwidth, sigma_bandwidth=base.sigma_bandwidth)
    if effect == "cavity":
        return zero.replace(sigma_dphi=base.sigma_cavity, xi=base.xi, p_mode=base.p_mode)
    if effect == "atom":
        return zero.replace(p_prep=base.p_prep, p_det=base.p_det, dephase=base.dephase)
    if effect == "other optics":
        return zero.replace(p_optics=base.p_optics)
    raise ValueError(f"unknown effect {effect!r}")


def average_fidelity(e: ErrorParams, nodes: int = 16) -> float:
    from .protocol import GateChannel, Quadrature
    from .tomography import average_gate_fidelity

    return average_gate_fidelity(GateChannel(e, Quadrature(nodes)), exact=True)[0]


def fidelity_budget(base: ErrorParams, nodes: int = 16) -> list[BudgetEntry]:
    """Stand-alone reduction of the average gate fidelity for every effect.

    Entries are sorted by decreasing reduction; effects whose reduction is
    zero are dropped, so an error-free model gives an empty list.
    """
    entries = []
    for effect in EFFECTS:
        red = 100.0 * (1.0 - average_fidelity(isolate(base, effect), nodes))
        if red > 1e-9:
            entries.append(BudgetEntry(effect, max(red, 0.0)))
    entries.sort(key=lambda b: -b.reduction)
    return entries


# -- calibration -----------------------------------------------------------

# stand-alone budget figures (percentage points) that fix the free parameters
TARGET_DARK = 2.0
TARGET_ATOM = 6.0
TARGET_OPTICS = 2.0
P_MODE_DEFAULT = 0.01  # light bypassing the cavity, as a fraction of the output


def _solve(make, target: float, lo: float, hi: float, nodes: int) -> float:
    """Root of reduction(make(x)) = target on [lo, hi]."""
    from scipy.optimize import brentq

    def f(x):
        return 100.0 * (1.0 - average_fidelity(make(x), nodes)) - target

    return float(brentq(f, lo, hi, xtol=1e-10))


def calibrate(sigma_bandwidth: float, multi_photon_weight: float, *,
              sigma_dphi: float = 0.15 * np.pi, xi: float = 0.06 * np.pi,
              p_det: float = 0.04, p_mode: float = P_MODE_DEFAULT,
              correlated_dphi: bool = False, nodes: int = 16) -> ErrorParams:
    """Fill in the parameters the budget constrains only through their effect.

    ``p_dark`` and ``p_optics`` are solved for their stand-alone reductions.
    The atom item keeps ``p_det`` fixed and splits what is left of its
    reduction equally between preparation error and dephasing.
    """
    zero = ErrorParams.ideal().replace(correlated_dphi=correlated_dphi)
    p_dark = _solve(lambda x: zero.replace(p_dark=x), TARGET_DARK, 0.0, 1.0, nodes)
    p_optics = _solve(lambda x: zero.replace(p_optics=x), TARGET_OPTICS, 0.0, 0.5, nodes)
    det_only = 100.0 * (1.0 - average_fidelity(zero.replace(p_det=p_det), nodes))
    share = (TARGET_ATOM - det_only) / 2
    if share <= 0:
        p_prep, dephase = 0.0, 1.0
    else:
        p_prep = _solve(lambda x: zero.replace(p_prep=x), share, 0.0, 0.5, nodes)
        dephase = _solve(lambda x: zero.replace(dephase=x), share, 1.0, 0.0, nodes)
    return ErrorParams(sigma_dphi=sigma_dphi, xi=xi, p_prep=p_prep, p_det=p_det,
                       p_dark=p_dark, p_mode=p_mode, dephase=dephase,
                       multi_photon_weight=multi_photon_weight, p_optics=p_optics,
                       sigma_bandwidth=sigma_bandwidth, correlated_dphi=correlated_dphi)
