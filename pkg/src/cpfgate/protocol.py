"""The photon-photon gate circuit: atom rotations, two reflections, atomic
readout and classical feedback on the first photon.

Steps (indices used in :class:`ProtocolTrace`):

0. atom initialized in ``up`` next to the photonic input
1. +pi/2 rotation of the atom
2. reflection of photon 1 (atom-photon CZ)
3. -pi/2 rotation of the atom
4. reflection of photon 2
5. +pi/2 rotation of the atom
6. atomic measurement, feedback (pi phase on photon 1's R part if ``up``)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .errors import ErrorParams, modified_cz
from .qcore import (ATOM, PHOTON1, PHOTON2, DensityMatrix, Operator, ProjectorSet,
                    StateVector, apply, embed, ket, measure, partial_trace, tensor,
                    trace_distance)

JOINT_DIMS = (2, 2, 2)
PHOTON_DIMS = (2, 2)

# photonic CPF in {RR, RL, LR, LL}
CPF = Operator(np.diag([1, 1, -1, 1]).astype(complex), PHOTON_DIMS, unitary=True)
ATOM_BASIS = ProjectorSet.from_basis([[1, 0], [0, 1]], (2,), ("up", "down"))


def rotation_op(theta: float) -> Operator:
    """Atomic rotation by ``theta`` in the basis {up, down}."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return Operator(np.array([[c, -s], [s, c]], dtype=complex), (2,), unitary=True)


def cz_atom_photon(ideal: bool = True, dphi: float = 0.0, xi: float = 0.0) -> Operator:
    """Atom-photon reflection gate; diag(-1, 1, 1, 1) when ``ideal``."""
    if ideal:
        return Operator(np.diag([-1, 1, 1, 1]).astype(complex), (2, 2), unitary=True)
    return modified_cz(dphi, xi)


def _atom_op(theta: float) -> Operator:
    return embed(rotation_op(theta), [ATOM], JOINT_DIMS)


def _feedback() -> Operator:
    return embed(Operator(errors.PHOTON_Z, (2,), unitary=True), [0], PHOTON_DIMS)


def _as_density(s) -> DensityMatrix:
    return s.projector() if isinstance(s, StateVector) else s


def _photonic_blocks(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized photonic matrices for atom = up and atom = down."""
    m = rho.matrix
    return m[:4, :4], m[4:, 4:]


@dataclass
class ProtocolTrace:
    """Joint-state snapshots after each protocol step."""

    snapshots: list = field(default_factory=list)
    outcome_probs: tuple[float, float] = (0.0, 0.0)
    feedback_applied: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def enc(m):
            return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}

        return json.dumps({
            "steps": [{"step": i, "label": lbl, "rho": enc(r.matrix)}
                      for i, (lbl, r) in enumerate(self.snapshots)],
            "outcome_probs": {"up": self.outcome_probs[0], "down": self.outcome_probs[1]},
            "feedback_applied": self.feedback_applied,
        }, indent=1)


def _unitary_steps(cz1: Operator, cz2: Operator):
    return [
        ("rotate +pi/2", _atom_op(np.pi / 2)),
        ("reflect photon 1", embed(cz1, [ATOM, PHOTON1], JOINT_DIMS)),
        ("rotate -pi/2", _atom_op(-np.pi / 2)),
        ("reflect photon 2", embed(cz2, [ATOM, PHOTON2], JOINT_DIMS)),
        ("rotate +pi/2", _atom_op(np.pi / 2)),
    ]


def trace_protocol(photons) -> ProtocolTrace:
    """Run the ideal circuit on a photonic state and keep every intermediate state."""
    rho = tensor(ket("u").projector(), _as_density(photons))
    tr = ProtocolTrace(snapshots=[("init", rho)])
    cz = cz_atom_photon()
    for label, U in _unitary_steps(cz, cz):
        rho = apply(U, rho)
        tr.snapshots.append((label, rho))
    results = measure(partial_trace(rho, [ATOM]), ATOM_BASIS)
    tr.outcome_probs = (results[0][0], results[1][0])
    tr.feedback_applied = {"up": True, "down": False}
    up, down = _photonic_blocks(rho)
    fb = _feedback().matrix
    final = fb @ up @ fb.conj().T + down
    tr.snapshots.append(("measure + feedback", tensor(ket("u").projector(),
                                                      DensityMatrix(final, PHOTON_DIMS))))
    return tr


def run_ideal(photons: StateVector) -> tuple[StateVector, tuple[float, float]]:
    """Pure-state evolution of the ideal circuit.

    Returns the photonic output (identical for both atomic outcomes once the
    feedback is applied) and the outcome probabilities (p_up, p_down).
    """
    if photons.dim != 4:
        raise ValueError("photonic input must be a two-qubit state")
    psi = tensor(ket("u"), photons)
    cz = cz_atom_photon()
    for _, U in _unitary_steps(cz, cz):
        psi = apply(U, psi)
    up, down = psi.amplitudes[:4], psi.amplitudes[4:]
    p_up, p_down = float(np.vdot(up, up).real), float(np.vdot(down, down).real)
    out_up = _feedback().matrix @ up / np.sqrt(p_up) if p_up > 1e-15 else None
    out_down = down / np.sqrt(p_down) if p_down > 1e-15 else None
    out = out_down if out_down is not None else out_up
    if out_up is not None and out_down is not None:
        # both branches must agree up to a global phase
        overlap = abs(np.vdot(out_up, out_down))
        if abs(overlap - 1.0) > 1e-10:
            raise RuntimeError("feedback failed to make the branches coincide")
    return StateVector(out, PHOTON_DIMS), (p_up, p_down)


def ideal_unitary() -> np.ndarray:
    """4x4 photonic map of the ideal circuit (atom ``down`` branch)."""
    cols = []
    for lbl in ("RR", "RL", "LR", "LL"):
        out, _ = run_ideal(ket(*lbl))
        cols.append(out.amplitudes)
    return np.array(cols).T


def deferred_circuit(photons) -> DensityMatrix:
    """Circuit variant with the readout and feedback replaced by a third
    coherent reflection of photon 1, after which the atom is discarded."""
    rho = tensor(ket("u").projector(), _as_density(photons))
    cz = cz_atom_photon()
    for _, U in _unitary_steps(cz, cz):
        rho = apply(U, rho)
    rho = apply(embed(cz, [ATOM, PHOTON1], JOINT_DIMS), rho)
    return partial_trace(rho, [PHOTON1, PHOTON2])


def measured_circuit(photons) -> DensityMatrix:
    """Ideal circuit with projective readout and feedback, averaged over outcomes."""
    rho = tensor(ket("u").projector(), _as_density(photons))
    cz = cz_atom_photon()
    for _, U in _unitary_steps(cz, cz):
        rho = apply(U, rho)
    up, down = _photonic_blocks(rho)
    fb = _feedback().matrix
    return DensityMatrix.from_unnormalized(fb @ up @ fb.conj().T + down, PHOTON_DIMS)


def deferred_equivalence_check(inputs) -> float:
    """Largest trace distance between the measured and the deferred circuit."""
    return max(trace_distance(measured_circuit(s), deferred_circuit(s)) for s in inputs)


# -- imperfect gate --------------------------------------------------------

@dataclass(frozen=True)
class Quadrature:
    """How to average over the Gaussian conditional-phase error."""

    nodes: int = 16
    method: str = "gauss-hermite"
    samples: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("gauss-hermite", "monte-carlo"):
            raise ValueError(f"unknown averaging method {self.method!r}")
        if self.nodes < 1 or self.samples < 1:
            raise ValueError("quadrature needs at least one node/sample")

    def points(self, sigma: float, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Phase offsets and weights (summing to 1) for a zero-mean Gaussian."""
        if sigma == 0.0:
            return np.zeros(1), np.ones(1)
        if self.method == "gauss-hermite":
            x, w = np.polynomial.hermite_e.hermegauss(self.nodes)
            return sigma * x, w / w.sum()
        rng = np.random.default_rng([self.seed, stream])
        return sigma * rng.standard_normal(self.samples), np.full(self.samples, 1.0 / self.samples)


def _reflect_avg(rho, photon, e: ErrorParams, phis, weights):
    m = sum(w * errors.reflection_channel(rho, photon, phi, e.xi, e.p_mode_reflection,
                                          e.multi_photon_weight).matrix
            for phi, w in zip(phis, weights))
    return DensityMatrix.from_unnormalized(m, rho.dims)


class GateChannel:
    """The imperfect gate as a map on two-photon density matrices.

    Calling the channel returns the outcome-averaged photonic output;
    :meth:`branches` exposes the output conditioned on the detected atomic
    state.
    """

    def __init__(self, errors_: ErrorParams | None = None, quad: Quadrature | None = None):
        self.errors = errors_ if errors_ is not None else ErrorParams.ideal()
        self.quad = quad if quad is not None else Quadrature()
        self._rot = {s: _atom_op(s * np.pi / 2).matrix for s in (1, -1)}

    def _rotate(self, rho, sign):
        U = self._rot[sign]
        return DensityMatrix.from_unnormalized(U @ rho.matrix @ U.conj().T, rho.dims)

    def _pre_measurement(self, photons: DensityMatrix) -> DensityMatrix:
        e = self.errors
        rho = tensor(ket("u").projector(), photons)
        rho = errors.prep_error_channel(rho, e.p_prep)
        rho = self._rotate(rho, 1)
        if e.correlated_dphi:
            phis, ws = self.quad.points(e.sigma_dphi)
            acc = 0
            for phi, w in zip(phis, ws):
                r = errors.reflection_channel(rho, PHOTON1, phi, e.xi, e.p_mode_reflection, e.multi_photon_weight)
                r = self._second_half(r, [phi], [1.0])
                acc = acc + w * r.matrix
            return DensityMatrix.from_unnormalized(acc, rho.dims)
        phis, ws = self.quad.points(e.sigma_dphi, stream=1)
        rho = _reflect_avg(rho, PHOTON1, e, phis, ws)
        phis, ws = self.quad.points(e.sigma_dphi, stream=2)
        return self._second_half(rho, phis, ws)

    def _second_half(self, rho, phis, ws):
        e = self.errors
        rho = errors.dephase_channel(rho, e.dephase)
        rho = self._rotate(rho, -1)
        rho = _reflect_avg(rho, PHOTON2, e, phis, ws)
        rho = errors.dephase_channel(rho, e.dephase)
        return self._rotate(rho, 1)

    def _finish(self, block: np.ndarray) -> DensityMatrix:
        rho = DensityMatrix.from_unnormalized(block, PHOTON_DIMS)
        rho = errors.optics_channel(rho, self.errors.p_optics)
        return errors.dark_count_channel(rho, self.errors.p_dark)

    def branches(self, photons) -> dict[str, tuple[float, DensityMatrix]]:
        """``{"up": (prob, rho), "down": (prob, rho)}`` keyed by the detected outcome.

        ``rho`` already includes the feedback that the detected outcome triggers.
        """
        rho = self._pre_measurement(_as_density(photons))
        seen_up, seen_down = errors.detection_error(_photonic_blocks(rho), self.errors.p_det)
        fb = _feedback().matrix
        seen_up = fb @ seen_up @ fb.conj().T
        out = {}
        for key, block in (("up", seen_up), ("down", seen_down)):
            p = float(np.trace(block).real)
            out[key] = (p, self._finish(block) if p > 1e-14 else None)
        return out

    def __call__(self, photons) -> DensityMatrix:
        b = self.branches(photons)
        m = sum(p * r.matrix for p, r in b.values() if r is not None)
        return DensityMatrix.from_unnormalized(m, PHOTON_DIMS)


def run_with_errors(photons, e: ErrorParams, avg: Quadrature | None = None) -> DensityMatrix:
    return GateChannel(e, avg)(photons)


def ideal_channel(photons) -> DensityMatrix:
    """Exact CPF acting on a photonic state."""
    return apply(CPF, _as_density(photons))
