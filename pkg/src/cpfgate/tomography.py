"""Two-photon polarization tomography: synthetic counts, unbiased linear
inversion with linear error propagation, and the gate figures of merit
(truth table, Bell fidelity, average gate fidelity, entangling capability).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .qcore import (DensityMatrix, StateVector, fidelity_pure, ket, min_eigenvalue,
                    partial_transpose)

POL_LABELS = ("H", "V", "D", "A", "R", "L")
# measurement bases: outcome 0 first
BASES = {"HV": ("H", "V"), "DA": ("D", "A"), "RL": ("R", "L")}
TOMO_SETTINGS = tuple(product(("HV", "DA", "RL"), repeat=2))
REFERENCE_PAIRS = 1378

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
# two-qubit Pauli products sigma_i (x) sigma_j, index 4*i + j
PAULI2 = np.array([np.kron(a, b) for a in PAULI for b in PAULI])

PSI_PLUS = StateVector(
    (ket("D", "L").amplitudes + ket("A", "R").amplitudes) / np.sqrt(2), (2, 2))

# export basis of reconstructed two-photon states
EXPORT_LABELS = ("DR", "DL", "AR", "AL")
EXPORT_BASIS = np.array([ket(*lbl).amplitudes for lbl in EXPORT_LABELS]).T


def pol_state(label: str) -> StateVector:
    if label not in POL_LABELS:
        raise ValueError(f"unknown polarization {label!r}")
    return ket(label)


@dataclass(frozen=True)
class CountRecord:
    setting: tuple[str, str]
    counts: tuple[int, int, int, int]  # outcomes 00, 01, 10, 11

    def __post_init__(self):
        if self.setting[0] not in BASES or self.setting[1] not in BASES:
            raise ValueError(f"unknown basis setting {self.setting}")
        if len(self.counts) != 4 or min(self.counts) < 0:
            raise ValueError("counts must be four non-negative integers")

    @property
    def shots(self) -> int:
        return int(sum(self.counts))


@dataclass(frozen=True)
class ReconstructedState:
    rho_hat: DensityMatrix
    covariance: np.ndarray  # 16x16 over the Stokes parameters S_ij

    def entry_errors(self, basis: np.ndarray = EXPORT_BASIS) -> tuple[np.ndarray, np.ndarray]:
        """Standard errors of Re and Im of every matrix entry in ``basis``."""
        # rho' = W^dag rho W = 1/4 sum_k S_k W^dag P_k W, linear in S
        coeff = np.einsum("ia,kij,jb->kab", basis.conj(), PAULI2, basis) / 4
        c_re = coeff.real.reshape(16, -1)
        c_im = coeff.imag.reshape(16, -1)
        var_re = np.einsum("ka,kl,la->a", c_re, self.covariance, c_re)
        var_im = np.einsum("ka,kl,la->a", c_im, self.covariance, c_im)
        shape = (basis.shape[1],) * 2
        return (np.sqrt(np.clip(var_re, 0, None)).reshape(shape),
                np.sqrt(np.clip(var_im, 0, None)).reshape(shape))

    def fidelity_error(self, psi: StateVector) -> float:
        """Standard error of <psi|rho_hat|psi>."""
        v = psi.amplitudes
        c = np.real(np.einsum("i,kij,j->k", v.conj(), PAULI2, v)) / 4
        return float(np.sqrt(max(c @ self.covariance @ c, 0.0)))

    def to_json(self) -> str:
        m = EXPORT_BASIS.conj().T @ self.rho_hat.matrix @ EXPORT_BASIS
        err_re, err_im = self.entry_errors()
        return json.dumps({
            "comment": "two-photon density matrix; rows/columns ordered as 'basis' "
                       "(photon1 in D/A, photon2 in R/L)",
            "basis": list(EXPORT_LABELS),
            "real": np.real(m).tolist(),
            "imag": np.imag(m).tolist(),
            "err_real": err_re.tolist(),
            "err_imag": err_im.tolist(),
            "physical": bool(self.rho_hat.physical),
        }, indent=1)


def setting_projectors(setting: tuple[str, str]) -> np.ndarray:
    """The four outcome projectors (00, 01, 10, 11) of a two-photon basis setting."""
    return _projectors(tuple(setting)).copy()


@lru_cache(maxsize=None)
def _projectors(setting: tuple[str, str]) -> np.ndarray:
    b1, b2 = BASES[setting[0]], BASES[setting[1]]
    out = []
    for s1, s2 in product(b1, b2):
        v = ket(s1, s2).amplitudes
        out.append(np.outer(v, v.conj()))
    out = np.array(out)
    out.setflags(write=False)
    return out


def born_probabilities(rho: DensityMatrix, setting) -> np.ndarray:
    p = np.real(np.einsum("kij,ji->k", _projectors(tuple(setting)), rho.matrix))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _allocate(total: int, n_settings: int, rng) -> np.ndarray:
    # every setting must be measured at least once for a full-rank inversion
    if total < n_settings:
        raise ValueError("fewer shots than settings")
    while True:
        alloc = rng.multinomial(total, np.full(n_settings, 1.0 / n_settings))
        if alloc.min() > 0:
            return alloc


def simulate_counts(rho: DensityMatrix, settings=TOMO_SETTINGS, shots: int = 1000,
                    seed: int = 0, allocation: str = "fixed") -> list[CountRecord]:
    """Multinomial counts from the Born probabilities.

    ``allocation="fixed"`` measures ``shots`` pairs in every setting;
    ``"random"`` spreads ``shots`` pairs in total over the settings at random,
    re-drawing until each setting has at least one pair. Each setting draws
    from its own stream derived from ``(seed, setting index)``.
    """
    if shots <= 0:
        raise ValueError("shots must be positive")
    settings = list(settings)
    if allocation == "fixed":
        alloc = np.full(len(settings), shots)
    elif allocation == "random":
        alloc = _allocate(shots, len(settings), np.random.default_rng([seed, 2**31]))
    else:
        raise ValueError(f"unknown allocation {allocation!r}")
    records = []
    for i, (s, n) in enumerate(zip(settings, alloc)):
        rng = np.random.default_rng([seed, i])
        records.append(CountRecord(tuple(s), tuple(int(c) for c in
                                                   rng.multinomial(n, born_probabilities(rho, s)))))
    return records


def _design(settings) -> np.ndarray:
    """Rows: (setting, outcome); columns: Stokes parameter index."""
    rows = [np.real(np.einsum("kij,lji->kl", _projectors(tuple(s)), PAULI2)) / 4
            for s in settings]
    return np.vstack(rows)


@lru_cache(maxsize=64)
def _design_pinv(settings: tuple) -> tuple[np.ndarray, np.ndarray]:
    A = _design(settings)
    Ar = A[:, 1:]
    rank = np.linalg.matrix_rank(Ar)
    if rank < 15:
        raise np.linalg.LinAlgError(
            f"basis settings are not tomographically complete (rank {rank} < 15)")
    return A[:, 0], np.linalg.pinv(Ar)


def design_condition_number(settings=TOMO_SETTINGS) -> float:
    return float(np.linalg.cond(_design(settings)[:, 1:]))


def _invert(settings, freqs) -> tuple[np.ndarray, np.ndarray]:
    offset, pinv = _design_pinv(tuple(tuple(s) for s in settings))
    stokes = np.concatenate([[1.0], pinv @ (freqs - offset)])
    return stokes, pinv


def stokes_to_rho(stokes: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", stokes, PAULI2) / 4


def linear_inversion(records: list[CountRecord]) -> ReconstructedState:
    """Unbiased linear estimate of the two-photon state and its covariance.

    The covariance treats every setting as an independent multinomial sample
    and uses the observed frequencies as plug-in probabilities.
    """
    records = [r for r in records if r.shots > 0]
    settings = [r.setting for r in records]
    freqs = np.concatenate([np.asarray(r.counts, float) / r.shots for r in records])
    stokes, pinv = _invert(settings, freqs)
    blocks = []
    for r in records:
        f = np.asarray(r.counts, float) / r.shots
        blocks.append((np.diag(f) - np.outer(f, f)) / r.shots)
    cov_f = _block_diag(blocks)
    cov = np.zeros((16, 16))
    cov[1:, 1:] = pinv @ cov_f @ pinv.T
    rho = stokes_to_rho(stokes)
    rho = 0.5 * (rho + rho.conj().T)
    physical = bool(np.linalg.eigvalsh(rho)[0] >= -1e-10)
    return ReconstructedState(DensityMatrix(rho, (2, 2), physical), cov)


def reconstruct_exact(rho: DensityMatrix, settings=TOMO_SETTINGS) -> DensityMatrix:
    """Linear inversion fed with exact Born probabilities (infinite statistics)."""
    freqs = np.concatenate([born_probabilities(rho, s) for s in settings])
    stokes, _ = _invert(list(settings), freqs)
    m = stokes_to_rho(stokes)
    return DensityMatrix(0.5 * (m + m.conj().T), (2, 2), physical=False)


def _block_diag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def expected_entry_rms(rho: DensityMatrix, pairs: int, settings=TOMO_SETTINGS,
                       which: str = "all") -> float:
    """rms standard error of the exported matrix entries for ``pairs`` pairs split
    evenly over the settings, from the true probabilities.

    ``which="diagonal"`` restricts to the diagonal entries; ``"all"`` pools
    the real and imaginary parts of every entry except the identically-zero
    imaginary parts on the diagonal.
    """
    settings = list(settings)
    n = pairs / len(settings)
    ps = [born_probabilities(rho, s) for s in settings]
    freqs = np.concatenate(ps)
    _, pinv = _invert(settings, freqs)
    cov_f = _block_diag([(np.diag(p) - np.outer(p, p)) / n for p in ps])
    cov = np.zeros((16, 16))
    cov[1:, 1:] = pinv @ cov_f @ pinv.T
    err_re, err_im = ReconstructedState(rho, cov).entry_errors()
    if which == "diagonal":
        vals = np.diag(err_re)
    elif which == "all":
        off = ~np.eye(4, dtype=bool)
        vals = np.concatenate([err_re.ravel(), err_im[off]])
    else:
        raise ValueError(which)
    return float(np.sqrt(np.mean(vals**2)))


# -- CSV I/O ---------------------------------------------------------------

CSV_COLUMNS = ("basis1", "basis2", "n00", "n01", "n10", "n11")


def records_to_csv(records: list[CountRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([*r.setting, *r.counts])
    return buf.getvalue()


def records_from_csv(text: str) -> list[CountRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
    return [CountRecord((row["basis1"], row["basis2"]),
                        tuple(int(row[c]) for c in CSV_COLUMNS[2:])) for row in reader]


# -- figures of merit ------------------------------------------------------

CNOT_INPUTS = ("RH", "RV", "LH", "LV")
CNOT_TARGETS = {"RH": "RH", "RV": "RV", "LH": "LV", "LV": "LH"}
CNOT_SETTING = ("RL", "HV")


def truth_table(channel, shots: int | None = None, seed: int = 0) -> tuple[np.ndarray, float]:
    """CNOT truth table (rows: inputs RH, RV, LH, LV; columns: same outcomes) and F_CNOT.

    ``shots=None`` gives exact probabilities. F_CNOT is the unweighted mean of
    the four correct-output probabilities.
    """
    table = np.zeros((4, 4))
    for i, lbl in enumerate(CNOT_INPUTS):
        p = born_probabilities(channel(ket(*lbl).projector()), CNOT_SETTING)
        if shots is not None:
            p = np.random.default_rng([seed, i]).multinomial(shots, p) / shots
        table[i] = p
    correct = [table[i, CNOT_INPUTS.index(CNOT_TARGETS[lbl])] for i, lbl in enumerate(CNOT_INPUTS)]
    return table, float(np.mean(correct))


def ideal_output(a: str, b: str) -> StateVector:
    from .protocol import CPF

    v = CPF.matrix @ ket(a, b).amplitudes
    return StateVector(v, (2, 2))


def average_gate_fidelity(channel, shots_per_state: int | None = None, seed: int = 0,
                          exact: bool | None = None) -> tuple[float, float]:
    """Mean fidelity of the 36 outputs for product inputs along H, V, D, A, R, L.

    Exact mode (``shots_per_state=None``) evaluates every output directly and
    returns a zero standard error. Sampled mode estimates each fidelity from
    ``shots_per_state`` pairs spread at random over the nine settings and
    reconstructed by linear inversion.
    """
    if exact is None:
        exact = shots_per_state is None
    fids, errs = [], []
    for k, (a, b) in enumerate(product(POL_LABELS, repeat=2)):
        rho = channel(ket(a, b).projector())
        target = ideal_output(a, b)
        if exact:
            fids.append(fidelity_pure(rho, target))
            errs.append(0.0)
            continue
        rec = linear_inversion(simulate_counts(rho, TOMO_SETTINGS, shots_per_state,
                                               seed=seed * 1000 + k, allocation="random"))
        fids.append(fidelity_pure(rec.rho_hat, target))
        errs.append(rec.fidelity_error(target))
    stderr = float(np.sqrt(np.sum(np.square(errs)))) / len(fids)
    return float(np.mean(fids)), stderr


def entangling_capability(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the partial transpose; negative certifies entanglement."""
    if rho.dim != 4:
        raise ValueError("entangling capability needs a two-qubit state")
    return min_eigenvalue(partial_transpose(rho, 1))


def bell_fidelity(rho: DensityMatrix) -> float:
    return fidelity_pure(rho, PSI_PLUS)


def split_by_outcome(channel, photons: StateVector | None = None) -> tuple[float, float]:
    """Bell fidelities (F_down, F_up) conditioned on the detected atomic state."""
    photons = photons if photons is not None else ket("D", "D")
    b = channel.branches(photons)
    return bell_fidelity(b["down"][1]), bell_fidelity(b["up"][1])
