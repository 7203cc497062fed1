"""Dense state, operator and channel algebra for the atom + two-photon system.

Subsystem order is fixed project-wide as (atom, photon1, photon2). Local
bases are {up, down} for the atom and {R, L} for each photon, so the
two-qubit atom-photon basis reads {upR, upL, downR, downL}.

All containers are immutable; every function returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Union

import numpy as np

ATOM, PHOTON1, PHOTON2 = 0, 1, 2

ATOL_EXACT = 1e-12
ATOL_EIG = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _default_dims(n: int) -> tuple[int, ...]:
    k = int(round(np.log2(n)))
    if 2**k != n:
        return (n,)
    return (2,) * k


def _check_dims(dims, n):
    if int(np.prod(dims)) != n:
        raise ValueError(f"subsystem dims {dims} do not multiply to {n}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = None

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", amps)
        dims = tuple(self.dims) if self.dims is not None else _default_dims(amps.size)
        _check_dims(dims, amps.size)
        object.__setattr__(self, "dims", dims)
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL_EXACT:
            raise ValueError(f"state vector not normalized (|psi|^2 = {norm:.15g})")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    @classmethod
    def normalized(cls, amplitudes, dims=None) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex)
        return cls(a / np.linalg.norm(a), dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace Hermitian matrix.

    ``physical=False`` marks estimates (e.g. linear-inversion output) that are
    allowed to carry negative eigenvalues.
    """

    matrix: np.ndarray
    dims: tuple[int, ...] = None
    physical: bool = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        dims = tuple(self.dims) if self.dims is not None else _default_dims(m.shape[0])
        _check_dims(dims, m.shape[0])
        object.__setattr__(self, "dims", dims)
        if np.max(np.abs(m - m.conj().T), initial=0.0) > ATOL_EXACT:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ATOL_EXACT:
            raise ValueError(f"density matrix trace is {tr:.15g}, expected 1")
        if self.physical and np.linalg.eigvalsh(m)[0] < -ATOL_EIG:
            raise ValueError("density matrix flagged physical has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        n = int(np.prod(dims))
        return cls(np.eye(n) / n, tuple(dims))

    @classmethod
    def from_unnormalized(cls, m, dims=None, physical=True) -> "DensityMatrix":
        """Hermitize and renormalize a matrix that is a density matrix up to rounding."""
        m = np.asarray(m, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        return cls(m / np.trace(m).real, dims, physical)


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    dims: tuple[int, ...] = None
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        dims = tuple(self.dims) if self.dims is not None else _default_dims(m.shape[0])
        _check_dims(dims, m.shape[0])
        object.__setattr__(self, "dims", dims)
        if self.unitary:
            err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if err > ATOL_EIG:
                raise ValueError(f"operator flagged unitary deviates by {err:.3g}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        if self.dims != other.dims:
            raise ValueError("operator dims mismatch")
        return Operator(self.matrix @ other.matrix, self.dims, self.unitary and other.unitary)

    @property
    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims, self.unitary)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Operator":
        return cls(np.eye(int(np.prod(dims))), tuple(dims), unitary=True)


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Complete set of orthogonal projectors (a projective measurement)."""

    projectors: tuple[np.ndarray, ...]
    dims: tuple[int, ...] = None
    labels: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        ps = tuple(_frozen(p) for p in self.projectors)
        if not ps:
            raise ValueError("empty projector set")
        n = ps[0].shape[0]
        object.__setattr__(self, "projectors", ps)
        dims = tuple(self.dims) if self.dims is not None else _default_dims(n)
        _check_dims(dims, n)
        object.__setattr__(self, "dims", dims)
        for p in ps:
            if np.max(np.abs(p @ p - p)) > ATOL_EIG or np.max(np.abs(p - p.conj().T)) > ATOL_EIG:
                raise ValueError("projector is not Hermitian and idempotent")
        if np.max(np.abs(sum(ps) - np.eye(n))) > ATOL_EIG:
            raise ValueError("projectors do not sum to identity")
        labels = self.labels if self.labels is not None else tuple(str(i) for i in range(len(ps)))
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def from_basis(cls, vectors, dims=None, labels=None) -> "ProjectorSet":
        vs = [np.asarray(v, dtype=complex) for v in vectors]
        return cls(tuple(np.outer(v, v.conj()) for v in vs), dims, labels)


Quantum = Union[StateVector, DensityMatrix, Operator]


def ket(*labels: str) -> StateVector:
    """Product basis ket from single-character labels, e.g. ``ket("u", "R")``.

    Atom labels: ``u``/``d``; photon labels: ``R``, ``L``, ``H``, ``V``, ``D``, ``A``.
    """
    vecs = [_LOCAL[s] for s in labels]
    return StateVector(reduce(np.kron, vecs), (2,) * len(vecs))


_S2 = 1 / np.sqrt(2)
_LOCAL = {
    "u": np.array([1, 0], dtype=complex),
    "d": np.array([0, 1], dtype=complex),
    "R": np.array([1, 0], dtype=complex),
    "L": np.array([0, 1], dtype=complex),
    "H": _S2 * np.array([1, 1], dtype=complex),
    "V": _S2 * np.array([1, -1], dtype=complex),
    "D": _S2 * np.array([1, 1j], dtype=complex),
    "A": -_S2 * np.array([1j, 1], dtype=complex),
}


def tensor(a: Quantum, b: Quantum) -> Quantum:
    """Kronecker product; ``a`` is the leading (lower-index) subsystem."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    dims = a.dims + b.dims
    if isinstance(a, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), dims)
    if isinstance(a, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), dims, a.physical and b.physical)
    return Operator(np.kron(a.matrix, b.matrix), dims, a.unitary and b.unitary)


def apply(U: Operator, s):
    """``U|psi>`` for state vectors, ``U rho U^dag`` for density matrices."""
    if U.dim != s.dim:
        raise ValueError(f"operator dim {U.dim} does not match state dim {s.dim}")
    if isinstance(s, StateVector):
        out = U.matrix @ s.amplitudes
        if U.unitary:
            return StateVector(out, s.dims)
        return StateVector.normalized(out, s.dims)
    m = U.matrix @ s.matrix @ U.matrix.conj().T
    if U.unitary:
        return DensityMatrix(m, s.dims, s.physical)
    return DensityMatrix.from_unnormalized(m, s.dims, s.physical)


def embed(U: Operator, targets: Sequence[int], dims: Sequence[int]) -> Operator:
    """Lift ``U`` acting on ``targets`` (in the order given) to the full space."""
    dims = tuple(dims)
    targets = list(targets)
    n = len(dims)
    if len(set(targets)) != len(targets) or any(t < 0 or t >= n for t in targets):
        raise ValueError(f"invalid targets {targets} for {n} subsystems")
    if U.dim != int(np.prod([dims[t] for t in targets])):
        raise ValueError("operator dim does not match target subsystems")
    rest = [i for i in range(n) if i not in targets]
    d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
    # build in (targets, rest) order, then permute axes back to natural order
    full = np.kron(U.matrix, np.eye(d_rest))
    order = targets + rest
    shape = [dims[i] for i in order]
    k = len(order)
    full = full.reshape(shape + shape)
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [k + i for i in inv])
    N = int(np.prod(dims))
    return Operator(full.reshape(N, N), dims, U.unitary)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = sorted(keep)
    n = len(rho.dims)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep) or not keep:
        raise ValueError(f"invalid subsystem list {keep}")
    t = rho.matrix.reshape(rho.dims + rho.dims)
    letters = "abcdefghijklmnop"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([rho.dims[i] for i in keep]))
    return DensityMatrix(red.reshape(d, d), tuple(rho.dims[i] for i in keep), rho.physical)


def measure(rho: DensityMatrix, P: ProjectorSet) -> list[tuple[float, DensityMatrix | None]]:
    """Projective measurement: ``[(prob, post_state), ...]`` in projector order.

    The post-state is ``None`` for outcomes of zero probability.
    """
    if P.projectors[0].shape[0] != rho.dim:
        raise ValueError("projector dim does not match state dim")
    out = []
    for p in P.projectors:
        m = p @ rho.matrix @ p
        prob = float(np.trace(m).real)
        if prob > ATOL_EXACT:
            out.append((prob, DensityMatrix.from_unnormalized(m, rho.dims, rho.physical)))
        else:
            out.append((max(prob, 0.0), None))
    if sum(pr for pr, _ in out) <= ATOL_EXACT:
        raise ValueError("all outcome probabilities vanish; invalid state")
    return out


def fidelity_pure(rho: DensityMatrix, psi: StateVector) -> float:
    """<psi|rho|psi>; raw value, so it may leave [0, 1] for non-physical rho."""
    if rho.dim != psi.dim:
        raise ValueError("dimension mismatch")
    v = psi.amplitudes
    return float(np.vdot(v, rho.matrix @ v).real)


def partial_transpose(rho, subsystem: int = 1) -> np.ndarray:
    """Transpose one qubit of a two-qubit matrix; returns the raw Hermitian array."""
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"partial transpose needs a bipartite 4x4 matrix, got {m.shape}")
    if subsystem not in (0, 1):
        raise ValueError("subsystem must be 0 or 1")
    t = m.reshape(2, 2, 2, 2)
    t = t.transpose(2, 1, 0, 3) if subsystem == 0 else t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def min_eigenvalue(H) -> float:
    m = _as_matrix(H)
    if np.max(np.abs(m - m.conj().T)) > ATOL_EIG:
        raise ValueError("matrix is not Hermitian")
    return float(np.linalg.eigvalsh(m)[0])


def mix(rho1: DensityMatrix, rho2: DensityMatrix, p: float) -> DensityMatrix:
    """(1 - p) rho1 + p rho2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight {p} outside [0, 1]")
    if rho1.dim != rho2.dim:
        raise ValueError("dimension mismatch")
    return DensityMatrix((1 - p) * rho1.matrix + p * rho2.matrix, rho1.dims,
                         rho1.physical and rho2.physical)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.projector().matrix
    if isinstance(x, (DensityMatrix, Operator)):
        return x.matrix
    return np.asarray(x)


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference; accepts states or raw matrices."""
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(_as_matrix(a) - _as_matrix(b)))))
