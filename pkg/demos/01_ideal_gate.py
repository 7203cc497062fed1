# The ideal gate, step by step.
#
# One atom in a cavity, two photons reflected off it in turn, three atomic
# rotations, one atomic readout and a feedback phase on the first photon.
import numpy as np

from cpfgate.protocol import ideal_unitary, run_ideal, trace_protocol, deferred_equivalence_check
from cpfgate.qcore import StateVector, ket
from cpfgate.tomography import PSI_PLUS

# computational basis: the only sign flip lands on |LR>
for lbl in ("RR", "RL", "LR", "LL"):
    out, (p_up, p_down) = run_ideal(ket(*lbl))
    sign = np.vdot(ket(*lbl).amplitudes, out.amplitudes)
    print(f"|{lbl}> -> {sign.real:+.0f} |{lbl}>   P(up) = {p_up:.2f}")

U = ideal_unitary()
print(np.round((U / U[0, 0]).real, 12))

# two diagonal photons come out maximally entangled
out, _ = run_ideal(ket("D", "D"))
print("overlap with Psi+:", abs(np.vdot(PSI_PLUS.amplitudes, out.amplitudes)) ** 2)

# populations of the joint atom-photon state after every step
tr = trace_protocol(ket("D", "D"))
for label, rho in tr.snapshots:
    print(f"{label:20s}", np.round(np.real(np.diag(rho.matrix)), 3))

# readout + feedback can be replaced by one more reflection and a discarded atom
rng = np.random.default_rng(0)
inputs = [StateVector.normalized(rng.normal(size=4) + 1j * rng.normal(size=4)) for _ in range(100)]
print("deferred-measurement deviation:", deferred_equivalence_check(inputs))
