# Reconstructing the entangled output from simulated counts.
#
# 1378 pairs are spread at random over the nine basis settings and inverted
# linearly, without forcing the estimate to be positive.
from cpfgate.config import reference_config
from cpfgate.protocol import GateChannel
from cpfgate.qcore import ket
from cpfgate.tomography import (EXPORT_BASIS, EXPORT_LABELS, PSI_PLUS, TOMO_SETTINGS,
                                average_gate_fidelity, bell_fidelity, entangling_capability, expected_entry_rms,
                                linear_inversion, records_to_csv, simulate_counts)

ch = GateChannel(reference_config().errors)
rho = ch(ket("D", "D"))

records = simulate_counts(rho, TOMO_SETTINGS, 1378, seed=1, allocation="random")
print(records_to_csv(records))

rec = linear_inversion(records)
m = EXPORT_BASIS.conj().T @ rec.rho_hat.matrix @ EXPORT_BASIS
print("basis:", EXPORT_LABELS)
print("Re:\n", m.real.round(3))
print("Im:\n", m.imag.round(3))
print(f"Bell fidelity {bell_fidelity(rec.rho_hat):.3f} +- {rec.fidelity_error(PSI_PLUS):.3f}")
print(f"entangling capability {entangling_capability(rec.rho_hat):.3f}")
print(f"estimate is physical: {rec.rho_hat.physical}")
print(f"expected rms entry error at 1378 pairs: {expected_entry_rms(rho, 1378):.4f}")

# 36 product inputs, 80 pairs each
for seed in range(3):
    f, err = average_gate_fidelity(ch, 80, seed=seed)
    print(f"seed {seed}: average fidelity {f:.3f} +- {err:.3f}")
print(f"exact: {average_gate_fidelity(ch)[0]:.3f}")
