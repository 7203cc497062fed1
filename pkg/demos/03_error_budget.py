# The imperfect gate and its error budget.
#
# Parameters come from the packaged calibration file; the calibration itself
# can be rerun with cpfgate.config.build_reference_config().
from cpfgate.config import reference_config
from cpfgate.errors import average_fidelity, fidelity_budget
from cpfgate.protocol import GateChannel
from cpfgate.qcore import ket
from cpfgate.tomography import (bell_fidelity, entangling_capability, split_by_outcome,
                                truth_table)

cfg = reference_config()
e = cfg.errors
print(e)

ch = GateChannel(e)
table, f_cnot = truth_table(ch)
print("CNOT truth table (rows RH, RV, LH, LV):")
print(table.round(3))
print(f"F_CNOT = {f_cnot:.3f}")

rho = ch(ket("D", "D"))
print(f"Bell fidelity {bell_fidelity(rho):.3f}, entangling capability {entangling_capability(rho):.3f}")
f_down, f_up = split_by_outcome(ch)
print(f"by atomic outcome: down {f_down:.3f}, up {f_up:.3f}")

print(f"average gate fidelity {average_fidelity(e):.3f}")
for b in fidelity_budget(e):
    print(f"  {b.effect:13s} {b.reduction:5.2f} pp")

# correlated phase errors at the two reflections, for comparison
corr = GateChannel(e.replace(correlated_dphi=True))
print(f"correlated draws: Bell fidelity {bell_fidelity(corr(ket('D', 'D'))):.3f}")
