# Reflection off the atom-cavity system.
#
# The coupled atom shifts the phase of a resonant photon by pi relative to the
# empty cavity. Away from resonance the shift drifts, which limits the photon
# bandwidth the gate can accept.
import numpy as np

from cpfgate.cavity import (CavityParams, EfficiencyChain, conditional_phase, efficiency_budget,
                            phase_accuracy_bandwidth, pulse_phase_statistics,
                            reflection_coefficient, solve_kappa_r)

p = solve_kappa_r(CavityParams(), reflectivity=0.67)
print(f"cooperativity C = {p.cooperativity:.2f}")
print(f"outcoupling rate solved from R = 67%: kappa_r = {p.kappa_r:.4f} MHz")

print(" delta    |r_c|^2  |r_e|^2  phase/pi")
for d in np.linspace(-2, 2, 9):
    rc = reflection_coefficient(p, d, coupled=True)
    re = reflection_coefficient(p, d, coupled=False)
    print(f"{d:+6.2f}  {rc.reflectivity:7.3f}  {re.reflectivity:7.3f}  {conditional_phase(p, d) / np.pi:8.4f}")

for tol in (0.05, 0.1, 0.2):
    print(f"band with phase within +-{tol}pi: {phase_accuracy_bandwidth(p, tol * np.pi):.3f} MHz")

# phase spread of a Gaussian photon spectrum
for fwhm in (0.35, 0.7, 1.4):
    mean, std = pulse_phase_statistics(p, fwhm)
    print(f"spectrum FWHM {fwhm} MHz: mean {mean / np.pi:.4f}pi, std {std / np.pi:.4f}pi")

per, pair = efficiency_budget(EfficiencyChain())
print(f"transmission per photon {per:.3f}, per pair {pair:.4f}")
