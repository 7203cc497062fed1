# Weak coherent pulses instead of single photons.
from cpfgate.photonsource import (LOSS_AFTER_GATE, LOSS_BEFORE_GATE, PulseStats,
                                  coincidence_probability, multi_photon_weight, poisson_pn)

s = PulseStats(nbar=0.17, eta_chain=0.22)
for n in range(4):
    print(f"P({n}) = {poisson_pn(s.nbar, n):.4f}")

# how often a populated mode carries an extra photon
print("loss before the gate:", round(multi_photon_weight(s, LOSS_BEFORE_GATE), 4))
print("loss after the gate: ", round(multi_photon_weight(s, LOSS_AFTER_GATE), 4))

for nbar in (0.05, 0.1, 0.17, 0.3, 0.5):
    p = PulseStats(nbar, 0.22)
    print(f"nbar {nbar:4.2f}: two-photon weight {multi_photon_weight(p):.3f}, "
          f"coincidences per trial {coincidence_probability(p):.2e}")
