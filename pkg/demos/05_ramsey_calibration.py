# Calibrating the atomic rotations with a three-pulse Ramsey scan.
#
# +pi/2, -pi/2, +pi/2 pulses separated by free evolution. On resonance the
# first two cancel and the last leaves half the population in up.
import time

import numpy as np

from cpfgate.calibration import RamseyParams, fit_with_restarts, noisy_spectrum, p_up_model

truth = RamseyParams(rabi=250.0, delta_offset=0.0, light_shift=40.0)
deltas = np.linspace(-1250, 1250, 251)

print("P(up) at zero detuning:")
print("  with the light shift     ", p_up_model(truth, [0.0])[0])
print("  compensated during pulses", p_up_model(RamseyParams(pulse_detuning_step=-40.0), [0.0])[0])

data = noisy_spectrum(truth, deltas, shots=500, seed=3)
t0 = time.perf_counter()
fit = fit_with_restarts(data, RamseyParams(rabi=300.0, light_shift=20.0))
print(f"fit in {time.perf_counter() - t0:.2f} s, chi2 = {fit.chi2:.1f} for {deltas.size} points")
for name in ("rabi", "delta_offset", "light_shift"):
    print(f"  {name:12s} {getattr(fit.params, name):8.2f} +- {fit.stderr[name]:.2f} kHz"
          f"  (true {getattr(truth, name)})")

resid = (data.p_up - p_up_model(fit.params, deltas)) / data.sigma
print("normalized residual rms:", np.sqrt(np.mean(resid**2)).round(3))
