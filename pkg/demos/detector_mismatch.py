"""Detection-efficiency mismatch.

Two detectors with efficiencies eta0 <= eta1 are modelled as a filter on
Bob's qubit. The script walks through the estimation chain for one state and
then compares the three rate formulas across the mismatch range.
"""

import numpy as np

from coherent_keyrate import (
    DetectorModel,
    bb84_worstcase_state,
    discard_keyrate_k1,
    koashi_keyrate_k2,
    mismatch_keyrate,
    mismatch_pipeline,
    sweep_mismatch,
)

det = DetectorModel(0.3, 0.9)
print("x =", det.x)

# %% Observed statistics -> Gamma, e_p'', e_p' -> rate.
rho = bb84_worstcase_state(0.05, 0.05)
rep = mismatch_pipeline(rho, det)
for key in ("gamma", "e_p_double_prime", "e_p_prime", "observed_e_b"):
    print(f"{key:>18}: {rep.details[key]:.9f}")
print(f"{'pipeline rate':>18}: {rep.rate:.9f}")
print(f"{'closed form':>18}: {mismatch_keyrate(det.x, 0.05, 0.05).rate:.9f}")

# %% Three formulas side by side.
for x in (0.01, 0.05, 0.1, 0.25, 0.5):
    k = mismatch_keyrate(x, 0.05, 0.05).rate
    print(f"x={x:<5} K={k:+.6f}  K1={discard_keyrate_k1(x, 0.05, 0.05):+.6f}  K2={koashi_keyrate_k2(x, 0.05, 0.05):+.6f}")

# %% Where K overtakes K1.
res = sweep_mismatch(0.05, 0.05, 0.01, 0.5, 50)
x = np.array(res.column("x"))
gap = np.array(res.column("K")) - np.array(res.column("K1"))
i = int(np.argmax(gap > 0))
print(f"K - K1 changes sign between x={x[i - 1]:.3f} and x={x[i]:.3f}")
