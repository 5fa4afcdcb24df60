"""Hashing-based error correction, done classically and as a virtual quantum circuit.

Both runs use the 2x3 parity-check matrix [[1,1,0],[0,1,1]] and the same
minimum-weight decoder, so their key distributions should coincide.
"""

import numpy as np

from coherent_keyrate import (
    DEFAULT_HASHING,
    binary_entropy,
    classical_ec_run,
    ec_cost,
    random_state,
    uncorrectable_probability,
    virtual_qec_run,
)

rng = np.random.default_rng(7)

for trial in range(3):
    rho = random_state(rng)
    c = classical_ec_run(rho, 3, DEFAULT_HASHING)
    v = virtual_qec_run(rho, 3, DEFAULT_HASHING)
    print(f"state {trial}: TV distance = {c.total_variation(v):.2e}, "
          f"residual mismatch = {v.mismatch_probability:.6f} "
          f"(uncorrectable weight {uncorrectable_probability(rho, DEFAULT_HASHING):.6f})")

# %% Syndrome statistics for one state.
for s, p in sorted(v.syndromes.items()):
    print("syndrome", "".join(map(str, s)), f"{p:.6f}")

# %% Cost per pair, compared with the binary entropy of the bit error.
rho = np.diag([0.7, 0.1, 0.05, 0.15]).astype(complex)
print("H(Z_A|Z_B) =", ec_cost(rho), " H(e_b) =", binary_entropy(0.15))
