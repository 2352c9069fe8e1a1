"""The cloner treats every input qubit alike.

The logical qubit is sigma |particle> + tau |antiparticle>. Simulated clone
fidelities for the poles and two equatorial states agree to rounding.
"""

from bhclone import early_time_coeffs, late_time_coeffs, simulate_clone_fidelity
from bhclone.cloning import UNIVERSALITY_INPUTS

cases = [("early", "early-particle", early_time_coeffs(2.0), 2), ("late", "late", late_time_coeffs(0.95, 4.0), 3)]
for label, scenario, params, M in cases:
    print(f"{label}-time, 1 -> {M}")
    for q in UNIVERSALITY_INPUTS:
        rep = simulate_clone_fidelity(scenario, params, q, M=M)
        print(f"  sigma={complex(q.sigma):.3f} tau={complex(q.tau):.3f}  F = {rep.fidelity:.12f}")
