"""Brute-force Fock simulation against the closed forms.

The late-time Hamiltonian is built on a truncated Fock box, evolved exactly,
and the outside number distributions and clone fidelities are compared with
their closed forms.
"""

from bhclone import analytic, choose_truncation, late_time_coeffs, simulate_clone_fidelity, simulate_marginals

p = late_time_coeffs(0.95, 2.0)
n_max = choose_truncation(p, 1, 1, 1e-8)
sim1, sim0 = simulate_marginals(p, n_max)
ana1 = analytic.late_time_particle_distribution(p, n_max)
ana0 = analytic.late_time_antiparticle_distribution(p, n_max)
print(f"gamma0 = 0.95, omega/T = 2, n_max = {n_max}, edge mass {sim1.tail_mass:.2e}")
print(" m   p(m|1) sim   p(m|1) exact   p(m|0) sim   p(m|0) exact")
for m in range(6):
    print(f"{m:2d}   {sim1[m]:.9f}  {ana1[m]:.9f}    {sim0[m]:.9f}  {ana0[m]:.9f}")
print(f"total variation: {sim1.tv_distance(ana1):.2e} and {sim0.tv_distance(ana0):.2e}")
print()
for M in range(1, 7):
    rep = simulate_clone_fidelity("late", p, M=M)
    exact = analytic.late_time_fidelity_1M(p, M).fidelity
    print(f"M={M}: simulated {rep.fidelity:.12f}  closed form {exact:.12f}  n_max {rep.diagnostics['n_max']}"
          f"  evolution {rep.diagnostics['evolution']}")
