"""Early-time horizon as an optimal universal cloner.

Pure pair creation across the horizon copies N particles into M quanta
outside. The clones reach the optimal universal fidelity and the partners
behind the horizon carry the anticlone.
"""

from bhclone import analytic, early_time_coeffs, simulate_clone_fidelity

omega_over_t = 2.0
params = early_time_coeffs(omega_over_t)
print(f"omega/T = {omega_over_t}: pair ratio q = {params.q:.6f}, g_k = {params.g_k:.6f}")
print()
print(" N  M   F exact     F simulated   anticlone   P(M outside)")
for N, M in [(1, 1), (1, 2), (1, 3), (2, 3), (2, 5), (3, 6)]:
    exact = analytic.early_time_clone_fidelity(N, M, omega_over_t, exact=True)
    sim = simulate_clone_fidelity("early-particle", params, N=N, M=M)
    # with M = N nothing is left behind the horizon to carry an anticlone
    anti = "-" if sim.anticlone_fidelity is None else f"{sim.anticlone_fidelity:.9f}"
    print(f"{N:2d} {M:2d}   {str(exact.fidelity):9s}   {sim.fidelity:.9f}   {anti:11s}"
          f"   {sim.postselect_probability:.3e}")

# an antiparticle input is cloned just as well
for N in (1, 2, 3):
    print(f"antiparticle input N={N}: F = {analytic.antiparticle_input_clone_fidelity(N, 2 * N + 1, exact=True)}")
