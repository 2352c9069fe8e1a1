"""A perfect absorber clones only classically.

At gamma0 = 1 the channel measures and re-prepares: the N -> M fidelity is
(N+1)/(N+2) for every M and every temperature.
"""

from bhclone import late_time_coeffs, simulate_clone_fidelity

for x in (2.0, 4.0):
    p = late_time_coeffs(1.0, x)
    print(f"omega/T = {x}, xi = {p.xi:.12f}")
    for N in (1, 2, 3):
        fids = [simulate_clone_fidelity("late", p, N=N, M=M).fidelity for M in range(1, 6)]
        print(f"  N={N} target {(N + 1) / (N + 2):.6f}: " + " ".join(f"{f:.6f}" for f in fids))
