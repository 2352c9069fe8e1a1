"""Late-time clone fidelity against the number of clones.

Partial absorption lets vacuum noise leak in through the inside mode, so the
fidelity interpolates between the classical 2/3 and the optimal cloner.
xi = gamma^2 / (alpha^2 beta^2) sets where the channel sits.
"""

from bhclone import analytic, late_time_coeffs

Ms = (1, 2, 3, 5, 10, 20)
print("gamma0  omega/T   xi            " + "  ".join(f"M={M:<5d}" for M in Ms))
for gamma0, x in [(1.0, 4.0), (0.99, 4.0), (0.9, 4.0), (0.5, 4.0), (0.95, 1.0), (0.95, 10.0), (0.95, 20.0)]:
    p = late_time_coeffs(gamma0, x)
    fids = [analytic.late_time_fidelity_1M(p, M).fidelity for M in Ms]
    print(f"{gamma0:6.2f}  {x:7.1f}   {p.xi:12.5g}  " + "  ".join(f"{f:.5f}" for f in fids))
print("optimal                       " + "  ".join(f"{analytic.optimal_fidelity(1, M):.5f}" for M in Ms))
