"""Why data does not blind the pilot: cross-ambiguity between random QAM
frames and a CAZAC pilot has mean power 1/MN at every delay-Doppler point.
"""

from zakwave import cazac_dd, make_grid, resolve_family, unbiasedness_stat
from zakwave.constellation import qam

for M, N, u in [(3, 5, 2), (31, 37, 14)]:
    grid = make_grid(M, N)
    X = cazac_dd(resolve_family("zadoff-chu", grid, u=u).resolved)
    rep = unbiasedness_stat(X, qam(4), trials=20000 if grid.MN < 100 else 1000, rng_seed=1)
    print(f"{M} x {N}: mean |A|^2 = {rep.mean_sq_cross:.6f} +- {rep.std_err:.1e}, "
          f"1/MN = {rep.target:.6f}, z = {rep.z_score:+.2f}")
