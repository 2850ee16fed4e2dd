"""Quadratic-phase CAZAC waveforms and their ambiguity functions.

A Zadoff-Chu waveform on the Zak grid has a self-ambiguity supported on a
single discrete line, while two waveforms whose chirp rates differ by a unit
have a perfectly flat cross-ambiguity.
"""

import math

import numpy as np

from zakwave import (
    cazac_dd,
    cazac_td,
    cross_af_flatness,
    dd_ambiguity,
    line_support_mask,
    make_grid,
    papr,
    resolve_family,
    td_ambiguity,
    verify_ca,
    verify_zac,
)

grid = make_grid(31, 37, nu_p=30e3)
p = resolve_family("zadoff-chu", grid, u=14).resolved
q = resolve_family("zadoff-chu", grid, u=11).resolved
print(f"u=14 -> alpha={p.alpha}, beta={p.beta};  u=11 -> alpha={q.alpha}, beta={q.beta}")

x = cazac_td(p)
print(f"CA {verify_ca(x)}, ZAC {verify_zac(x)}, PAPR {10 * math.log10(papr(x)):.2f} dB")

X = cazac_dd(p)
A = dd_ambiguity(X, X).magnitude
on = line_support_mask(p)
print(f"self-ambiguity: {on.sum()} points on the line 2*alpha*k = l, "
      f"min |A| there {A[on].min():.6f}, max elsewhere {A[~on].max():.1e}")
# the line wraps around: from (0, 0) it steps 2 alpha Doppler bins per delay bin
print("first line points:", [(k, int(np.flatnonzero(on[k])[0])) for k in range(4)])

# TD and DD pictures agree
print(f"max |A_dd - A_td| = {np.max(np.abs(dd_ambiguity(X, X).values - td_ambiguity(x, x).values)):.1e}")

rep = cross_af_flatness(p, q)
C = dd_ambiguity(cazac_dd(p), cazac_dd(q)).magnitude
print(f"cross-ambiguity eligible={rep.eligible}: |A| in [{C.min():.6f}, {C.max():.6f}], "
      f"1/sqrt(MN) = {1 / math.sqrt(grid.MN):.6f}")
