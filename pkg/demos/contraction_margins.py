"""Contracting small loops of unitaries that keep some weight on a projection.

Runs the same loop shape in each dispatch case and prints how much of the
39 sqrt(delta) allowance each contraction used.
"""

import numpy as np

from unitary_homotopy.homotopy import contract_in_s
from unitary_homotopy.sampling import s_ball_circle

DELTA = 5e-4
CASES = [(0.5, 0.0), (0.1 + 1.9 * DELTA, 0.1), (4e-4, 0.0), (4e-4, 1e-4)]

print(f"delta = {DELTA}, 39 sqrt(delta) = {39 * np.sqrt(DELTA):.4f}\n")
print(f"{'|P psi|^2':>10} {'t':>7}  {'branch':<32} {'max |1-H|':>10} {'endpoint':>9}")
for weight, t in CASES:
    fam, ball = s_ball_circle(8, 4, weight, t, DELTA, np.random.default_rng(1))
    paths, rep = contract_in_s(fam, ball)
    name = f"{rep.branch}/{rep.sub_branch}"
    print(f"{weight:>10.4g} {t:>7.4g}  {name:<32} {rep.realized_max_distance:>10.3e} {rep.endpoint_spread:>9.1e}")
    for stage in rep.stages:
        print(f"{'':20}{stage.name:<24} used {stage.realized_max_distance:.2e} of {stage.constant:.2e}")
