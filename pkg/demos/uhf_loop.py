"""Contracting a loop of four-qubit states onto the all-up product state.

Each level pins one more qubit, and an observable on the first n qubits
settles on its reference value once level n has finished.
"""

import numpy as np

from unitary_homotopy.contract import iterate_contraction, loop_family
from unitary_homotopy.state import AlgebraShape, PureState

shape = AlgebraShape((2, 2, 2, 2))
up = np.zeros(16, dtype=complex)
up[0] = 1
ref = PureState(shape, up)
fam = loop_family(shape, ref, 17, seed=3)
trace = iterate_contraction(fam, ref, 4, grid=17)

for rec in trace.records:
    print(f"level {rec.level}: window {rec.window}, {rec.branch}, largest rotation {rec.max_norm:.3f}")

z = np.diag([1.0, -1.0])
print("\n t        <Z_1>     <Z_2>     <Z_3>     <Z_4>   at vertex 8")
ts, _ = trace.evaluate(np.eye(16))
values = [trace.evaluate(shape.embed(z, first=k))[1][8].real for k in range(4)]
for j in range(0, len(ts), 8):
    print(f"{ts[j]:.4f}  " + "  ".join(f"{v[j]:+.5f}" for v in values))
print(f"{ts[-1]:.4f}  " + "  ".join(f"{v[-1]:+.5f}" for v in values))
