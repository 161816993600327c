"""A walk through the basic rotations.

Moves a qutrit state onto a projection, checks that the rotation is as short
as it can be, then deforms a nearby unitary onto its geodesic part.
"""

import numpy as np

from unitary_homotopy.geodesic import geodesic_unitary, pure_state_norm_distance
from unitary_homotopy.homotopy import deform_to_geodesic
from unitary_homotopy.mats import distance_from_identity
from unitary_homotopy.sampling import z_instance
from unitary_homotopy.state import AlgebraShape, Projection, PureState, act, move_distance, move_onto_projection, overlap

shape = AlgebraShape((3,))
psi = PureState(shape, np.array([0.6, 0.0, 0.8]))
p = Projection(shape, np.diag([1.0, 1.0, 0.0]))

u = move_onto_projection(psi, p)
print(f"weight on P before: {overlap(psi, p):.4f}, after: {overlap(act(u, psi), p):.4f}")
print(f"||1 - U|| = {distance_from_identity(u):.6f}, predicted {move_distance(psi.vector, p.matrix):.6f}")

target = act(u, psi).vector
g = geodesic_unitary(psi.vector, target)
print(f"rotation angle {g.theta:.6f}; state distance {pure_state_norm_distance(psi.vector, target):.6f}")

psi_v, v = z_instance(4, np.random.default_rng(0))
path = deform_to_geodesic(v, psi_v, grid=9)
print("\nt      ||1 - V_t||   ||V_t psi - V psi||")
for t, x in zip(path.times, path.unitaries):
    print(f"{t:.3f}  {distance_from_identity(x):.6f}      {np.linalg.norm(x @ psi_v - v @ psi_v):.1e}")
print(f"bound 3 ||1 - V|| = {3 * distance_from_identity(v):.6f}")
