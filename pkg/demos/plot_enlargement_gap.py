"""
How far a pair sits from the graph
==================================

For affine operators the smallest eps with v in the eps-enlargement of T at
z has a closed form. Here we compare it with a brute-force supremum and show
what happens when the symmetric part is singular.
"""

import numpy as np

from monoprox import operators as ops

# %%
# For T = 2x on the line, the pair (z, v) = (1, 3) misses the graph by a
# residual r = 1, and the gap is r^2 / (4 * 2) = 0.125.

op = ops.affine([[2.0]])
print("closed form:", ops.enlargement_gap(op, [1.0], [3.0]))

grid = np.linspace(-5, 5, 200001)
print("grid sup:   ", np.max(-(1.0 - grid) * (3.0 - 2 * grid)))

# %%
# A rotation is monotone but has a zero symmetric part. Any pair off the
# graph then has an infinite gap, while pairs on it have gap zero.

rot = ops.affine([[0.0, 1.0], [-1.0, 0.0]])
z = np.array([1.0, 0.0])
print("on graph: ", ops.enlargement_gap(rot, z, ops.operator_value(rot, z)))
print("off graph:", ops.enlargement_gap(rot, z, ops.operator_value(rot, z) + [0.1, 0.0]))

# %%
# The subdifferential of |x| has no closed form here; sampling gives a lower
# bound on how badly a candidate eps is violated.

abs_op = ops.subdiff_abs(1.0)
for eps in (0.0, 0.25, 0.5):
    viol = ops.sampled_enlargement_violation(abs_op, [0.5], [0.0], eps, sample_count=5000, seed=0)
    print(f"eps={eps:4.2f}  sampled violation {viol:.4f}")
