"""
Exact proximal point as a special case of relaxed HPE
=====================================================

With no error budget and full steps, relaxed HPE reduces to the proximal
point method. We run both on a soft-thresholding problem and on a random
positive definite system and compare the iterates.
"""

import numpy as np

from monoprox import operators as ops
from monoprox.solver import ErrorSchedule, ExactOracle, HpeParams, Schedule, ppm_solve, rhpe_solve

# %%
# The subdifferential of c|x| has the soft-threshold as its resolvent, so
# from z0 = 60 with lam = 0.5 every step moves the iterate by exactly 0.5.

op = ops.subdiff_abs(1.0)
params = HpeParams(sigma=0.0, relaxation=1.0, max_iters=100)
hpe = rhpe_solve(op, ExactOracle(Schedule((0.5,))), params, [60.0])
ppm = ppm_solve(op, Schedule((0.5,)), ErrorSchedule(), params, [60.0])

for k in (1, 10, 50, 100):
    print(f"k={k:3d}  hpe={hpe.records[k - 1].z_next[0]:8.3f}  ppm={ppm.records[k - 1].z_next[0]:8.3f}")

# %%
# The same comparison on an affine operator with spectrum in [0.01, 10].

op = ops.random_spd(20, 0.01, 10.0, seed=8, b=np.linspace(-1, 1, 20))
z0 = np.ones(20)
hpe = rhpe_solve(op, ExactOracle(Schedule((0.05,))), params, z0)
ppm = ppm_solve(op, Schedule((0.05,)), ErrorSchedule(), params, z0)
gap = max(np.max(np.abs(a.z_next - b.z_next)) for a, b in zip(hpe.records, ppm.records))
print(f"largest coordinate difference over {len(hpe)} steps: {gap:.2e}")

# %%
# Summable errors: PPM with ||delta_k|| = 0.1 * 0.5**k still converges, and
# the distance to the solution stays below d0 plus the total error.

ppm = ppm_solve(ops.subdiff_abs(1.0), Schedule((0.5,)), ErrorSchedule(0.1, 0.5),
                HpeParams(max_iters=150, seed=1), [60.0])
print(f"final iterate {ppm.final[0]:.3e} after {len(ppm)} steps")
