"""
One-dimensional profiles
========================

Radial reductions of the model, the standard vortex profile and the two
minimal Painleve II branches.  Everything here runs in a few seconds.
"""

import math
import os

import numpy as np

from glnematic.fields import ModelParams
from glnematic.io import write_profile_csv
from glnematic.painleve import PainleveSpec, physical_alpha, solve_p2
from glnematic.radial import radial_energy, solve_equivariant_radial, solve_gl_vortex, solve_scalar_radial

out = "out_profiles"
os.makedirs(out, exist_ok=True)

# the pump profile mu changes sign on the circle r = rho
p = ModelParams(0.05)
print(f"rho = {p.rho:.6f}, mu1 = {p.mu1:.6f}")

# at a = 0 the scalar state beats the degree-one hedgehog by roughly a vortex cost
scalar = solve_scalar_radial(p)
hedgehog = solve_equivariant_radial(p)
print(f"scalar energy {radial_energy(scalar):.6f}, hedgehog energy {radial_energy(hedgehog):.6f}")
print(f"difference / |ln eps| = {(radial_energy(hedgehog) - radial_energy(scalar)) / abs(math.log(p.epsilon)):.4f}")

# with a strong forcing the hedgehog is the natural radial state
forced = solve_equivariant_radial(p.with_a(10.0))
print(f"forced hedgehog at a = 10: outer value {forced.values[-1]:.3e}")
write_profile_csv(os.path.join(out, "scalar.csv"), scalar)
write_profile_csv(os.path.join(out, "hedgehog_a10.csv"), forced)

# standard vortex: eta(r) ~ k r near the core, 1 - 1/(2 r^2) far away
eta = solve_gl_vortex()
print(f"eta'(0) = {eta.slope_at_origin():.8f}")
for r in (1.0, 2.0, 5.0):
    print(f"  eta({r:g}) = {float(eta(r)):.6f}")

# Painleve II: the positive branch and the sign-changing branch
yp = solve_p2(PainleveSpec())
print(f"y+(0) = {float(yp(0.0)):.10f}")
alpha = physical_alpha(ModelParams(0.02, 0.2 * 0.02 * abs(math.log(0.02))))
ym = solve_p2(PainleveSpec(alpha, "minus"))
k = int(np.argmax(ym.values > 0))
print(f"alpha = {alpha:.5f}: y- changes sign near s = {ym.grid.r[k]:.3f}")
write_profile_csv(os.path.join(out, "painleve_plus.csv"), yp, ("s", "y"))
write_profile_csv(os.path.join(out, "painleve_minus.csv"), ym, ("s", "y"))
