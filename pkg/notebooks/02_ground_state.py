"""
The a = 0 ground state
======================

Without forcing the minimizer has no zeros, is unique up to a constant
rotation of its values, and its modulus approaches the Thomas-Fermi
profile sqrt(mu+) as eps decreases.
"""

import math
import os

from glnematic.analyze import bound_constant, tf_deviation
from glnematic.fields import GridSpec, ModelParams, ScalarField, renormalized_energy
from glnematic.io import write_field, write_ppm
from glnematic.minimize import MinimizeOptions, Seed, minimize_from_seed

out = "out_ground_state"
os.makedirs(out, exist_ok=True)

for eps in (0.2, 0.1, 0.05):
    p = ModelParams(eps)
    g = GridSpec.for_epsilon(p)
    res = minimize_from_seed(p, g)
    lead = math.pi * abs(p.mu1) * p.rho / 6 * abs(math.log(eps))
    print(f"eps {eps:<5g} n {g.n:4d} iters {res.iters:4d} E {res.energy:.6f} "
          f"tf {tf_deviation(res.field, p):.4f} K {bound_constant(res.field, p):.3f} "
          f"E_ren - lead {renormalized_energy(res.field, p) - lead:.4f}")
    write_field(os.path.join(out, f"ground_eps{eps:g}.glnf"), res.field)
    write_ppm(os.path.join(out, f"ground_eps{eps:g}.ppm"), ScalarField(g, res.field.modulus()))

# a random start reaches the same energy
p = ModelParams(0.1)
g = GridSpec.for_epsilon(p)
a = minimize_from_seed(p, g)
b = minimize_from_seed(p, g, MinimizeOptions(seed=Seed.random(3)))
print(f"Thomas-Fermi seed {a.energy:.10f}, random seed {b.energy:.10f}")
