"""
Vortex regimes
==============

Small forcing leaves a shadow vortex near the interface circle; strong
forcing pulls a standard vortex to the center; very strong forcing restores
the radial symmetry.  The runs use eps = 0.05 so that each takes well under
a minute; the acceptance suite repeats them at eps = 0.02.
"""

import math
import os

from glnematic.analyze import analyze, core_profile_match
from glnematic.fields import GridSpec, ModelParams, ScalarField
from glnematic.io import write_ppm
from glnematic.minimize import default_seeds, equivariance_defect, multistart_global

out = "out_regimes"
os.makedirs(out, exist_ok=True)

eps = 0.05
L = abs(math.log(eps))
cases = {
    "shadow": 0.2 * eps * L,
    "center": 5 * eps * L * L,
    "restored": 10.0,
}
for name, a in cases.items():
    p = ModelParams(eps, a)
    g = GridSpec.for_epsilon(p, p.rho + 1.5)
    res = multistart_global(p, g, seed_list=default_seeds())
    rep = analyze(res.field, p)
    print(f"{name:9s} a = {a:.4f}  E = {res.energy:.6f}  phase {rep.phase.label}  "
          f"equivariance defect {equivariance_defect(res.field):.1e}")
    for z in rep.zeros:
        line = f"    zero at |x| = {z.radius:.4f} (rho = {p.rho:.4f}), degree {z.winding:+d}"
        try:
            line += f", core match {core_profile_match(res.field, z, p):.3f}"
        except ValueError:
            pass
        print(line)
    write_ppm(os.path.join(out, f"{name}.ppm"), ScalarField(g, res.field.modulus()), [z.location for z in rep.zeros])
