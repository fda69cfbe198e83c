import math

import numpy as np
import pytest

from glnematic.fields import GridSpec, ModelParams, energy, mu_eval
from glnematic.minimize import MinimizeOptions, Seed, minimize_from_seed
from glnematic.radial import (
    NewtonDivergence,
    RadialGrid,
    RadialProfile,
    _newton_tridiag,
    equivariant_outer_value,
    inject,
    radial_energy,
    solve_equivariant_radial,
    solve_gl_vortex,
    solve_scalar_radial,
)

from oracles import gl_vortex_slope_shooting

# slope of the degree-one vortex profile at the origin, from the shooting oracle
VORTEX_SLOPE = 0.583189495964116


@pytest.fixture(scope="module")
def vortex():
    return solve_gl_vortex()


def test_vortex_slope_oracle_is_stable():
    assert gl_vortex_slope_shooting() == pytest.approx(VORTEX_SLOPE, abs=1e-9)


def test_vortex_profile_matches_shooting(vortex):
    assert vortex.slope_at_origin() == pytest.approx(VORTEX_SLOPE, abs=1e-6)
    assert abs(vortex.values[0]) < 1e-10
    assert np.all(np.diff(vortex.values) > 0)
    assert vortex.values[-1] == pytest.approx(1 - 1 / (2 * 20.0**2), abs=1e-15)


def test_vortex_far_field_asymptotics(vortex):
    # 1 - eta ~ 1/(2 r^2) for large r
    for r in (8.0, 12.0):
        assert (1 - vortex(r)) * 2 * r * r == pytest.approx(1.0, rel=0.1)


def test_vortex_needs_long_interval():
    with pytest.raises(ValueError):
        solve_gl_vortex(RadialGrid(10.0, 2001))


def test_scalar_profile_shape():
    p = ModelParams(0.05)
    prof = solve_scalar_radial(p)
    assert prof.residual <= 1e-8 or prof.residual <= 64 * np.finfo(float).eps * 4 / prof.grid.dr**2
    r = prof.grid.r
    assert np.all(prof.values >= 0)
    assert abs(prof.slope_at_origin()) < 1e-6
    # close to sqrt(mu) away from the interface, exponentially small outside
    inner = r < p.rho - 0.2
    tf = np.sqrt(np.maximum(mu_eval(p, np.stack([r, 0 * r], -1)), 0))
    # the gap is driven by eps^2 times the curvature of sqrt(mu)
    assert np.max(np.abs(prof.values[inner] - tf[inner])) < 0.05
    assert np.max(prof.values[r > p.rho + 0.5]) < 1e-2
    assert np.max(prof.values[r > p.rho + 1.0]) < 1e-5


def test_scalar_profile_second_order_in_dr():
    p = ModelParams(0.1)
    vals = []
    for m in (401, 801, 1601):
        prof = solve_scalar_radial(p, RadialGrid(p.rho + 2, m))
        vals.append(prof(0.5))
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    # at least second order
    assert d2 < d1 / 3.5


def test_scalar_profile_matches_planar_minimizer():
    p = ModelParams(0.1)
    g = GridSpec.for_epsilon(p, h_factor=1 / 4)
    r2d = minimize_from_seed(p, g, MinimizeOptions(seed=Seed.radial_scalar(), symmetry="scalar"))
    prof = solve_scalar_radial(p)
    j = g.n // 2
    sel = g.x >= 0
    err = np.max(np.abs(r2d.field.u1[sel, j] - prof(g.x[sel])))
    assert err < 5e-3
    assert radial_energy(prof) == pytest.approx(r2d.energy, rel=2e-3)


def test_equivariant_profile():
    p = ModelParams(0.1, 10.0)
    prof = solve_equivariant_radial(p)
    assert abs(prof.values[0]) < 1e-10
    assert prof.values[-1] == pytest.approx(equivariant_outer_value(p, prof.grid.r_max), abs=1e-15)
    # far outside the outer value -eps a f/mu is small and positive
    assert 0 < prof.values[-1] < 0.01
    g = GridSpec.for_epsilon(p)
    r2d = minimize_from_seed(p, g, MinimizeOptions(seed=Seed.equivariant(), symmetry="equivariant"))
    assert radial_energy(prof) == pytest.approx(r2d.energy, rel=1e-3)
    assert energy(inject(prof, g), p) == pytest.approx(r2d.energy, rel=2e-3)


def test_equivariant_at_a0_is_degree_one_hedgehog():
    p = ModelParams(0.1)
    prof = solve_equivariant_radial(p)
    assert prof.values[-1] == 0.0
    assert np.all(prof.values >= -1e-14)
    # below the scalar state: the vortex costs a logarithmic amount
    assert radial_energy(prof) > radial_energy(solve_scalar_radial(p))


def test_inject_shapes_and_boundary():
    p = ModelParams(0.1)
    g = GridSpec(p.rho + 1.5, 64)
    u = inject(solve_equivariant_radial(p), g)
    u.check_dirichlet()
    X, Y = g.mesh
    # equivariant injection points along x/|x|
    cross = u.u1 * Y - u.u2 * X
    assert np.max(np.abs(cross)) < 1e-14
    painleve = RadialProfile(RadialGrid(1.0, 5, -1.0), np.zeros(5), "painleve")
    with pytest.raises(ValueError):
        inject(painleve, g)


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile(RadialGrid(1.0, 5), np.zeros(4), "scalar")
    with pytest.raises(ValueError):
        RadialProfile(RadialGrid(1.0, 5), np.array([0, 1, np.nan, 0, 0]), "scalar")
    with pytest.raises(ValueError):
        RadialProfile(RadialGrid(1.0, 5), np.zeros(5), "hexagonal")
    with pytest.raises(ValueError):
        RadialGrid(1.0, 2)


def test_newton_divergence_reports_trace():
    # y^2 + 1 = 0 has no real root
    with pytest.raises(NewtonDivergence) as exc:
        _newton_tridiag(lambda y: y * y + 1, lambda y: np.stack([0 * y, 2 * y, 0 * y]), np.ones(5), 1e-10)
    assert len(exc.value.trace) >= 1
