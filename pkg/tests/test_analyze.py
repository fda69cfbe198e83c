import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glnematic.analyze import (
    LABELS,
    Phase,
    Zero,
    alignment,
    analyze,
    bound_constant,
    classify,
    core_profile_fit,
    core_profile_match,
    default_amp_tol,
    find_zeros,
    outer_check,
    tf_deviation,
    winding_number,
)
from glnematic.fields import GridSpec, ModelParams, VectorField2, f_rad, model_arrays, mu_rad
from glnematic.radial import solve_gl_vortex

from oracles import degree_field, random_degree_case

P = ModelParams(0.05)


def zero_ring(d):
    d = np.array(d, dtype=float)
    d[:, 0, :] = d[:, -1, :] = d[:, :, 0] = d[:, :, -1] = 0.0
    return d


@pytest.fixture(scope="module")
def eta():
    return solve_gl_vortex()


# --- winding numbers ----------------------------------------------------------


def test_winding_of_fifty_random_fields():
    g = GridSpec(2.0, 129)
    X, Y = g.mesh
    rng = np.random.default_rng(2024)
    for _ in range(50):
        data, c, rad, expected = random_degree_case(rng, X, Y, g.half_width)
        assert winding_number(VectorField2(g, data), c, rad) == expected


@pytest.mark.parametrize("kind,deg", [("id", 1), ("conj", -1), ("const", 0), ("double", 2)])
def test_winding_basic(kind, deg):
    g = GridSpec(2.0, 65)
    X, Y = g.mesh
    u = VectorField2(g, degree_field(X, Y, kind))
    assert winding_number(u, (0, 0), 1.0) == deg
    # a loop that does not enclose the zero has degree 0
    if kind != "const":
        assert winding_number(u, (1.2, 0.0), 0.5) == 0


def test_winding_errors():
    g = GridSpec(2.0, 65)
    X, Y = g.mesh
    u = VectorField2(g, degree_field(X, Y, "id"))
    with pytest.raises(ValueError, match="leaves the grid"):
        winding_number(u, (0, 0), 2.5)
    with pytest.raises(ValueError, match="near-zero"):
        winding_number(u, (0.5, 0.0), 0.5)
    # field with a zero exactly on the loop's sample points
    with pytest.raises(ValueError):
        winding_number(VectorField2.zeros(g), (0, 0), 1.0)


# --- zero detection -------------------------------------------------------------


def test_find_zeros_vortex_antivortex_pair():
    g = GridSpec(2.0, 201)
    X, Y = g.mesh
    z1, z2 = (0.43, -0.31), (-0.52, 0.27)
    a = (X - z1[0]) + 1j * (Y - z1[1])
    b = np.conj((X - z2[0]) + 1j * (Y - z2[1]))
    w = a * b * np.exp(-(X**2 + Y**2))
    u = VectorField2(g, zero_ring(np.stack([w.real, w.imag])))
    zs = sorted(find_zeros(u, 0.1), key=lambda z: z.location[0])
    assert [z.winding for z in zs] == [-1, 1]
    assert math.dist(zs[0].location, z2) < 1e-3
    assert math.dist(zs[1].location, z1) < 1e-3
    assert all(z.core_dip < 0.05 for z in zs)


def test_find_zeros_none_for_nonvanishing_field():
    g = GridSpec(2.0, 64)
    X, Y = g.mesh
    d = zero_ring(np.stack([1 + 0 * X, 0.3 * np.sin(X)]))
    assert find_zeros(VectorField2(g, d), 0.5) == []
    assert find_zeros(VectorField2.zeros(g), 0.5) == []
    with pytest.raises(ValueError):
        find_zeros(VectorField2.zeros(g), 0.0)


def test_find_zeros_drops_degree_zero_dip():
    g = GridSpec(2.0, 129)
    X, Y = g.mesh
    m = 0.02 + (X - 0.3) ** 2 + Y**2
    d = zero_ring(np.stack([m, 0 * m]))
    assert find_zeros(VectorField2(g, d), 0.5) == []


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.sampled_from(["id", "conj"]))
def test_find_zeros_rotation_invariance(x0, y0, kind):
    # rotating domain and values by pi/2 rotates the detected zero
    g = GridSpec(2.0, 129)
    X, Y = g.mesh
    u = zero_ring(degree_field(X, Y, kind, (x0, y0)) * np.exp(-(X**2 + Y**2)))
    rot = np.stack([-u[1], u[0]])[:, :, :].transpose(0, 2, 1)[:, ::-1, :]
    za = find_zeros(VectorField2(g, u), 0.2)
    zb = find_zeros(VectorField2(g, np.ascontiguousarray(rot)), 0.2)
    assert len(za) == len(zb) == 1
    (ax, ay), (bx, by) = za[0].location, zb[0].location
    assert math.hypot(bx + ay, by - ax) < 1e-9
    assert za[0].winding == zb[0].winding


def test_default_amp_tol():
    assert default_amp_tol(P) == pytest.approx(0.3 * 0.05 ** (1 / 3) * math.sqrt(-P.mu1))


# --- alignment, TF deviation, bound ------------------------------------------------


def test_alignment_of_rotated_hedgehog():
    g = GridSpec(P.rho + 1.5, 128)
    X, Y = g.mesh
    for phi in (0.0, 0.3, 1.0):
        w = (X + 1j * Y) * np.exp(1j * phi)
        u = VectorField2(g, zero_ring(np.stack([w.real, w.imag])))
        assert alignment(u, 0.9, 1.2) == pytest.approx(math.cos(phi), abs=1e-12)


def test_alignment_errors():
    g = GridSpec(P.rho + 1.5, 128)
    with pytest.raises(ValueError, match="zero amplitude in annulus"):
        alignment(VectorField2.zeros(g), 0.9, 1.2)
    with pytest.raises(ValueError):
        alignment(VectorField2.zeros(g), 1.2, 0.9)


def test_tf_deviation_and_bound_for_tf_field():
    g = GridSpec.for_epsilon(P, P.rho + 1.5)
    mu, _ = model_arrays(P, g)
    tf = zero_ring(np.stack([np.sqrt(np.maximum(mu, 0)), 0 * mu]))
    u = VectorField2(g, tf)
    assert tf_deviation(u, P) == 0.0
    assert bound_constant(u, P) < 1
    assert bound_constant(VectorField2.zeros(g), P) == 0.0
    with pytest.raises(ValueError):
        tf_deviation(u, P, 1.2)


# --- outer asymptote -----------------------------------------------------------


def test_outer_check_exact_asymptote():
    p = ModelParams(0.05, 1.0)
    g = GridSpec(p.rho + 1.5, 257)
    X, Y = g.mesh
    R = np.hypot(X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.where(R > p.rho + 0.1, -p.epsilon * p.a * f_rad(R) / mu_rad(R, p.chi) / np.where(R > 0, R, 1), 0)
    u = VectorField2(g, zero_ring(np.stack([amp * X, amp * Y])))
    # bilinear interpolation of a smooth field: small but nonzero
    assert outer_check(u, p, p.rho + 0.5) < 1e-3
    assert outer_check(u, p.with_a(0.0), p.rho + 0.5) is None
    with pytest.raises(ValueError):
        outer_check(u, p, p.rho + 0.1)
    with pytest.raises(ValueError, match="leaves the grid"):
        outer_check(u, p, p.rho + 2)


# --- core matching ---------------------------------------------------------------


def synthetic_core(g, params, x0, eta, phi=0.0, reflect=False):
    X, Y = g.mesh
    mu0 = float(mu_rad(math.hypot(*x0), params.chi))
    dx, dy = X - x0[0], Y - x0[1]
    R = np.hypot(dx, dy)
    amp = math.sqrt(mu0) * eta(math.sqrt(mu0) * R / params.epsilon)
    with np.errstate(invalid="ignore"):
        c, s = np.where(R > 0, dx / R, 0), np.where(R > 0, dy / R, 0)
    if reflect:
        s = -s
    w = (c + 1j * s) * np.exp(1j * phi)
    return VectorField2(g, zero_ring(np.stack([amp * w.real, amp * w.imag])))


def test_core_match_on_exact_model(eta):
    g = GridSpec(P.rho + 1.5, 385)
    u = synthetic_core(g, P, (0.1, -0.05), eta, phi=0.7)
    fit = core_profile_fit(u, Zero((0.1, -0.05), 1, 0.0), P, eta)
    # misfit only from bilinear interpolation and mu varying across the core
    assert fit.misfit < 0.05
    assert not fit.reflected
    G = fit.rotation
    assert math.atan2(G[1, 0], G[0, 0]) == pytest.approx(0.7, abs=0.02)


def test_core_match_detects_reflection(eta):
    g = GridSpec(P.rho + 1.5, 385)
    u = synthetic_core(g, P, (0.0, 0.0), eta, phi=-1.0, reflect=True)
    fit = core_profile_fit(u, Zero((0.0, 0.0), -1, 0.0), P, eta)
    assert fit.reflected and fit.misfit < 0.05


def test_core_match_rejects_wrong_profile(eta):
    g = GridSpec(P.rho + 1.5, 385)
    X, Y = g.mesh
    w = (X + 1j * Y) * 5  # linear core, no saturation
    u = VectorField2(g, zero_ring(np.stack([w.real, w.imag])))
    assert core_profile_match(u, Zero((0.0, 0.0), 1, 0.0), P, eta) > 0.2


def test_core_match_errors(eta):
    g = GridSpec(P.rho + 1.5, 128)
    u = VectorField2.zeros(g)
    with pytest.raises(ValueError, match="validity"):
        core_profile_fit(u, Zero((P.rho, 0.0), 1, 0.0), P, eta)
    with pytest.raises(ValueError):
        core_profile_fit(u, Zero((0.0, 0.0), 2, 0.0), P, eta)


# --- classification -----------------------------------------------------------------


def test_phase_labels():
    assert set(LABELS) == {"NoZero", "ShadowVortex", "StandardVortexOffCenter", "StandardVortexCenter"}
    with pytest.raises(ValueError):
        Phase("Vortex", {})


def test_classify_synthetic(eta):
    g = GridSpec(P.rho + 1.5, 385)
    assert classify([], VectorField2.zeros(g), P).label == "NoZero"
    u = synthetic_core(g, P, (0.0, 0.0), eta)
    ph = classify([Zero((0.0, 0.0), 1, 0.0)], u, P, eta)
    assert ph.label == "StandardVortexCenter" and not ph.ambiguous
    u = synthetic_core(g, P, (0.45, 0.0), eta)
    ph = classify([Zero((0.45, 0.0), 1, 0.0)], u, P, eta)
    assert ph.label == "StandardVortexOffCenter"
    # small-amplitude zero on the interface circle
    X, Y = g.mesh
    w = 0.05 * ((X + P.rho) + 1j * Y) * np.exp(-((X + P.rho) ** 2 + Y**2))
    u = VectorField2(g, zero_ring(np.stack([w.real, w.imag])))
    ph = classify([Zero((-P.rho, 0.0), 1, 0.0)], u, P, eta)
    assert ph.label == "ShadowVortex"


def test_classify_fallback_is_flagged(eta):
    g = GridSpec(P.rho + 1.5, 385)
    X, Y = g.mesh
    w = 5 * (X + 1j * Y)  # wrong core shape at the center
    u = VectorField2(g, zero_ring(np.stack([w.real, w.imag])))
    ph = classify([Zero((0.0, 0.0), 1, 0.0)], u, P, eta)
    assert ph.ambiguous and ph.label == "StandardVortexCenter"
    assert ph.evidence["note"] == "no rule fired"


def test_analyze_report_fields(eta):
    g = GridSpec(P.rho + 1.5, 385)
    u = synthetic_core(g, P, (0.0, 0.0), eta)
    rep = analyze(u, P)
    assert rep.phase.label == "StandardVortexCenter"
    assert len(rep.zeros) == 1 and rep.zeros[0].winding == 1
    assert rep.outer_dev is None
    txt = rep.to_text()
    assert "phase = StandardVortexCenter" in txt and "outer_dev = undefined at a=0" in txt
    row = rep.csv_fields()
    assert row["n_zeros"] == 1 and row["outer_dev"] == ""


def test_analyze_alignment_failure_reads_minus_one():
    g = GridSpec(P.rho + 1.5, 128)
    rep = analyze(VectorField2.zeros(g), P.with_a(1.0))
    assert rep.alignment_min == -1.0
    assert rep.phase.label == "NoZero"
