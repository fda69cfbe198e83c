"""Independent reference computations used by the tests.

None of these reuse the package's solvers: they rely on adaptive ODE
integration, adaptive quadrature or closed forms.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import airy


def hastings_mcleod_shooting(s_start=6.0, s_end=-6.0, k_lo=0.9, k_hi=1.1, iters=60):
    """Bisection on k for y ~ k Ai(s) at s_start, integrating y'' = s y + 2 y^3 downward.

    Too large k blows up positively, too small k crosses zero.  Returns
    (k, y(0)) for the separating solution.
    """

    def shoot(k):
        ai, aip, _, _ = airy(s_start)

        def rhs(s, z):
            return [z[1], s * z[0] + 2 * z[0] ** 3]

        def blow(s, z):
            return z[0] - 5.0

        def cross(s, z):
            return z[0]

        blow.terminal = cross.terminal = True
        sol = solve_ivp(rhs, (s_start, s_end), [k * ai, k * aip], method="DOP853",
                        rtol=1e-13, atol=1e-16, events=(blow, cross), dense_output=True)
        if sol.t_events[0].size:
            return +1, sol
        if sol.t_events[1].size:
            return -1, sol
        # undecided: compare with the algebraic branch at s_end
        return (1 if sol.y[0, -1] ** 2 > -s_end / 2 else -1), sol

    lo, hi = k_lo, k_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        side, _ = shoot(mid)
        if side > 0:
            hi = mid
        else:
            lo = mid
    k = 0.5 * (lo + hi)
    _, sol = shoot(lo)
    return k, float(sol.sol(0.0)[0])


def gl_vortex_slope_shooting(r0=1e-4, r_end=12.0, k_lo=0.5, k_hi=0.7, iters=60):
    """Bisection on k for eta ~ k r (1 - r^2/8) near 0 in
    eta'' + eta'/r - eta/r^2 + (1 - eta^2) eta = 0.

    Too large k overshoots 1, too small k turns back down.
    """

    def shoot(k):
        def rhs(r, z):
            return [z[1], -z[1] / r + z[0] / r**2 - (1 - z[0] ** 2) * z[0]]

        def over(r, z):
            return z[0] - 1.0

        def turn(r, z):
            return z[1]

        over.terminal = turn.terminal = True
        z0 = [k * r0 * (1 - r0**2 / 8), k * (1 - 3 * r0**2 / 8)]
        sol = solve_ivp(rhs, (r0, r_end), z0, method="DOP853", rtol=1e-13, atol=1e-15, events=(over, turn))
        if sol.t_events[0].size:
            return +1
        if sol.t_events[1].size:
            return -1
        return 1 if sol.y[0, -1] > 1 - 1 / (2 * r_end**2) else -1

    lo, hi = k_lo, k_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if shoot(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def comparison_map_constant(eps, chi=0.5):
    """Continuum renormalized energy of the capped comparison map minus its
    logarithmic leading term, from adaptive quadrature of its three pieces."""
    rho = math.sqrt(math.log(1 / chi))
    mu1 = -2 * rho * chi
    w = eps ** (2 / 3)

    def mu(r):
        return math.exp(-r * r) - chi

    def dmu(r):
        return -2 * r * math.exp(-r * r)

    slope2 = mu(rho - w) / w**2  # (k eps^{-1/3})^2
    collar_pot = quad(lambda r: (slope2 * (rho - r) ** 2 - mu(r)) ** 2 / (4 * eps**2) * r,
                      rho - w, rho, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    collar_grad = quad(lambda r: 0.5 * slope2 * r, rho - w, rho, epsabs=1e-13, epsrel=1e-12)[0]
    inner = quad(lambda r: 0.5 * dmu(r) ** 2 / (4 * mu(r)) * r, 0.0, rho - w,
                 epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    total = 2 * math.pi * (collar_pot + collar_grad + inner)
    lead = math.pi * abs(mu1) * rho / 6 * abs(math.log(eps))
    return total - lead, total


def fd_directional(fun, u, psi, t):
    """Central difference (fun(u + t psi) - fun(u - t psi)) / (2 t)."""
    return (fun(u + t * psi) - fun(u - t * psi)) / (2 * t)


def fd_forward(fun, u, psi, t):
    return (fun(u + t * psi) - fun(u)) / t


def degree_field(X, Y, kind, center=(0.0, 0.0), angle=0.0):
    """Synthetic fields with known degree around ``center``.

    kind: 'id' (+1), 'conj' (-1), 'const' (0), 'double' (+2).
    """
    x, y = X - center[0], Y - center[1]
    z = x + 1j * y
    if kind == "id":
        w = z
    elif kind == "conj":
        w = np.conj(z)
    elif kind == "const":
        w = np.ones_like(z)
    elif kind == "double":
        w = z * z
    else:
        raise ValueError(kind)
    w = w * np.exp(1j * angle)
    return np.stack([w.real, w.imag])


def random_degree_case(rng, X, Y, half_width):
    """Random rigid image of x/|x|, its conjugate or a constant.

    The domain map is x -> Q (x - c) with Q a rotation or reflection and c a
    random translation; the values are then rotated or reflected.  The
    degree about c is base * det(Q) * det(value map).  Returns
    (data, center, loop radius, expected degree).
    """
    kind = rng.choice(["id", "conj", "const"])
    base = {"id": 1, "conj": -1, "const": 0}[kind]
    c = rng.uniform(-0.3 * half_width, 0.3 * half_width, 2)
    th = rng.uniform(0, 2 * np.pi)
    Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    if rng.random() < 0.5:
        Q = Q @ np.diag([1.0, -1.0])
    phi = rng.uniform(0, 2 * np.pi)
    G = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    if rng.random() < 0.5:
        G = G @ np.diag([1.0, -1.0])
    x = Q[0, 0] * (X - c[0]) + Q[0, 1] * (Y - c[1])
    y = Q[1, 0] * (X - c[0]) + Q[1, 1] * (Y - c[1])
    w = degree_field(x, y, kind)
    r = np.hypot(x, y)
    if kind != "const":
        w = w / np.maximum(r, 1e-12)
    data = np.einsum("ab,bij->aij", G, w)
    expected = base * int(round(np.linalg.det(Q))) * int(round(np.linalg.det(G)))
    radius = rng.uniform(0.1, 0.5) * half_width
    return data, (float(c[0]), float(c[1])), float(radius), expected
