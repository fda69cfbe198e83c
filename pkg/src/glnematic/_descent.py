"""Preconditioned descent for quartic lattice functionals.

Both the model energy and the strip Painleve functional have the form

    J(u) = 1/2 sum_edges |D u|^2 + h^2 sum_nodes [ q |u|^2 / 2 + p |u|^4 / 4 - F.u ]

for a two-component field u on a square grid with fixed boundary values.
Along a line u + t d the functional is an exact quartic polynomial in t, so
every step rule below evaluates its trial steps through that polynomial
instead of re-evaluating J.  Search directions are preconditioned by the
inverse of (sigma - Lap_h) on the interior, applied with a type-I sine
transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

STEP_RULES = ("nonlinear-CG", "adaptive-backtracking", "fixed")


@dataclass
class QuarticFunctional:
    h: float
    q: np.ndarray | float
    p: float
    F: np.ndarray | float
    # sup-norm residual reported to callers is res_scale * sup|g|
    res_scale: float = 1.0

    def energy(self, u) -> float:
        gx = np.diff(u, axis=1)
        gy = np.diff(u, axis=2)
        grad = 0.5 * (np.sum(gx * gx) + np.sum(gy * gy))
        m2 = u[0] * u[0] + u[1] * u[1]
        pot = 0.5 * self.q * m2 + 0.25 * self.p * m2 * m2
        if np.ndim(self.F):
            pot = pot - (self.F[0] * u[0] + self.F[1] * u[1])
        return float(grad + self.h**2 * np.sum(pot))

    def gradient(self, u) -> np.ndarray:
        """Gradient of J divided by h^2, restricted to interior nodes."""
        g = np.zeros_like(u)
        c = u[:, 1:-1, 1:-1]
        lap = (u[:, 2:, 1:-1] + u[:, :-2, 1:-1] + u[:, 1:-1, 2:] + u[:, 1:-1, :-2] - 4.0 * c) / self.h**2
        m2 = c[0] * c[0] + c[1] * c[1]
        q = self.q[1:-1, 1:-1] if np.ndim(self.q) else self.q
        g[:, 1:-1, 1:-1] = -lap + (q + self.p * m2) * c
        if np.ndim(self.F):
            g[:, 1:-1, 1:-1] -= self.F[:, 1:-1, 1:-1]
        return g

    def line_coeffs(self, u, g, d) -> tuple[float, float, float, float]:
        """Coefficients c1..c4 with J(u + t d) - J(u) = c1 t + c2 t^2 + c3 t^3 + c4 t^4."""
        h2 = self.h**2
        A = u[0] * u[0] + u[1] * u[1]
        B = u[0] * d[0] + u[1] * d[1]
        C = d[0] * d[0] + d[1] * d[1]
        dx = np.diff(d, axis=1)
        dy = np.diff(d, axis=2)
        c1 = h2 * float(np.sum(g * d))
        c2 = 0.5 * float(np.sum(dx * dx) + np.sum(dy * dy))
        c2 += h2 * float(np.sum(0.5 * self.q * C + 0.25 * self.p * (4.0 * B * B + 2.0 * A * C)))
        c3 = h2 * self.p * float(np.sum(B * C))
        c4 = h2 * 0.25 * self.p * float(np.sum(C * C))
        return c1, c2, c3, c4


class SinePreconditioner:
    """Applies (sigma - Lap_h)^{-1} with zero Dirichlet data on an n x n grid."""

    def __init__(self, n: int, h: float, sigma: float, workers: int | None = None):
        m = n - 2
        k = np.arange(1, m + 1)
        s = np.sin(np.pi * k / (2.0 * (m + 1))) ** 2
        lam = sigma + (4.0 / h**2) * (s[:, None] + s[None, :])
        self.inv = 1.0 / lam
        self.workers = workers

    def __call__(self, g):
        out = np.zeros_like(g)
        inner = g[:, 1:-1, 1:-1]
        t = sfft.dstn(inner, type=1, axes=(1, 2), norm="ortho", workers=self.workers)
        t *= self.inv
        out[:, 1:-1, 1:-1] = sfft.idstn(t, type=1, axes=(1, 2), norm="ortho", workers=self.workers)
        return out


def _supnorm(g) -> float:
    """Largest pointwise Euclidean length of a two-component array."""
    return float(np.sqrt(np.max(g[0] * g[0] + g[1] * g[1])))


def quartic_argmin(c1, c2, c3, c4) -> float:
    """Positive global minimizer of c1 t + c2 t^2 + c3 t^3 + c4 t^4 (c1 < 0, c4 >= 0)."""
    if c4 <= 0 and c3 == 0:
        return -c1 / (2 * c2) if c2 > 0 else 0.0
    roots = np.roots([4 * c4, 3 * c3, 2 * c2, c1])
    best_t, best_v = 0.0, 0.0
    for r in roots:
        if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)):
            continue
        t = r.real
        if t <= 0:
            continue
        v = ((c4 * t + c3) * t + c2) * t * t + c1 * t
        if v < best_v:
            best_t, best_v = t, v
    return best_t


def quartic_value(c, t):
    c1, c2, c3, c4 = c
    return (((c4 * t + c3) * t + c2) * t + c1) * t


@dataclass
class DescentOutcome:
    u: np.ndarray
    energy: float
    residual_sup: float
    iters: int
    converged: bool
    energy_trace: list = field(default_factory=list)
    status: str = ""


def descend(
    J: QuarticFunctional,
    u0: np.ndarray,
    *,
    sigma: float,
    tol: float,
    max_iters: int,
    step_rule: str = "nonlinear-CG",
    clamp: float | None = None,
    clamp_every: int = 50,
    project=None,
    fixed_step: float = 1.0,
    workers: int | None = None,
) -> DescentOutcome:
    """Minimize J from u0 keeping the boundary ring of u0 fixed.

    ``project`` (optional) is a linear map applied to every gradient; when it
    is an orthogonal projection onto a subspace invariant under J the
    iterates stay in that subspace.  ``clamp`` truncates each component to
    [-clamp, clamp] every ``clamp_every`` iterations.

    The energy trace is the initial energy followed by the exact decrease of
    every accepted step, so it is nonincreasing by construction.  The final
    energy is recomputed from the returned field.
    """
    if step_rule not in STEP_RULES:
        raise ValueError(f"unknown step rule {step_rule!r}; expected one of {STEP_RULES}")
    u = np.array(u0, dtype=float)
    n = u.shape[-1]
    P = SinePreconditioner(n, J.h, sigma, workers)

    def grad(v):
        g = J.gradient(v)
        return project(g) if project is not None else g

    E = J.energy(u)
    trace = [E]
    g = grad(u)
    z = P(g)
    d = None
    g_prev = z_prev = s_prev = None
    res = J.res_scale * _supnorm(g)
    it = 0
    status = "max_iters"
    step = fixed_step
    while True:
        if res <= tol:
            status = "converged"
            break
        if it >= max_iters:
            break
        it += 1

        if step_rule == "nonlinear-CG":
            if d is None:
                d = -z
            else:
                beta = max(0.0, float(np.sum(g * (z - z_prev))) / float(np.sum(g_prev * z_prev)))
                d = -z + beta * d
                if float(np.sum(g * d)) >= 0:
                    d = -z
        else:
            d = -z

        c = J.line_coeffs(u, g, d)
        if c[0] >= 0:
            # loss of descent from roundoff; restart along -z once
            d = -z
            c = J.line_coeffs(u, g, d)
            if c[0] >= 0:
                status = "stagnated"
                break

        if step_rule == "nonlinear-CG":
            t = quartic_argmin(*c)
        else:
            if step_rule == "adaptive-backtracking":
                if s_prev is not None:
                    y = g - g_prev
                    yPy = float(np.sum(y * (z - z_prev)))
                    sy = float(np.sum(s_prev * y))
                    t = sy / yPy if yPy > 0 and sy > 0 else 1.0
                else:
                    t = 1.0
            else:
                t = step
            # Armijo backtracking on the exact line polynomial
            for _ in range(60):
                if quartic_value(c, t) <= 1e-4 * c[0] * t:
                    break
                t *= 0.5
            if step_rule == "fixed":
                step = t
        dE = quartic_value(c, t)
        if not (t > 0 and dE < 0):
            status = "stagnated"
            break

        s_prev = t * d
        u += s_prev
        E = trace[-1] + dE
        trace.append(E)
        g_prev, z_prev = g, z
        g = grad(u)
        z = P(g)

        if clamp is not None and it % clamp_every == 0:
            v = np.clip(u, -clamp, clamp)
            if not np.array_equal(v, u):
                Ev = J.energy(v)
                if Ev <= J.energy(u):
                    u = v
                    trace.append(min(Ev, trace[-1]))
                    g = grad(u)
                    z = P(g)
                    d = None
        res = J.res_scale * _supnorm(g)

    return DescentOutcome(
        u=u,
        energy=J.energy(u),
        residual_sup=res,
        iters=it,
        converged=status == "converged",
        energy_trace=trace,
        status=status,
    )
