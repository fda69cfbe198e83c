"""One-dimensional reductions: scalar radial profile, equivariant degree-one
profile, and the standard Ginzburg-Landau vortex profile.

All three are two-point boundary value problems of the form

    D (y'' + y'/r - k y / r^2) + N(r, y) = 0

with k = 0 (scalar) or k = 1 (degree one).  They are discretized with
second-order central differences and solved with damped Newton iterations on
the tridiagonal Jacobian.  At the axis the scalar kind uses the even ghost
node (y'' + y'/r -> 4 (y_1 - y_0) / dr^2) and the odd kinds impose y(0) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .fields import GridSpec, ModelParams, VectorField2, f_rad, mu_rad

__all__ = [
    "RadialGrid",
    "RadialProfile",
    "NewtonDivergence",
    "solve_scalar_radial",
    "solve_equivariant_radial",
    "solve_gl_vortex",
    "radial_energy",
    "inject",
    "default_model_grid",
]

KINDS = ("scalar", "equivariant", "gl_vortex", "painleve")


class NewtonDivergence(RuntimeError):
    """Raised when damped Newton cannot reduce the residual; carries the trace."""

    def __init__(self, msg, trace):
        super().__init__(f"{msg}; residual trace: {', '.join(f'{t:.3e}' for t in trace)}")
        self.trace = list(trace)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform 1D grid of ``m`` nodes on [r_min, r_max] (r_min = 0 for radial kinds)."""

    r_max: float
    m: int
    r_min: float = 0.0

    def __post_init__(self):
        if self.m < 3 or not self.r_max > self.r_min:
            raise ValueError("radial grid needs m >= 3 and r_max > r_min")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.m - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.m)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray
    kind: str
    bc: dict = field(default_factory=dict)
    residual: float = float("nan")
    newton_iters: int = 0
    params: ModelParams | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.m,) or not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite with one value per node")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        """Linear interpolation; zero-extended past the grid for radial kinds."""
        r = np.asarray(r, dtype=float)
        right = self.values[-1] if self.kind == "painleve" else 0.0
        return np.interp(r, self.grid.r, self.values, right=right)

    def slope_at_origin(self) -> float:
        """One-sided second-order estimate of y'(r_min)."""
        y, dr = self.values, self.grid.dr
        return (-3 * y[0] + 4 * y[1] - y[2]) / (2 * dr)


def default_model_grid(params: ModelParams, r_max: float | None = None, m: int | None = None) -> RadialGrid:
    """rho + 3 by default, with dr <= eps / 40."""
    r_max = params.rho + 3.0 if r_max is None else r_max
    if m is None:
        m = int(math.ceil(40 * r_max / params.epsilon)) + 1
    return RadialGrid(r_max, m)


def _newton_tridiag(residual, jacobian, y, tol, max_iter=100, max_halvings=30):
    """Damped Newton for a tridiagonal system; halves the step until the residual drops."""
    F = residual(y)
    norm = float(np.max(np.abs(F)))
    trace = [norm]
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NewtonDivergence(f"no convergence in {max_iter} Newton steps", trace)
        it += 1
        try:
            step = solve_banded((1, 1), jacobian(y), -F)
        except np.linalg.LinAlgError:
            raise NewtonDivergence("singular Jacobian", trace) from None
        lam = 1.0
        for _ in range(max_halvings + 1):
            y_try = y + lam * step
            F_try = residual(y_try)
            n_try = float(np.max(np.abs(F_try)))
            if np.isfinite(n_try) and n_try < norm:
                break
            lam *= 0.5
        else:
            raise NewtonDivergence("damped Newton step failed to reduce residual", trace)
        y, F, norm = y_try, F_try, n_try
        trace.append(norm)
    return y, norm, it


def _solve_axisym(grid, D, k, N, dN, guess, right_value, tol):
    """Solve D (y'' + y'/r - k y/r^2) + N(r, y) = 0 with axis and Dirichlet data."""
    r = grid.r
    dr = grid.dr
    m = grid.m
    ri = r[1:-1]
    lo = 1.0 / dr**2 - 1.0 / (2 * ri * dr)
    hi = 1.0 / dr**2 + 1.0 / (2 * ri * dr)
    di = -2.0 / dr**2 - k / ri**2

    # roundoff floor for the residual: cannot resolve below a few ulps of D y / dr^2
    def floor(y):
        return 64 * np.finfo(float).eps * D * 4 / dr**2 * max(1.0, float(np.max(np.abs(y))))

    def residual(y):
        F = np.empty(m)
        F[1:-1] = D * (lo * y[:-2] + di * y[1:-1] + hi * y[2:]) + N(ri, y[1:-1])
        if k == 0:
            F[0] = D * 4.0 * (y[1] - y[0]) / dr**2 + N(r[:1], y[:1])[0]
        else:
            F[0] = y[0]
        F[-1] = y[-1] - right_value
        return F

    def jacobian(y):
        ab = np.zeros((3, m))
        # ab[0, j] = J[j-1, j], ab[1, j] = J[j, j], ab[2, j] = J[j+1, j]
        ab[1, 1:-1] = D * di + dN(ri, y[1:-1])
        ab[0, 2:] = D * hi
        ab[2, :-2] = D * lo
        if k == 0:
            ab[1, 0] = -4.0 * D / dr**2 + dN(r[:1], y[:1])[0]
            ab[0, 1] = 4.0 * D / dr**2
        else:
            ab[1, 0] = 1.0
            ab[0, 1] = 0.0
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
        return ab

    y = np.array(guess, dtype=float)
    y[-1] = right_value
    if k:
        y[0] = 0.0
    eff_tol = max(tol, floor(y))
    y, res, its = _newton_tridiag(residual, jacobian, y, eff_tol)
    return y, res, its


def _smooth_tf(r, params, pad=1.0):
    """Positive smoothing of sqrt(mu+) across the interface (Newton initial guess)."""
    mu = mu_rad(r, params.chi)
    c = (pad * params.epsilon ** (2 / 3)) ** 2
    return np.sqrt(0.5 * (mu + np.sqrt(mu * mu + c)))


def solve_scalar_radial(params: ModelParams, grid: RadialGrid | None = None, tol: float = 1e-10) -> RadialProfile:
    """Positive solution of eps^2 (y'' + y'/r) + mu y - y^3 = 0, y'(0) = 0, y(r_max) = 0.

    ``params.a`` is ignored; this is the a = 0 reduction.
    """
    grid = default_model_grid(params) if grid is None else grid
    eps2 = params.epsilon**2
    chi = params.chi

    def N(r, y):
        return (mu_rad(r, chi) - y * y) * y

    def dN(r, y):
        return mu_rad(r, chi) - 3 * y * y

    guess = _smooth_tf(grid.r, params)
    y, res, its = _solve_axisym(grid, eps2, 0, N, dN, guess, 0.0, tol)
    return RadialProfile(
        grid, y, "scalar", {"axis": "even", "right": 0.0}, res, its, params.with_a(0.0)
    )


def equivariant_outer_value(params: ModelParams, r_max: float) -> float:
    mu = float(mu_rad(r_max, params.chi))
    return -params.epsilon * params.a * float(f_rad(r_max)) / mu


def solve_equivariant_radial(params: ModelParams, grid: RadialGrid | None = None, tol: float = 1e-10) -> RadialProfile:
    """eps^2 (y'' + y'/r - y/r^2) + mu y - y^3 + eps a f_rad = 0, y(0) = 0.

    The outer value is the limit -eps a f_rad / mu_rad at r_max.
    """
    grid = default_model_grid(params) if grid is None else grid
    eps, a, chi = params.epsilon, params.a, params.chi
    right = equivariant_outer_value(params, grid.r_max)

    def N(r, y):
        return (mu_rad(r, chi) - y * y) * y + eps * a * f_rad(r)

    def dN(r, y):
        return mu_rad(r, chi) - 3 * y * y

    r = grid.r
    core = np.tanh(r / (math.sqrt(2) * eps))
    outer = np.where(
        mu_rad(r, chi) < 0, -eps * a * f_rad(r) / np.minimum(mu_rad(r, chi), -1e-3), 0.0
    )
    guess = np.maximum(_smooth_tf(r, params) * core, outer)
    try:
        y, res, its = _solve_axisym(grid, eps**2, 1, N, dN, guess, right, tol)
    except NewtonDivergence:
        # continuation in a from the unforced hedgehog
        y = guess
        for frac in np.linspace(0.0, 1.0, 11):
            sub = params.with_a(a * frac)
            y, res, its = _solve_axisym(
                grid,
                eps**2,
                1,
                lambda r_, y_, s=sub: (mu_rad(r_, chi) - y_ * y_) * y_ + eps * s.a * f_rad(r_),
                dN,
                y,
                equivariant_outer_value(sub, grid.r_max),
                tol,
            )
    return RadialProfile(
        grid, y, "equivariant", {"axis": "odd", "right": right}, res, its, params
    )


def solve_gl_vortex(grid: RadialGrid | None = None, tol: float = 1e-10) -> RadialProfile:
    """eta'' + eta'/r - eta/r^2 + (1 - eta^2) eta = 0, eta(0) = 0, eta(r_max) = 1 - 1/(2 r_max^2)."""
    grid = RadialGrid(20.0, 40001) if grid is None else grid
    if grid.r_max < 20:
        raise ValueError("the vortex profile needs r_max >= 20")
    right = 1.0 - 1.0 / (2 * grid.r_max**2)

    def N(r, y):
        return (1 - y * y) * y

    def dN(r, y):
        return 1 - 3 * y * y

    guess = np.tanh(grid.r / math.sqrt(2))
    y, res, its = _solve_axisym(grid, 1.0, 1, N, dN, guess, right, tol)
    return RadialProfile(grid, y, "gl_vortex", {"axis": "odd", "right": right}, res, its)


def radial_energy(profile: RadialProfile, params: ModelParams | None = None) -> float:
    """Energy of the induced planar field, by midpoint quadrature in r.

    Scalar kind: (y(r), 0); its forcing term integrates to zero over angles.
    Equivariant kind: y(r) x/|x|.
    """
    if profile.kind not in ("scalar", "equivariant"):
        raise ValueError("radial_energy applies to model profiles only")
    params = profile.params if params is None else params
    r = profile.grid.r
    y = profile.values
    dr = profile.grid.dr
    rm = 0.5 * (r[1:] + r[:-1])
    ym = 0.5 * (y[1:] + y[:-1])
    yp = np.diff(y) / dr
    eps, chi = params.epsilon, params.chi
    k = 1.0 if profile.kind == "equivariant" else 0.0
    dens = 0.5 * (yp * yp + k * ym * ym / (rm * rm)) - mu_rad(rm, chi) * ym * ym / (2 * eps**2) + ym**4 / (4 * eps**2)
    if k:
        dens = dens - (params.a / eps) * f_rad(rm) * ym
    return float(2 * np.pi * np.sum(dens * rm) * dr)


def inject(profile: RadialProfile, grid: GridSpec) -> VectorField2:
    """Sample a radial profile on a planar grid (boundary ring set to zero)."""
    X, Y = grid.mesh
    R = np.hypot(X, Y)
    v = profile(R)
    if profile.kind == "scalar":
        data = np.stack([v, np.zeros_like(v)])
    elif profile.kind in ("equivariant", "gl_vortex"):
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(R > 0, X / R, 0.0)
            s = np.where(R > 0, Y / R, 0.0)
        data = np.stack([v * c, v * s])
    else:
        raise ValueError("cannot inject a Painleve profile on a planar grid")
    data[:, 0, :] = data[:, -1, :] = 0.0
    data[:, :, 0] = data[:, :, -1] = 0.0
    return VectorField2(grid, data)
