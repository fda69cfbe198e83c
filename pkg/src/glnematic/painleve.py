"""Second Painleve equation: 1D branches, 2D strip minimizers and
boundary-layer windows cut out of planar minimizers.

The 1D problem y'' = s y + 2 y^3 + alpha on [-S, S] is discretized with the
Numerov formula

    y_{i+1} - 2 y_i + y_{i-1} = h^2 (F_{i+1} + 10 F_i + F_{i-1}) / 12,   F = s y + 2 y^3 + alpha,

and solved by damped Newton.  Boundary values come from the algebraic outer
balance s y + 2 y^3 + alpha = 0 at s = -S (branch root) and s = S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from ._descent import QuarticFunctional, descend
from .fields import GridSpec, ModelParams, VectorField2, f_rad
from .radial import RadialGrid, RadialProfile, _newton_tridiag, NewtonDivergence

__all__ = [
    "PainleveSpec",
    "LayerWindow",
    "solve_p2",
    "p2_residual",
    "physical_alpha",
    "extract_layer",
    "minimize_p2_strip",
    "p2_energy",
    "p2_strip_residual",
]


@dataclass(frozen=True)
class PainleveSpec:
    alpha: float = 0.0
    branch: str = "plus"
    S: float = 10.0
    m: int = 2001

    def __post_init__(self):
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        if self.S < 8:
            raise ValueError("S must be at least 8")
        if self.m < 400:
            raise ValueError("need at least 400 nodes")


def _cubic_root_near(c1, c0, target):
    """Real root of y^3 + c1 y + c0 = 0 closest to ``target``."""
    roots = np.roots([1.0, 0.0, c1, c0])
    real = roots[np.abs(roots.imag) < 1e-10 * max(1.0, float(np.max(np.abs(roots))))].real
    return float(real[np.argmin(np.abs(real - target))])


def boundary_values(spec: PainleveSpec) -> tuple[float, float]:
    S, al = spec.S, spec.alpha
    sign = 1.0 if spec.branch == "plus" else -1.0
    left = _cubic_root_near(-S / 2, al / 2, sign * math.sqrt(S / 2))
    right = _cubic_root_near(S / 2, al / 2, -al / S)
    return left, right


def _numerov_parts(s, h, alpha):
    def F(y):
        return s * y + 2 * y**3 + alpha

    def dF(y):
        return s + 6 * y * y

    def residual(y, left, right):
        Fy = F(y)
        R = np.empty_like(y)
        R[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2 - (Fy[2:] + 10 * Fy[1:-1] + Fy[:-2]) / 12
        R[0] = y[0] - left
        R[-1] = y[-1] - right
        return R

    def jacobian(y):
        d = dF(y)
        m = y.size
        ab = np.zeros((3, m))
        ab[1, 1:-1] = -2 / h**2 - 10 * d[1:-1] / 12
        ab[0, 2:] = 1 / h**2 - d[2:] / 12
        ab[2, :-2] = 1 / h**2 - d[:-2] / 12
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 1] = 0.0
        ab[2, -2] = 0.0
        return ab

    return residual, jacobian


def p2_residual(profile: RadialProfile, alpha: float) -> float:
    """Sup of the Numerov residual (divided by h^2) over interior nodes."""
    s = profile.grid.r
    res, _ = _numerov_parts(s, profile.grid.dr, alpha)
    y = profile.values
    return float(np.max(np.abs(res(y, y[0], y[-1])[1:-1])))


def _guess(s, branch, alpha):
    g = np.sqrt((-s + np.sqrt(s * s + 4.0)) / 4.0)
    if branch == "plus":
        return g
    # negative on the left, relaxing to the outer balance -alpha/s on the right
    tail = -alpha * s / (s * s + 1.0)
    return -g * 0.5 * (1 - np.tanh(s)) + tail


def solve_p2(spec: PainleveSpec, tol: float = 1e-10) -> RadialProfile:
    """Minimal branch y+ or y- of y'' - s y - 2 y^3 - alpha = 0 on [-S, S]."""
    grid = RadialGrid(spec.S, spec.m, r_min=-spec.S)
    s, h = grid.r, grid.dr
    left, right = boundary_values(spec)
    floor = 64 * np.finfo(float).eps * 4 / h**2 * max(1.0, abs(left))
    tol = max(tol, floor)

    def run(alpha, y0, lv, rv):
        res, jac = _numerov_parts(s, h, alpha)
        y0 = np.array(y0, dtype=float)
        y0[0], y0[-1] = lv, rv
        return _newton_tridiag(lambda y: res(y, lv, rv), jac, y0, tol)

    try:
        y, norm, its = run(spec.alpha, _guess(s, spec.branch, spec.alpha), left, right)
    except NewtonDivergence:
        # continuation in alpha from the symmetric alpha = 0 branch
        y = _guess(s, spec.branch, 0.0)
        for frac in np.linspace(0.0, 1.0, 21):
            sub = PainleveSpec(spec.alpha * frac, spec.branch, spec.S, spec.m)
            lv, rv = boundary_values(sub)
            y, norm, its = run(sub.alpha, y, lv, rv)
    return RadialProfile(
        grid,
        y,
        "painleve",
        {"left": left, "right": right, "alpha": spec.alpha, "branch": spec.branch},
        norm,
        its,
    )


def physical_alpha(params: ModelParams) -> float:
    """alpha = a f_rad(rho) / (sqrt(2) mu1), the forcing seen by the interface layer."""
    return params.a * float(f_rad(params.rho)) / (math.sqrt(2) * params.mu1)


@dataclass(frozen=True, eq=False)
class LayerWindow:
    theta: float
    s1: np.ndarray
    s2: np.ndarray
    samples: np.ndarray  # shape (len(s1), len(s2), 2)

    @property
    def s1_range(self):
        return float(self.s1[0]), float(self.s1[-1])

    @property
    def s2_range(self):
        return float(self.s2[0]), float(self.s2[-1])

    def along_s1(self, component: int = 0) -> np.ndarray:
        """Samples on the line s2 = 0 (nearest s2 node)."""
        j = int(np.argmin(np.abs(self.s2)))
        return self.samples[:, j, component]


def extract_layer(u: VectorField2, params: ModelParams, theta: float, window=((-2.0, 2.0, 81), (0.0, 0.0, 1))) -> LayerWindow:
    """Rescaled field 2^{-1/2} (-mu1 eps)^{-1/3} v(xi + eps^{2/3} s / (-mu1)^{1/3}).

    ``window`` is ((s1_min, s1_max, n1), (s2_min, s2_max, n2)).  Components
    are expressed in the frame (e^{i theta}, i e^{i theta}).
    """
    (a1, b1, n1), (a2, b2, n2) = window
    s1 = np.linspace(a1, b1, int(n1))
    s2 = np.linspace(a2, b2, int(n2))
    eps, mu1, rho = params.epsilon, params.mu1, params.rho
    scale = eps ** (2 / 3) / (-mu1) ** (1 / 3)
    e = np.array([math.cos(theta), math.sin(theta)])
    ie = np.array([-math.sin(theta), math.cos(theta)])
    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    X = rho * e[0] + scale * (S1 * e[0] + S2 * ie[0])
    Y = rho * e[1] + scale * (S1 * e[1] + S2 * ie[1])
    g = u.grid
    lo_x, hi_x, lo_y, hi_y = g.x[0], g.x[-1], g.y[0], g.y[-1]
    for cx, cy in ((s1[0], s2[0]), (s1[0], s2[-1]), (s1[-1], s2[0]), (s1[-1], s2[-1])):
        px = rho * e[0] + scale * (cx * e[0] + cy * ie[0])
        py = rho * e[1] + scale * (cx * e[1] + cy * ie[1])
        if not (lo_x <= px <= hi_x and lo_y <= py <= hi_y):
            raise ValueError(f"window corner s=({cx:g}, {cy:g}) maps to ({px:.4f}, {py:.4f}) outside the grid")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    v1 = RegularGridInterpolator((g.x, g.y), u.u1)(pts).reshape(X.shape)
    v2 = RegularGridInterpolator((g.x, g.y), u.u2)(pts).reshape(X.shape)
    amp = 2 ** -0.5 * (-mu1 * eps) ** (-1 / 3)
    w1 = amp * (v1 * e[0] + v2 * e[1])
    w2 = amp * (v1 * ie[0] + v2 * ie[1])
    return LayerWindow(theta, s1, s2, np.stack([w1, w2], axis=-1))


def _strip_functional(grid: GridSpec, alpha: float) -> QuarticFunctional:
    S1, _ = grid.mesh
    F = np.zeros((2, grid.n, grid.n))
    F[0] = -alpha
    return QuarticFunctional(grid.h, np.array(S1), 2.0, F)


def p2_energy(y: VectorField2, alpha: float) -> float:
    """Grid version of int 1/2 |grad y|^2 + 1/2 s1 |y|^2 + 1/2 |y|^4 + alpha.y (alpha along s1)."""
    return _strip_functional(y.grid, alpha).energy(np.asarray(y.data))


def p2_strip_residual(y: VectorField2, alpha: float) -> float:
    """Sup over interior nodes of |Lap y - s1 y - 2|y|^2 y - alpha|."""
    g = _strip_functional(y.grid, alpha).gradient(np.asarray(y.data))
    return float(np.max(np.abs(g)))


def minimize_p2_strip(
    alpha: float,
    rect=((-4.0, 4.0), (-4.0, 4.0)),
    bc: str = "from_1d",
    n: int = 161,
    custom: VectorField2 | None = None,
    seed: VectorField2 | None = None,
    tol: float = 1e-8,
    max_iters: int = 20000,
    branch: str = "plus",
) -> VectorField2:
    """Minimize the grid Painleve functional on a square with Dirichlet data.

    bc="from_1d" uses the 1D branch extended constantly in s2 (first
    component, second component zero); bc="custom" takes the boundary ring
    from ``custom``.  The interior is seeded with the same data unless
    ``seed`` is given.
    """
    (a1, b1), (a2, b2) = rect
    if not math.isclose(b1 - a1, b2 - a2, rel_tol=1e-12):
        raise ValueError("strip rectangle must be square on this grid type")
    half = 0.5 * (b1 - a1)
    grid = GridSpec(half, n, center=(0.5 * (a1 + b1), 0.5 * (a2 + b2)))
    if bc == "from_1d":
        S = max(10.0, abs(a1) + 2, abs(b1) + 2)
        prof = solve_p2(PainleveSpec(alpha, branch, S, max(2001, int(200 * S) + 1)))
        # cubic interpolation keeps the boundary data at the 1D solver's accuracy
        col = CubicSpline(prof.grid.r, prof.values)(grid.x)
        base = np.zeros((2, n, n))
        base[0] = col[:, None]
    elif bc == "custom":
        if custom is None or not custom.grid.same_as(grid):
            raise ValueError("custom boundary data must live on the strip grid")
        base = np.array(custom.data)
    else:
        raise ValueError(f"unknown bc {bc!r}")
    u0 = np.array(seed.data) if seed is not None else base.copy()
    u0[:, 0, :], u0[:, -1, :] = base[:, 0, :], base[:, -1, :]
    u0[:, :, 0], u0[:, :, -1] = base[:, :, 0], base[:, :, -1]
    J = _strip_functional(grid, alpha)
    sigma = max(1.0, float(np.max(np.abs(grid.x))))
    out = descend(J, u0, sigma=sigma, tol=tol, max_iters=max_iters)
    if not out.converged:
        raise RuntimeError(
            f"strip minimization did not converge: residual {out.residual_sup:.3e} after {out.iters} iterations"
        )
    return VectorField2(grid, out.u)
