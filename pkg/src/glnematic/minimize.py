"""Seeded minimization of the discrete energy, truncation, multistart and the
energy-difference certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ._descent import STEP_RULES, QuarticFunctional, descend
from .fields import (
    GridSpec,
    ModelParams,
    VectorField2,
    el_residual,
    energy,
    model_arrays,
)

__all__ = [
    "Seed",
    "MinimizeOptions",
    "MinimizeResult",
    "seed_field",
    "truncate",
    "minimize",
    "minimize_from_seed",
    "multistart_global",
    "energy_difference_check",
    "default_seeds",
    "symmetrize",
    "gauge_fix",
    "equivariance_defect",
]

SEED_KINDS = ("thomas_fermi", "radial_scalar", "vortex", "random", "file", "equivariant", "field")


@dataclass(frozen=True)
class Seed:
    """Initial-guess recipe.

    ``equivariant`` (the 1D degree-one profile injected) and ``field`` (an
    explicit VectorField2, used for warm starts) extend the basic kinds.
    """

    kind: str = "thomas_fermi"
    center: tuple[float, float] = (0.0, 0.0)
    degree: int = 1
    rng_seed: int = 0
    path: str | None = None
    field: VectorField2 | None = None

    def __post_init__(self):
        if self.kind not in SEED_KINDS:
            raise ValueError(f"unknown seed kind {self.kind!r}")
        if self.kind == "vortex" and self.degree not in (-1, 1):
            raise ValueError("vortex degree must be -1 or +1")

    @classmethod
    def thomas_fermi(cls):
        return cls("thomas_fermi")

    @classmethod
    def radial_scalar(cls):
        return cls("radial_scalar")

    @classmethod
    def vortex(cls, center=(0.0, 0.0), degree=1):
        return cls("vortex", center=tuple(map(float, center)), degree=degree)

    @classmethod
    def random(cls, rng_seed=0):
        return cls("random", rng_seed=int(rng_seed))

    @classmethod
    def file(cls, path):
        return cls("file", path=str(path))

    @classmethod
    def equivariant(cls):
        return cls("equivariant")

    @classmethod
    def warm(cls, u: VectorField2):
        return cls("field", field=u)

    @property
    def label(self) -> str:
        if self.kind == "vortex":
            return f"vortex({self.center[0]:g},{self.center[1]:g};{self.degree:+d})"
        if self.kind == "random":
            return f"random({self.rng_seed})"
        if self.kind == "file":
            return f"file({self.path})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Seed":
        """Parse labels such as ``thomas_fermi``, ``vortex(0,0;+1)``, ``random(3)``, ``file(x.glnf)``."""
        text = text.strip()
        if "(" not in text:
            return cls(text)
        name, arg = text.split("(", 1)
        arg = arg.rstrip(")")
        if name == "random":
            return cls.random(int(arg))
        if name == "file":
            return cls.file(arg)
        if name == "vortex":
            pos, _, deg = arg.partition(";")
            cx, cy = (float(t) for t in pos.split(",")) if pos else (0.0, 0.0)
            return cls.vortex((cx, cy), int(deg) if deg else 1)
        raise ValueError(f"cannot parse seed {text!r}")


def default_seeds() -> list[Seed]:
    return [
        Seed.thomas_fermi(),
        Seed.vortex((0, 0), 1),
        Seed.vortex((0, 0), -1),
        Seed.radial_scalar(),
        Seed.random(1),
        Seed.random(2),
        Seed.random(3),
    ]


@dataclass
class MinimizeOptions:
    max_iters: int = 20000
    residual_tol: float = 1e-8
    step_rule: str = "nonlinear-CG"
    truncation_bound: float | None = None  # default 1.5 sup sqrt(mu+) + 1
    seed: Seed = field(default_factory=Seed.thomas_fermi)
    truncation_every: int = 50
    # None, "equivariant" (D4-equivariant subspace) or "scalar" (u2 = 0)
    symmetry: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.symmetry not in (None, "equivariant", "scalar"):
            raise ValueError(f"unknown symmetry mode {self.symmetry!r}")

    def bound(self, params: ModelParams) -> float:
        tf = math.sqrt(1.0 - params.chi)
        M = 1.5 * tf + 1.0 if self.truncation_bound is None else self.truncation_bound
        if M < tf:
            raise ValueError(f"truncation bound {M} is below sup sqrt(mu+) = {tf:.4f}")
        return M


@dataclass
class MinimizeResult:
    field: VectorField2
    energy: float
    residual_sup: float
    iters: int
    converged: bool
    energy_trace: list = field(default_factory=list, repr=False)
    seed_label: str = ""
    status: str = ""
    per_seed: list = field(default_factory=list)


def _tf(params, grid):
    mu, _ = model_arrays(params, grid)
    return np.sqrt(np.maximum(mu, 0.0))


def _ring_zero(d):
    d[..., 0, :] = d[..., -1, :] = 0.0
    d[..., :, 0] = d[..., :, -1] = 0.0
    return d


def _smooth_noise(rng, grid, coarse=9):
    """Smooth random function with sup norm 1, from a cubic fit of coarse noise."""
    nodes = np.linspace(-grid.half_width, grid.half_width, coarse)
    vals = rng.standard_normal((coarse, coarse))
    interp = RegularGridInterpolator((nodes + grid.center[0], nodes + grid.center[1]), vals, method="cubic")
    X, Y = grid.mesh
    out = interp(np.stack([X.ravel(), Y.ravel()], axis=-1)).reshape(X.shape)
    return out / np.max(np.abs(out))


def seed_field(kind: Seed, params: ModelParams, grid: GridSpec) -> VectorField2:
    """Boundary-zero initial field for the requested seed."""
    k = kind.kind
    tf = _tf(params, grid)
    if k == "thomas_fermi":
        data = np.stack([tf, np.zeros_like(tf)])
    elif k == "vortex":
        X, Y = grid.mesh
        th = kind.degree * np.arctan2(Y - kind.center[1], X - kind.center[0])
        data = np.stack([tf * np.cos(th), tf * np.sin(th)])
    elif k == "random":
        rng = np.random.default_rng(kind.rng_seed)
        phase0 = rng.uniform(0, 2 * np.pi)
        phase = phase0 + _smooth_noise(rng, grid)
        amp = tf * (1.0 + 0.3 * _smooth_noise(rng, grid))
        data = np.stack([amp * np.cos(phase), amp * np.sin(phase)])
    elif k in ("radial_scalar", "equivariant"):
        from .radial import inject, solve_equivariant_radial, solve_scalar_radial

        prof = solve_scalar_radial(params) if k == "radial_scalar" else solve_equivariant_radial(params)
        data = np.array(inject(prof, grid).data)
    elif k == "file":
        from .io import read_field

        u = read_field(kind.path)
        if not isinstance(u, VectorField2) or u.grid.n != grid.n or u.grid.half_width != grid.half_width:
            raise ValueError(f"seed file {kind.path} does not match grid (n={grid.n}, L={grid.half_width})")
        data = np.array(u.data)
    elif k == "field":
        if not kind.field.grid.same_as(grid):
            raise ValueError("warm-start field lives on a different grid")
        data = np.array(kind.field.data)
    else:  # pragma: no cover - guarded by Seed
        raise ValueError(k)
    return VectorField2(grid, _ring_zero(data))


def truncate(u: VectorField2, M: float) -> VectorField2:
    """Clamp each component to [-M, M]."""
    return VectorField2(u.grid, np.clip(u.data, -M, M))


def _rot90(A):
    # (T u)(x) = R u(R^{-1} x) with R the rotation by pi/2
    B = A[:, :, ::-1].transpose(0, 2, 1)
    return np.stack([-B[1], B[0]])


def _reflect(A):
    # (T u)(x) = S u(S x) with S(x, y) = (x, -y)
    B = A[:, :, ::-1]
    return np.stack([B[0], -B[1]])


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Average of a (2, n, n) array over the square's symmetry group acting on
    both positions and values.  Fixes exactly the equivariant fields."""
    acc = np.zeros_like(A)
    cur = A
    for _ in range(4):
        acc += cur + _reflect(cur)
        cur = _rot90(cur)
    return acc / 8.0


def equivariance_defect(u: VectorField2) -> float:
    """sup |T u - u| / sup |u| for the quarter-turn acting on positions and values."""
    A = np.asarray(u.data)
    diff = _rot90(A) - A
    return float(np.max(np.hypot(diff[0], diff[1])) / max(np.max(np.hypot(A[0], A[1])), 1e-300))


def gauge_fix(u: VectorField2) -> VectorField2:
    """Rotate values so that sum |u| u points along (1, 0)."""
    m = u.modulus()
    v1, v2 = float(np.sum(m * u.u1)), float(np.sum(m * u.u2))
    if v1 == 0 and v2 == 0:
        return u
    return u.rotate_values(-math.atan2(v2, v1))


def _functional(params, grid):
    mu, f = model_arrays(params, grid)
    eps = params.epsilon
    return QuarticFunctional(grid.h, -mu / eps**2, 1.0 / eps**2, (params.a / eps) * f, res_scale=eps**2)


def _check_centered(grid):
    if grid.center != (0.0, 0.0) and tuple(grid.center) != (0, 0):
        raise ValueError("symmetry-constrained minimization needs a centered grid")


def minimize(u0: VectorField2, params: ModelParams, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Preconditioned descent from u0 with periodic truncation.

    Nonconvergence is reported through ``converged=False``; the last iterate
    is returned.  At a = 0 the returned field is gauge-fixed.
    """
    opts = MinimizeOptions() if opts is None else opts
    u0.check_dirichlet()
    grid = u0.grid
    J = _functional(params, grid)
    project = None
    data = np.array(u0.data)
    if opts.symmetry == "equivariant":
        _check_centered(grid)
        project = symmetrize
        data = symmetrize(data)
    elif opts.symmetry == "scalar":

        def project(g):
            g = g.copy()
            g[1] = 0.0
            return g

        data[1] = 0.0
    out = descend(
        J,
        data,
        sigma=1.0 / params.epsilon**2,
        tol=opts.residual_tol,
        max_iters=opts.max_iters,
        step_rule=opts.step_rule,
        clamp=opts.bound(params),
        clamp_every=opts.truncation_every,
        project=project,
        workers=opts.workers,
    )
    u = VectorField2(grid, out.u)
    if params.a == 0 and opts.symmetry is None:
        u = gauge_fix(u)
    # residual of the full (unprojected) equation
    R = el_residual(u, params)
    res = float(np.max(R.modulus()))
    converged = res <= opts.residual_tol
    return MinimizeResult(
        field=u,
        energy=energy(u, params),
        residual_sup=res,
        iters=out.iters,
        converged=converged,
        energy_trace=out.energy_trace,
        seed_label=opts.seed.label,
        status="converged" if converged else out.status,
    )


def minimize_from_seed(params: ModelParams, grid: GridSpec, opts: MinimizeOptions | None = None) -> MinimizeResult:
    opts = MinimizeOptions() if opts is None else opts
    grid.check_fits(params)
    return minimize(seed_field(opts.seed, params, grid), params, opts)


def multistart_global(params: ModelParams, grid: GridSpec, opts: MinimizeOptions | None = None, seed_list=None) -> MinimizeResult:
    """Lowest-energy converged result over several seeds.

    ``per_seed`` on the returned result holds (label, energy, residual,
    converged) for every seed in input order.  Ties keep the earlier seed.
    """
    opts = MinimizeOptions() if opts is None else opts
    seed_list = default_seeds() if seed_list is None else list(seed_list)
    if not seed_list:
        raise ValueError("seed list is empty")
    best = None
    per_seed = []
    for s in seed_list:
        o = MinimizeOptions(**{**opts.__dict__, "seed": s})
        r = minimize_from_seed(params, grid, o)
        per_seed.append((s.label, r.energy, r.residual_sup, r.converged))
        if r.converged and (best is None or r.energy < best.energy):
            best = r
    if best is None:
        detail = "; ".join(f"{lab}: residual {res:.3e}" for lab, _, res, _ in per_seed)
        raise RuntimeError(f"no seed converged ({detail})")
    best.per_seed = per_seed
    return best


def energy_difference_check(u: VectorField2, psi: VectorField2, params: ModelParams) -> tuple[float, float]:
    """(E(u + psi) - E(u), quadrature of the exact difference integrand).

    The two agree up to the first-order term h^2 <R(u), psi> / eps^2, which
    vanishes at a critical point.
    """
    psi.check_dirichlet()
    if not psi.grid.same_as(u.grid):
        raise ValueError("u and psi must share a grid")
    eps = params.epsilon
    mu, _ = model_arrays(params, u.grid)
    U, P = np.asarray(u.data), np.asarray(psi.data)
    actual = energy(VectorField2(u.grid, U + P), params) - energy(u, params)
    px, py = np.diff(P, axis=1), np.diff(P, axis=2)
    grad = 0.5 * (np.sum(px * px) + np.sum(py * py))
    u2 = U[0] ** 2 + U[1] ** 2
    p2 = P[0] ** 2 + P[1] ** 2
    up = U[0] * P[0] + U[1] * P[1]
    pot = (u2 - mu) * p2 / (2 * eps**2) + (p2 + 2 * up) ** 2 / (4 * eps**2)
    predicted = float(grad + u.grid.h**2 * np.sum(pot))
    return float(actual), predicted
