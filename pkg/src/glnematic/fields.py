"""Model data, discrete energy and Euler-Lagrange residual.

The continuous energy is

    E(u) = int 1/2 |grad u|^2 - mu |u|^2 / (2 eps^2) + |u|^4 / (4 eps^2) - (a/eps) f.u

with mu(x) = exp(-|x|^2) - chi and f = -grad(mu)/2 = x exp(-|x|^2).  It is
discretized on the square [-L, L]^2 with homogeneous Dirichlet data: the
gradient term is a sum over grid edges of forward differences, every other
term uses the nodal weight h^2.  With this choice the exact gradient of the
discrete energy is -h^2/eps^2 times the 5-point residual returned by
:func:`el_residual`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "ModelParams",
    "GridSpec",
    "ScalarField",
    "VectorField2",
    "mu_eval",
    "f_eval",
    "mu_rad",
    "f_rad",
    "laplacian",
    "energy",
    "el_residual",
    "renormalized_energy",
    "renormalization_term",
    "cutoff_test_map",
    "capped_comparison_map",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters (epsilon, a, chi) and the derived interface data."""

    epsilon: float
    a: float = 0.0
    chi: float = 0.5

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise ValueError(f"a must be nonnegative, got {self.a}")
        if not 0 < self.chi < 1:
            raise ValueError(f"chi must lie in (0, 1), got {self.chi}")

    @property
    def rho(self) -> float:
        """Radius of the circle where mu changes sign."""
        return math.sqrt(math.log(1.0 / self.chi))

    @property
    def mu1(self) -> float:
        """Radial slope of mu at rho (negative)."""
        return -2.0 * self.rho * self.chi

    def with_a(self, a: float) -> "ModelParams":
        return ModelParams(self.epsilon, a, self.chi)


def mu_rad(r, chi):
    r = np.asarray(r, dtype=float)
    return np.exp(-r * r) - chi


def f_rad(r):
    r = np.asarray(r, dtype=float)
    return r * np.exp(-r * r)


def mu_eval(params: ModelParams, x) -> float | np.ndarray:
    """mu at a point (or an array of points with last axis of length 2)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return np.exp(-r2) - params.chi


def f_eval(params: ModelParams, x) -> np.ndarray:
    """f = x exp(-|x|^2); independent of chi."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return x * np.exp(-r2)[..., None]


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n grid on [-L, L]^2 (shifted by ``center`` if given).

    Arrays on the grid are indexed ``[i, j]`` with ``i`` along x and ``j``
    along y.
    """

    half_width: float
    n: int
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16:
            raise ValueError(f"grid needs n >= 16 points per side, got {self.n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return self.center[0] + np.linspace(-self.half_width, self.half_width, self.n)

    @cached_property
    def y(self) -> np.ndarray:
        return self.center[1] + np.linspace(-self.half_width, self.half_width, self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def radius(self) -> np.ndarray:
        X, Y = self.mesh
        r = np.hypot(X, Y)
        r.flags.writeable = False
        return r

    def check_fits(self, params: ModelParams):
        if not self.half_width > params.rho + 1.0:
            raise ValueError(
                f"domain half-width {self.half_width} must exceed rho + 1 = {params.rho + 1:.4f}"
            )

    @staticmethod
    def for_epsilon(params: ModelParams, half_width: float | None = None, h_factor: float = 1 / 3):
        """Smallest grid with h <= h_factor * epsilon and FFT-friendly n - 1.

        The default half-width is rho + 3.
        """
        L = params.rho + 3.0 if half_width is None else half_width
        cells = math.ceil(2 * L / (h_factor * params.epsilon))
        return GridSpec(L, _smooth_size(max(cells, 15)) + 1)

    def same_as(self, other: "GridSpec") -> bool:
        return (
            self.n == other.n
            and self.half_width == other.half_width
            and tuple(self.center) == tuple(other.center)
        )


def _smooth_size(m: int) -> int:
    """Smallest integer >= m whose prime factors are 2, 3 and 5."""
    while True:
        k = m
        for p in (2, 3, 5):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 1


def _check_finite(arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite field")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n, self.grid.n)}, got {v.shape}")
        _check_finite(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class VectorField2:
    """Two-component field sampled on a grid; ``data`` has shape (2, n, n).

    Values are copied and frozen on construction.  Fields entering the model
    energy must vanish on the boundary ring (see :meth:`check_dirichlet`).
    """

    grid: GridSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.data, dtype=float)
        if d.shape != (2, self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(2, self.grid.n, self.grid.n)}, got {d.shape}")
        _check_finite(d)
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @classmethod
    def from_components(cls, grid, u1, u2):
        return cls(grid, np.stack([u1, u2]))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((2, grid.n, grid.n)))

    @property
    def u1(self) -> np.ndarray:
        return self.data[0]

    @property
    def u2(self) -> np.ndarray:
        return self.data[1]

    def modulus(self) -> np.ndarray:
        return np.hypot(self.data[0], self.data[1])

    def check_dirichlet(self):
        d = self.data
        if (np.any(d[:, 0, :]) or np.any(d[:, -1, :]) or np.any(d[:, :, 0]) or np.any(d[:, :, -1])):
            raise ValueError("field must vanish on the boundary ring")

    def rotate_values(self, angle: float) -> "VectorField2":
        c, s = math.cos(angle), math.sin(angle)
        u1, u2 = self.data
        return VectorField2(self.grid, np.stack([c * u1 - s * u2, s * u1 + c * u2]))


def laplacian(u: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacian on the interior of the last two axes, zero on the ring."""
    out = np.zeros_like(u)
    c = u[..., 1:-1, 1:-1]
    out[..., 1:-1, 1:-1] = (
        u[..., 2:, 1:-1] + u[..., :-2, 1:-1] + u[..., 1:-1, 2:] + u[..., 1:-1, :-2] - 4.0 * c
    ) / (h * h)
    return out


def model_arrays(params: ModelParams, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """mu and f sampled at the grid nodes; f has shape (2, n, n)."""
    X, Y = grid.mesh
    g = np.exp(-(X * X + Y * Y))
    return g - params.chi, np.stack([X * g, Y * g])


def _energy_arrays(u, h, mu, f, params):
    eps, a = params.epsilon, params.a
    gx = np.diff(u, axis=1)
    gy = np.diff(u, axis=2)
    grad = 0.5 * (np.sum(gx * gx) + np.sum(gy * gy))
    m2 = u[0] * u[0] + u[1] * u[1]
    pot = np.sum((-0.5 * mu * m2 + 0.25 * m2 * m2) / (eps * eps) - (a / eps) * (f[0] * u[0] + f[1] * u[1]))
    return grad + h * h * pot


def energy(u: VectorField2, params: ModelParams) -> float:
    """Discrete energy of a boundary-zero field."""
    data = np.asarray(u.data)
    _check_finite(data)
    mu, f = model_arrays(params, u.grid)
    return float(_energy_arrays(data, u.grid.h, mu, f, params))


def el_residual(u: VectorField2, params: ModelParams) -> VectorField2:
    """eps^2 Lap_h u + mu u - |u|^2 u + eps a f at interior nodes, zero on the ring."""
    data = np.asarray(u.data)
    mu, f = model_arrays(params, u.grid)
    eps = params.epsilon
    m2 = data[0] ** 2 + data[1] ** 2
    r = eps * eps * laplacian(data, u.grid.h) + (mu - m2) * data + eps * params.a * f
    r[:, 0, :] = r[:, -1, :] = 0.0
    r[:, :, 0] = r[:, :, -1] = 0.0
    return VectorField2(u.grid, r)


def renormalization_term(params: ModelParams, grid: GridSpec) -> float:
    """Nodal quadrature of mu^2 / (4 eps^2) over the disc |x| < rho."""
    mu, _ = model_arrays(params, grid)
    inside = grid.radius < params.rho
    return float(grid.h**2 * np.sum(mu[inside] ** 2) / (4 * params.epsilon**2))


def renormalized_energy(u: VectorField2, params: ModelParams) -> float:
    return energy(u, params) + renormalization_term(params, u.grid)


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def cutoff_test_map(params: ModelParams, grid: GridSpec) -> VectorField2:
    """(sqrt(mu_rad), 0) cut off smoothly over the collar rho - eps^(2/3) < r < rho."""
    r = grid.radius
    w = params.epsilon ** (2.0 / 3.0)
    mu = mu_rad(r, params.chi)
    u1 = np.sqrt(np.maximum(mu, 0.0)) * _smoothstep((params.rho - r) / w)
    u1 = _zero_ring(u1)
    return VectorField2.from_components(grid, u1, np.zeros_like(u1))


def capped_comparison_map(params: ModelParams, grid: GridSpec) -> VectorField2:
    """sqrt(mu) inside, linear ramp to zero on the eps^(2/3) collar, zero outside."""
    r = grid.radius
    rho, w = params.rho, params.epsilon ** (2.0 / 3.0)
    edge = math.sqrt(float(mu_rad(rho - w, params.chi)))
    u1 = np.where(
        r <= rho - w,
        np.sqrt(np.maximum(mu_rad(r, params.chi), 0.0)),
        np.where(r <= rho, edge * (rho - r) / w, 0.0),
    )
    u1 = _zero_ring(u1)
    return VectorField2.from_components(grid, u1, np.zeros_like(u1))


def _zero_ring(a):
    a = np.array(a, dtype=float)
    a[0, :] = a[-1, :] = a[:, 0] = a[:, -1] = 0.0
    return a
