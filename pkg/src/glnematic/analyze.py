"""Diagnostics of computed fields: zeros and their degrees, alignment with the
radial direction, Thomas-Fermi deviation, the a-priori bound constant, the
outer asymptote, vortex-core matching and regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import maximum_filter, minimum_filter

from .fields import ModelParams, VectorField2, f_rad, model_arrays, mu_rad

__all__ = [
    "Zero",
    "Phase",
    "AnalysisReport",
    "LABELS",
    "default_amp_tol",
    "find_zeros",
    "winding_number",
    "alignment",
    "tf_deviation",
    "bound_constant",
    "outer_check",
    "core_profile_fit",
    "core_profile_match",
    "classify",
    "analyze",
]

LABELS = ("NoZero", "ShadowVortex", "StandardVortexOffCenter", "StandardVortexCenter")

# classification constants (engineering choices, frozen for tests)
CENTER_RADIUS_FRAC = 0.2
INTERFACE_MARGIN = 0.15
MATCH_BUDGET = 0.2
SHADOW_AMP_FRAC = 0.5


@dataclass(frozen=True)
class Zero:
    location: tuple[float, float]
    winding: int
    core_dip: float

    @property
    def radius(self) -> float:
        return math.hypot(*self.location)


@dataclass(frozen=True)
class Phase:
    label: str
    evidence: dict = field(default_factory=dict)
    ambiguous: bool = False

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown phase label {self.label!r}")


def default_amp_tol(params: ModelParams) -> float:
    """0.3 eps^{1/3} sqrt(-mu1): a fraction of the interface-layer amplitude."""
    return 0.3 * params.epsilon ** (1 / 3) * math.sqrt(-params.mu1)


def _interpolators(u):
    g = u.grid
    return (
        RegularGridInterpolator((g.x, g.y), u.u1),
        RegularGridInterpolator((g.x, g.y), u.u2),
    )


def _inside(u, pts):
    g = u.grid
    return (
        np.all(pts[:, 0] >= g.x[0])
        and np.all(pts[:, 0] <= g.x[-1])
        and np.all(pts[:, 1] >= g.y[0])
        and np.all(pts[:, 1] <= g.y[-1])
    )


def winding_number(u: VectorField2, center, radius: float, samples: int = 512, _interp=None) -> int:
    """Degree of u/|u| on the circle |x - center| = radius (counterclockwise)."""
    samples = max(int(samples), 256)
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    pts = np.stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)], axis=-1)
    if not _inside(u, pts):
        raise ValueError("loop leaves the grid")
    i1, i2 = _interp or _interpolators(u)
    a, b = i1(pts), i2(pts)
    if np.min(np.hypot(a, b)) < 1e-10:
        raise ValueError("loop through near-zero")
    a2, b2 = np.roll(a, -1), np.roll(b, -1)
    dth = np.arctan2(a * b2 - b * a2, a * a2 + b * b2)
    w = float(np.sum(dth)) / (2 * np.pi)
    k = round(w)
    if abs(w - k) > 0.05:
        raise ValueError(f"ill-conditioned loop (winding {w:.3f})")
    return int(k)


def _refine_bilinear(u, i, j):
    """Newton solve of the bilinear interpolant = 0, walking across cells."""
    g = u.grid
    n = g.n
    s, t = 0.5, 0.5
    for _ in range(6):
        c = [u.data[:, i, j], u.data[:, i + 1, j], u.data[:, i, j + 1], u.data[:, i + 1, j + 1]]
        for _ in range(30):
            val = (1 - s) * (1 - t) * c[0] + s * (1 - t) * c[1] + (1 - s) * t * c[2] + s * t * c[3]
            ds = -(1 - t) * c[0] + (1 - t) * c[1] - t * c[2] + t * c[3]
            dt = -(1 - s) * c[0] - s * c[1] + (1 - s) * c[2] + s * c[3]
            Jm = np.stack([ds, dt], axis=1)
            det = np.linalg.det(Jm)
            if abs(det) < 1e-300:
                break
            step = np.linalg.solve(Jm, -val)
            s, t = s + step[0], t + step[1]
            if np.hypot(*step) < 1e-13 or abs(s) > 3 or abs(t) > 3:
                break
        di = int(math.floor(s)) if not 0 <= s <= 1 else 0
        dj = int(math.floor(t)) if not 0 <= t <= 1 else 0
        if di == 0 and dj == 0:
            return g.x[i] + s * g.h, g.y[j] + t * g.h, True
        ni, nj = min(max(i + di, 1), n - 3), min(max(j + dj, 1), n - 3)
        if (ni, nj) == (i, j):
            break
        s -= ni - i
        t -= nj - j
        s, t = min(max(s, 0.0), 1.0), min(max(t, 0.0), 1.0)
        i, j = ni, nj
    return g.x[i] + 0.5 * g.h, g.y[j] + 0.5 * g.h, False


def find_zeros(u: VectorField2, amp_tol: float) -> list[Zero]:
    """Zeros of u carrying a nonzero degree.

    Candidates are cells where both components change sign and grid-local
    minima of |u| below ``amp_tol``; regions where |u| is below the noise
    floor max(1e-10, 1e-6 sup|u|) and the three cells nearest the boundary
    ring are skipped.  Each candidate is refined to subpixel accuracy and
    gets its degree from a loop of radius 4h (8h if that loop fails).
    Degree-zero candidates are dropped.
    """
    if not amp_tol > 0:
        raise ValueError("amp_tol must be positive")
    g = u.grid
    n = g.n
    mod = u.modulus()
    floor = max(1e-10, 1e-6 * float(np.max(mod)))
    u1, u2 = u.u1, u.u2

    def corners(a):
        c = np.stack([a[:-1, :-1], a[1:, :-1], a[:-1, 1:], a[1:, 1:]])
        return c.min(axis=0), c.max(axis=0)

    lo1, hi1 = corners(u1)
    lo2, hi2 = corners(u2)
    mmax = corners(mod)[1]
    cell = (lo1 < 0) & (hi1 > 0) & (lo2 < 0) & (hi2 > 0) & (mmax > floor)
    margin = 3
    cell[:margin, :] = cell[-margin:, :] = False
    cell[:, :margin] = cell[:, -margin:] = False
    cand = [tuple(ij) for ij in np.argwhere(cell)]

    lm = (mod == minimum_filter(mod, size=3)) & (mod < amp_tol) & (maximum_filter(mod, size=3) > floor)
    lm[:margin, :] = lm[-margin:, :] = False
    lm[:, :margin] = lm[:, -margin:] = False
    for i, j in np.argwhere(lm):
        # pick the cell among the four touching the node with the smallest corner sum
        best = min(
            ((i + di, j + dj) for di in (-1, 0) for dj in (-1, 0)),
            key=lambda c: mod[c[0] : c[0] + 2, c[1] : c[1] + 2].sum(),
        )
        cand.append(best)

    interp = _interpolators(u)
    zeros: list[Zero] = []
    seen: list[tuple[float, float]] = []
    for i, j in sorted(set(cand)):
        x, y, _ = _refine_bilinear(u, int(i), int(j))
        if any(math.hypot(x - a, y - b) < 2 * g.h for a, b in seen):
            continue
        seen.append((x, y))
        w = None
        for rad in (4 * g.h, 8 * g.h):
            try:
                w = winding_number(u, (x, y), rad, _interp=interp)
                break
            except ValueError:
                continue
        if not w:
            continue
        # core dip: smallest nodal |u| within 3h of the zero
        X, Y = g.mesh
        ii = slice(max(i - 4, 0), min(i + 6, n))
        jj = slice(max(j - 4, 0), min(j + 6, n))
        near = np.hypot(X[ii, jj] - x, Y[ii, jj] - y) <= 3 * g.h
        dip = float(np.min(mod[ii, jj][near])) if np.any(near) else float(mod[i, j])
        zeros.append(Zero((float(x), float(y)), int(w), dip))
    return zeros


def alignment(u: VectorField2, r_in: float, r_out: float) -> float:
    """min over grid nodes with r_in <= |x| <= r_out of u.x/(|u||x|)."""
    if not r_in < r_out:
        raise ValueError("need r_in < r_out")
    g = u.grid
    X, Y = g.mesh
    R = g.radius
    sel = (R >= r_in) & (R <= r_out) & (R > 0)
    if not np.any(sel):
        raise ValueError("annulus contains no grid nodes")
    m = u.modulus()[sel]
    bad = m < 1e-10
    if np.any(bad):
        locs = ", ".join(f"({a:.4f}, {b:.4f})" for a, b in zip(X[sel][bad][:8], Y[sel][bad][:8]))
        raise ValueError(f"zero amplitude in annulus at {locs}")
    c = (u.u1[sel] * X[sel] + u.u2[sel] * Y[sel]) / (m * R[sel])
    return float(np.min(c))


def tf_deviation(u: VectorField2, params: ModelParams, r_frac: float = 0.8) -> float:
    """sup over |x| <= r_frac rho of ||u| - sqrt(mu)|."""
    if not 0 < r_frac < 1:
        raise ValueError("r_frac must lie in (0, 1)")
    mu, _ = model_arrays(params, u.grid)
    sel = u.grid.radius <= r_frac * params.rho
    return float(np.max(np.abs(u.modulus()[sel] - np.sqrt(np.maximum(mu[sel], 0.0)))))


def bound_constant(u: VectorField2, params: ModelParams) -> float:
    """sup |u| / (sqrt(mu+) + eps^{1/3})."""
    mu, _ = model_arrays(params, u.grid)
    return float(np.max(u.modulus() / (np.sqrt(np.maximum(mu, 0.0)) + params.epsilon ** (1 / 3))))


def outer_check(u: VectorField2, params: ModelParams, r0: float, samples: int = 360) -> float | None:
    """Relative deviation of u/eps from -(a/mu(r0)) f on the circle |x| = r0.

    Returns None at a = 0, where the normalizer vanishes.
    """
    if not r0 > params.rho + 0.2:
        raise ValueError("r0 must exceed rho + 0.2")
    if params.a == 0:
        return None
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    pts = np.stack([r0 * np.cos(th), r0 * np.sin(th)], axis=-1)
    if not _inside(u, pts):
        raise ValueError(f"circle of radius {r0} leaves the grid")
    i1, i2 = _interpolators(u)
    mu0 = float(mu_rad(r0, params.chi))
    fr = float(f_rad(r0))
    t1 = i1(pts) / params.epsilon + (params.a / mu0) * fr * np.cos(th)
    t2 = i2(pts) / params.epsilon + (params.a / mu0) * fr * np.sin(th)
    return float(np.max(np.hypot(t1, t2)) / (params.a * fr / abs(mu0)))


@lru_cache(maxsize=4)
def _eta_default():
    from .radial import solve_gl_vortex

    return solve_gl_vortex()


@dataclass(frozen=True)
class CoreFit:
    misfit: float
    rotation: np.ndarray
    reflected: bool


def core_profile_fit(u: VectorField2, zero: Zero, params: ModelParams, eta=None, s_max: float = 5.0, ds: float = 0.2) -> CoreFit:
    """Least-squares fit of u(x0 + eps s) by g sqrt(mu0) eta(sqrt(mu0)|s|) s/|s|, g in O(2)."""
    if abs(zero.winding) != 1:
        raise ValueError("core matching needs a degree +-1 zero")
    mu0 = float(mu_rad(zero.radius, params.chi))
    if mu0 <= 0.1:
        raise ValueError("core outside validity region")
    eta = _eta_default() if eta is None else eta
    s = np.arange(-s_max, s_max + 0.5 * ds, ds)
    S1, S2 = np.meshgrid(s, s, indexing="ij")
    R = np.hypot(S1, S2)
    sel = (R <= s_max) & (R > 0)
    S1, S2, R = S1[sel], S2[sel], R[sel]
    x0, y0 = zero.location
    pts = np.stack([x0 + params.epsilon * S1, y0 + params.epsilon * S2], axis=-1)
    if not _inside(u, pts):
        raise ValueError("core window leaves the grid")
    i1, i2 = _interpolators(u)
    U = np.stack([i1(pts), i2(pts)])
    amp = math.sqrt(mu0) * eta(math.sqrt(mu0) * R)
    Mdl = np.stack([amp * S1 / R, amp * S2 / R])
    W, _, Vt = np.linalg.svd(U @ Mdl.T)
    G = W @ Vt
    misfit = float(np.linalg.norm(U - G @ Mdl) / np.linalg.norm(U))
    return CoreFit(misfit, G, bool(np.linalg.det(G) < 0))


def core_profile_match(u: VectorField2, zero: Zero, params: ModelParams, eta=None) -> float:
    """Relative L2 misfit of the best O(2) fit of the standard vortex to the core."""
    return core_profile_fit(u, zero, params, eta).misfit


def classify(zeros: list[Zero], u: VectorField2, params: ModelParams, eta=None) -> Phase:
    """Decision table over the detected zeros.

    Precedence Center > OffCenter > Shadow > NoZero; ``ambiguous`` is set when
    more than one rule fires, or when zeros exist but no rule fires (the
    label then follows the radius of the zero closest to the origin).
    """
    rho = params.rho
    if not zeros:
        return Phase("NoZero", {"n_zeros": 0})
    ev: dict = {"n_zeros": len(zeros), "radii": [round(z.radius, 6) for z in zeros]}
    g = u.grid
    mod = u.modulus()
    X, Y = g.mesh
    shadow_amp_cap = SHADOW_AMP_FRAC * math.sqrt(1 - params.chi)

    core_amps = []
    for z in zeros:
        near = np.hypot(X - z.location[0], Y - z.location[1]) <= 3 * params.epsilon
        core_amps.append(float(np.max(mod[near])) if np.any(near) else 0.0)
    ev["core_amp_max"] = max(core_amps)
    shadow = all(z.radius >= rho - INTERFACE_MARGIN for z in zeros) and all(a <= shadow_amp_cap for a in core_amps)

    center = off = False
    matches = []
    for z in zeros:
        if abs(z.winding) != 1:
            continue
        try:
            mfit = core_profile_match(u, z, params, eta)
        except ValueError:
            continue
        matches.append(mfit)
        if z.radius <= CENTER_RADIUS_FRAC * rho and mfit <= MATCH_BUDGET:
            center = True
        elif CENTER_RADIUS_FRAC * rho < z.radius < rho - INTERFACE_MARGIN and mfit <= MATCH_BUDGET:
            off = True
    if matches:
        ev["core_match_min"] = min(matches)
    fired = [lab for lab, ok in (("StandardVortexCenter", center), ("StandardVortexOffCenter", off), ("ShadowVortex", shadow)) if ok]
    if fired:
        return Phase(fired[0], ev, len(fired) > 1)
    r = min(z.radius for z in zeros)
    if r <= CENTER_RADIUS_FRAC * rho:
        lab = "StandardVortexCenter"
    elif r < rho - INTERFACE_MARGIN:
        lab = "StandardVortexOffCenter"
    else:
        lab = "ShadowVortex"
    ev["note"] = "no rule fired"
    return Phase(lab, ev, True)


@dataclass
class AnalysisReport:
    zeros: list
    tf_sup_dev: float
    alignment_min: float
    bound_K: float
    outer_dev: float | None
    phase: Phase

    def to_text(self) -> str:
        lines = [
            f"phase = {self.phase.label}",
            f"ambiguous = {int(self.phase.ambiguous)}",
            f"n_zeros = {len(self.zeros)}",
        ]
        for k, z in enumerate(self.zeros):
            lines.append(
                f"zero{k} = {z.location[0]:.10g} {z.location[1]:.10g} winding {z.winding:+d} dip {z.core_dip:.6g}"
            )
        lines += [
            f"tf_sup_dev = {self.tf_sup_dev:.17g}",
            f"alignment_min = {self.alignment_min:.17g}",
            f"bound_K = {self.bound_K:.17g}",
            "outer_dev = " + ("undefined at a=0" if self.outer_dev is None else f"{self.outer_dev:.17g}"),
        ]
        return "\n".join(lines) + "\n"

    def csv_fields(self) -> dict:
        return {
            "phase": self.phase.label,
            "n_zeros": len(self.zeros),
            "zero_radii": ";".join(f"{z.radius:.17g}" for z in self.zeros),
            "tf_sup_dev": self.tf_sup_dev,
            "alignment_min": self.alignment_min,
            "bound_K": self.bound_K,
            "outer_dev": "" if self.outer_dev is None else self.outer_dev,
        }


def analyze(u: VectorField2, params: ModelParams, amp_tol: float | None = None, r0: float | None = None) -> AnalysisReport:
    """All diagnostics with default windows; alignment that hits a zero reads as -1."""
    amp_tol = default_amp_tol(params) if amp_tol is None else amp_tol
    zeros = find_zeros(u, amp_tol)
    rho, eps = params.rho, params.epsilon
    try:
        al = alignment(u, rho + 2 * eps ** (2 / 3), rho + 0.4)
    except ValueError:
        al = -1.0
    r0 = rho + 0.5 if r0 is None else r0
    try:
        od = outer_check(u, params, r0)
    except ValueError:
        od = float("nan")
    return AnalysisReport(
        zeros=zeros,
        tf_sup_dev=tf_deviation(u, params, 0.8),
        alignment_min=al,
        bound_K=bound_constant(u, params),
        outer_dev=od,
        phase=classify(zeros, u, params),
    )
