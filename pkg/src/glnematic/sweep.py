"""Phase-plane sweeps along a = b eps |ln eps| and a = b eps |ln eps|^2."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analyze import analyze
from .fields import GridSpec, ModelParams
from .io import fmt, write_field
from .minimize import MinimizeOptions, Seed, default_seeds, minimize, minimize_from_seed, seed_field

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "scaled_a",
    "run_sweep",
    "symmetry_gap",
    "reference_energy",
    "transition_estimate",
    "write_sweep_csv",
    "write_gnuplot",
    "CSV_COLUMNS",
]

SCALINGS = ("linear_log", "square_log", "raw")


def scaled_a(scaling: str, b: float, eps: float) -> float:
    L = abs(math.log(eps))
    if scaling == "linear_log":
        return b * eps * L
    if scaling == "square_log":
        return b * eps * L * L
    if scaling == "raw":
        return b
    raise ValueError(f"unknown scaling {scaling!r}")


@dataclass
class SweepSpec:
    epsilons: list
    scaling: str = "linear_log"
    b_values: list = field(default_factory=lambda: [0.0])
    seeds: list = field(default_factory=default_seeds)
    continuation: bool = False
    chi: float = 0.5
    half_width: float | None = None  # default rho + 3
    h_factor: float = 1 / 3
    max_iters: int = 20000
    residual_tol: float = 1e-8
    out_dir: str | None = None

    def __post_init__(self):
        if not self.epsilons or not self.b_values or not self.seeds:
            raise ValueError("epsilons, b_values and seeds must be nonempty")
        if any(not 0 < e < 1 for e in self.epsilons):
            raise ValueError("epsilons must lie in (0, 1)")
        if any(b < 0 for b in self.b_values):
            raise ValueError("b values must be nonnegative")
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}")

    def grid_for(self, params: ModelParams) -> GridSpec:
        return GridSpec.for_epsilon(params, self.half_width, self.h_factor)


@dataclass
class SweepRow:
    epsilon: float
    a: float
    b: float
    energy_2d: float
    energy_equivariant: float
    symmetry_gap: float
    phase_label: str
    zero_radii: list
    diagnostics: dict
    status: str = "ok"


@dataclass
class SweepResult:
    rows: list

    def column(self, eps):
        return [r for r in self.rows if r.epsilon == eps]


def reference_energy(params: ModelParams, grid: GridSpec, opts: MinimizeOptions):
    """Lowest energy over the symmetric structures: the equivariant degree-one
    minimizer, and at a = 0 also the scalar (u2 = 0) minimizer."""
    cands = []
    eq = minimize(
        seed_field(Seed.equivariant(), params, grid),
        params,
        MinimizeOptions(**{**opts.__dict__, "symmetry": "equivariant", "seed": Seed.equivariant()}),
    )
    cands.append(eq)
    if params.a == 0:
        sc = minimize(
            seed_field(Seed.radial_scalar(), params, grid),
            params,
            MinimizeOptions(**{**opts.__dict__, "symmetry": "scalar", "seed": Seed.radial_scalar()}),
        )
        cands.append(sc)
    bad = [c for c in cands if not c.converged]
    if bad:
        raise RuntimeError(
            "symmetric minimization did not converge: "
            + ", ".join(f"{c.seed_label} residual {c.residual_sup:.3e}" for c in bad)
        )
    return min(cands, key=lambda c: c.energy)


def _best_2d(params, grid, opts, seeds, extra=()):
    best, per_seed = None, []
    for s in list(seeds) + list(extra):
        r = minimize_from_seed(params, grid, MinimizeOptions(**{**opts.__dict__, "seed": s}))
        per_seed.append((s.label, r.energy, r.residual_sup, r.converged))
        if r.converged and (best is None or r.energy < best.energy):
            best = r
    if best is None:
        raise RuntimeError("no seed converged: " + "; ".join(f"{l}: {res:.3e}" for l, _, res, _ in per_seed))
    best.per_seed = per_seed
    return best


def symmetry_gap(params: ModelParams, seeds=None, grid: GridSpec | None = None, opts: MinimizeOptions | None = None):
    """(gap, E_2d, E_ref): reference symmetric energy minus the 2D minimum.

    The symmetric minimizer itself is also used as a 2D seed, so the 2D
    search always contains it.
    """
    opts = MinimizeOptions() if opts is None else opts
    grid = GridSpec.for_epsilon(params) if grid is None else grid
    seeds = default_seeds() if seeds is None else seeds
    ref = reference_energy(params, grid, opts)
    best = _best_2d(params, grid, opts, seeds, extra=[Seed.warm(ref.field)])
    return ref.energy - best.energy, best.energy, ref.energy


def _solve_point(spec: SweepSpec, eps: float, b: float, warm=None):
    params = ModelParams(eps, scaled_a(spec.scaling, b, eps), spec.chi)
    grid = spec.grid_for(params)
    opts = MinimizeOptions(max_iters=spec.max_iters, residual_tol=spec.residual_tol)
    try:
        ref = reference_energy(params, grid, opts)
        extra = [Seed.warm(ref.field)]
        if warm is not None and warm.grid.same_as(grid):
            extra.append(Seed.warm(warm))
        best = _best_2d(params, grid, opts, spec.seeds, extra)
        rep = analyze(best.field, params)
        gap = ref.energy - best.energy
        diag = rep.csv_fields()
        diag.update(
            residual=best.residual_sup,
            iters=best.iters,
            best_seed=best.seed_label,
            symmetric_broken=int(gap > 1e-5 * abs(best.energy)),
        )
        row = SweepRow(eps, params.a, b, best.energy, ref.energy, gap, rep.phase.label,
                       [z.radius for z in rep.zeros], diag)
        if spec.out_dir:
            tag = f"eps{eps:g}_b{b:g}"
            write_field(os.path.join(spec.out_dir, tag + ".glnf"), best.field)
            with open(os.path.join(spec.out_dir, tag + ".report.txt"), "w") as fh:
                fh.write(f"epsilon = {fmt(eps)}\na = {fmt(params.a)}\nb = {fmt(b)}\n")
                fh.write(f"energy_2d = {fmt(best.energy)}\nenergy_equivariant = {fmt(ref.energy)}\n")
                fh.write("".join(f"seed {l} = {fmt(e)} residual {fmt(r)} converged {int(c)}\n" for l, e, r, c in best.per_seed))
                fh.write(rep.to_text())
        return row, best.field
    except Exception as exc:  # recorded in-row, the sweep continues
        nan = float("nan")
        return SweepRow(eps, params.a, b, nan, nan, nan, "", [], {}, f"error: {exc}"), None


def _run_column(spec: SweepSpec, eps: float, bs):
    rows, warm = [], None
    for b in bs:
        row, fld = _solve_point(spec, eps, b, warm if spec.continuation else None)
        rows.append(row)
        if fld is not None:
            warm = fld
    return rows


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every (eps, b) point; rows sorted by (eps, b).

    Jobs are whole eps-columns with continuation, single points otherwise.
    Each job is computed serially, so rows do not depend on ``threads``.
    """
    if spec.out_dir:
        os.makedirs(spec.out_dir, exist_ok=True)
    bs = sorted(set(float(b) for b in spec.b_values))
    eps_list = sorted(set(float(e) for e in spec.epsilons))
    if spec.continuation:
        jobs = [(eps, bs) for eps in eps_list]
    else:
        jobs = [(eps, [b]) for eps in eps_list for b in bs]
    if threads <= 1 or len(jobs) == 1:
        parts = [_run_column(spec, e, bb) for e, bb in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(_run_column, spec, e, bb) for e, bb in jobs]
            parts = [f.result() for f in futs]
    merged = {}
    for part in parts:
        for row in part:
            merged[(row.epsilon, row.b)] = row
    return SweepResult([merged[k] for k in sorted(merged)])


CSV_COLUMNS = (
    "epsilon", "a", "b", "energy_2d", "energy_equivariant", "symmetry_gap", "phase",
    "n_zeros", "zero_radii", "tf_sup_dev", "alignment_min", "bound_K", "outer_dev",
    "residual", "iters", "best_seed", "symmetric_broken", "status",
)


def write_sweep_csv(path, result: SweepResult, spec: SweepSpec | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        if spec is not None:
            fh.write(f"# scaling = {spec.scaling}\n# chi = {fmt(spec.chi)}\n")
            fh.write("# seeds = " + " ".join(s.label for s in spec.seeds) + "\n")
            fh.write(f"# continuation = {int(spec.continuation)}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for r in result.rows:
            d = r.diagnostics
            vals = {
                "epsilon": r.epsilon, "a": r.a, "b": r.b, "energy_2d": r.energy_2d,
                "energy_equivariant": r.energy_equivariant, "symmetry_gap": r.symmetry_gap,
                "phase": r.phase_label, "status": r.status.replace("\n", " "),
            }
            for k in CSV_COLUMNS:
                if k not in vals:
                    vals[k] = d.get(k, "")
            out.writerow([fmt(vals[k]) for k in CSV_COLUMNS])


def write_gnuplot(path, csv_name: str, spec: SweepSpec) -> None:
    """Phase-diagram script: b against eps, one point style per label."""
    ylab = {"linear_log": "a / (eps |ln eps|)", "square_log": "a / (eps |ln eps|^2)", "raw": "a"}[spec.scaling]
    styles = [("NoZero", 1), ("ShadowVortex", 2), ("StandardVortexOffCenter", 4), ("StandardVortexCenter", 6)]
    plots = ", \\\n     ".join(
        f"'{csv_name}' using 1:(strcol(7) eq '{lab}' ? $3 : 1/0) with points pt {pt} ps 2 title '{lab}'"
        for lab, pt in styles
    )
    with open(path, "w", newline="\n") as fh:
        fh.write("set datafile separator ','\nset datafile commentschars '#'\n")
        fh.write("set key outside\nset logscale x\n")
        fh.write(f"set xlabel 'eps'\nset ylabel '{ylab}'\n")
        fh.write("set terminal pngcairo size 900,600\nset output 'phase_diagram.png'\n")
        fh.write(f"plot {plots}\n")


@dataclass(frozen=True)
class Transition:
    b: float
    nonmonotone: bool


def transition_estimate(result: SweepResult, from_label: str, to_label: str) -> dict:
    """Per eps: midpoint between the last ``from_label`` b before the first
    ``to_label`` b.  Raises when no eps shows the crossing."""
    out = {}
    for eps in sorted({r.epsilon for r in result.rows}):
        col = sorted(result.column(eps), key=lambda r: r.b)
        labels = [r.phase_label for r in col]
        for k in range(1, len(col)):
            if labels[k] == to_label and from_label in labels[:k]:
                last_from = max(i for i in range(k) if labels[i] == from_label)
                seq = [lab for lab in labels if lab in (from_label, to_label)]
                nonmono = any(seq[i] == to_label and seq[i + 1] == from_label for i in range(len(seq) - 1))
                out[eps] = Transition(0.5 * (col[last_from].b + col[k].b), nonmono)
                break
    if not out:
        raise ValueError("no transition in range")
    return out
