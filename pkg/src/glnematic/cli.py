"""Command-line front end.

Every subcommand reads an optional flat ``key = value`` config file
(``--config``); command-line flags override file values.  Exit codes: 0 on
success, 2 on solver nonconvergence, 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

__all__ = ["main", "KEYS", "parse_config"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _opt_float(s):
    return None if s in ("", "auto", "none", "None") else float(s)


def _opt_int(s):
    return None if s in ("", "auto", "none", "None") else int(s)


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_str(s):
    return None if s in ("", "none", "None") else s


_MODEL = [
    ("epsilon", float, 0.05, "coherence length eps"),
    ("a", float, 0.0, "laser intensity a"),
    ("chi", float, 0.5, "Gaussian offset chi in (0, 1)"),
]
_GRID = [
    ("half_width", _opt_float, "auto", "domain half-width L (auto: rho + 3)"),
    ("n", _opt_int, "auto", "grid points per side (auto: h <= eps/3)"),
]
_MIN = [
    ("max_iters", int, 20000, "iteration cap"),
    ("residual_tol", float, 1e-8, "sup-norm tolerance on the residual"),
    ("step_rule", str, "nonlinear-CG", "nonlinear-CG | adaptive-backtracking | fixed"),
    ("truncation_bound", _opt_float, "auto", "clamp bound M (auto: 1.5 sup sqrt(mu+) + 1)"),
    ("truncation_every", int, 50, "iterations between truncation passes"),
    ("seed", str, "thomas_fermi", "thomas_fermi | radial_scalar | vortex(x,y;+-1) | random(k) | file(path) | equivariant"),
    ("multistart", _bool, False, "use the default multistart seed list instead of 'seed'"),
    ("symmetry", _opt_str, "none", "none | equivariant | scalar"),
    ("csv", _bool, False, "also write the field as CSV"),
]
_OUT = [("out_dir", str, "out", "output directory")]

KEYS = {
    "minimize": _MODEL + _GRID + _MIN + _OUT,
    "radial": _MODEL
    + [
        ("kind", str, "scalar", "scalar | equivariant | gl_vortex"),
        ("r_max", _opt_float, "auto", "outer radius (auto: rho + 3, or 20 for gl_vortex)"),
        ("m", _opt_int, "auto", "radial nodes (auto: dr <= eps/40, or 40001 for gl_vortex)"),
    ]
    + _OUT,
    "painleve": [
        ("alpha", float, 0.0, "forcing constant"),
        ("branch", str, "plus", "plus | minus"),
        ("S", float, 10.0, "half-length of the s interval"),
        ("m", int, 2001, "nodes"),
    ]
    + _OUT,
    "analyze": _MODEL
    + [
        ("field", str, "out/field.glnf", "GLNF1 field to analyze"),
        ("amp_tol", _opt_float, "auto", "zero-detection amplitude (auto: 0.3 eps^(1/3) sqrt(-mu1))"),
        ("r0", _opt_float, "auto", "radius for the outer check (auto: rho + 0.5)"),
    ]
    + _OUT,
    "sweep": [
        ("epsilons", str, "0.04", "comma-separated eps values"),
        ("scaling", str, "linear_log", "linear_log | square_log | raw"),
        ("b_values", str, "0", "comma-separated b values (a values for raw)"),
        ("seeds", str, "thomas_fermi vortex(0,0;+1) vortex(0,0;-1) radial_scalar random(1) random(2) random(3)", "space-separated seed list"),
        ("continuation", _bool, False, "warm-start each b from the previous one"),
        ("chi", float, 0.5, "Gaussian offset chi"),
        ("half_width", _opt_float, "auto", "domain half-width (auto: rho + 3)"),
        ("h_factor", float, 1 / 3, "grid spacing in units of eps"),
        ("max_iters", int, 20000, "iteration cap per minimization"),
        ("residual_tol", float, 1e-8, "residual tolerance"),
        ("fields", _bool, True, "write per-point fields and reports"),
    ]
    + _OUT,
    "compare": _MODEL
    + _GRID
    + [
        ("field", _opt_str, "none", "GLNF1 field (none: minimize from the Thomas-Fermi seed)"),
        ("theta", float, 0.0, "interface angle for the layer window"),
        ("s_half", float, 2.0, "layer window half-length in s1"),
    ]
    + _OUT,
}


def parse_config(path, command):
    """Flat ``key = value`` file; '#' starts a comment.  Unknown keys are errors."""
    known = {k for k, *_ in KEYS[command]} | {"threads"}
    vals = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: malformed line for key {line.split()[0]!r} (expected key = value)")
        key, val = (t.strip() for t in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{no}: missing key")
        if key not in known:
            raise UsageError(f"{path}:{no}: unknown key {key!r} for '{command}'")
        vals[key] = val
    return vals


def _resolve(command, args):
    """Merge defaults, config file and flags; convert types."""
    table = KEYS[command]
    raw = {k: d for k, _, d, _ in table}
    if args.config:
        file_vals = parse_config(args.config, command)
        raw.update({k: v for k, v in file_vals.items() if k != "threads"})
        if "threads" in file_vals and args.threads is None:
            args.threads = int(file_vals["threads"])
    for k, *_ in table:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    out = {}
    for k, conv, _, _ in table:
        v = raw[k]
        try:
            out[k] = conv(v) if isinstance(v, str) else v
        except ValueError as exc:
            raise UsageError(f"bad value for key {k!r}: {v!r} ({exc})")
    return out


def _threads(args):
    if args.threads is not None:
        return max(1, int(args.threads))
    env = os.environ.get("GLNEMATIC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"GLNEMATIC_THREADS must be an integer, got {env!r}")
    return 1


def _model(cfg):
    from .fields import ModelParams

    return ModelParams(cfg["epsilon"], cfg["a"], cfg["chi"])


def _grid(cfg, params):
    from .fields import GridSpec

    L = cfg.get("half_width")
    if cfg.get("n") is None:
        grid = GridSpec.for_epsilon(params, L)
    else:
        grid = GridSpec(params.rho + 3.0 if L is None else L, cfg["n"])
    grid.check_fits(params)
    return grid


def _write_meta(path, params, res, grid):
    from .io import fmt

    with open(path, "w") as fh:
        fh.write(f"epsilon = {fmt(params.epsilon)}\na = {fmt(params.a)}\nchi = {fmt(params.chi)}\n")
        fh.write(f"half_width = {fmt(grid.half_width)}\nn = {grid.n}\n")
        fh.write(f"seed = {res.seed_label}\niters = {res.iters}\nenergy = {fmt(res.energy)}\n")
        fh.write(f"residual = {fmt(res.residual_sup)}\nconverged = {int(res.converged)}\n")
        for lab, e, r, c in res.per_seed:
            fh.write(f"seed_energy {lab} = {fmt(e)} residual {fmt(r)} converged {int(c)}\n")


def cmd_minimize(cfg, args):
    from .analyze import analyze
    from .fields import ScalarField
    from .io import write_field, write_field_csv, write_ppm
    from .minimize import MinimizeOptions, Seed, minimize_from_seed, multistart_global

    params = _model(cfg)
    grid = _grid(cfg, params)
    opts = MinimizeOptions(
        max_iters=cfg["max_iters"],
        residual_tol=cfg["residual_tol"],
        step_rule=cfg["step_rule"],
        truncation_bound=cfg["truncation_bound"],
        truncation_every=cfg["truncation_every"],
        seed=Seed.parse(cfg["seed"]),
        symmetry=cfg["symmetry"],
    )
    if cfg["multistart"]:
        try:
            res = multistart_global(params, grid, opts)
        except RuntimeError as exc:
            print(f"minimize: {exc}", file=sys.stderr)
            return 2
    else:
        res = minimize_from_seed(params, grid, opts)
    out = cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    write_field(os.path.join(out, "field.glnf"), res.field)
    _write_meta(os.path.join(out, "field.meta.txt"), params, res, grid)
    if cfg["csv"]:
        write_field_csv(os.path.join(out, "field.csv"), res.field, {"epsilon": params.epsilon, "a": params.a})
    rep = analyze(res.field, params)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(rep.to_text())
    write_ppm(os.path.join(out, "quicklook.ppm"), ScalarField(grid, res.field.modulus()), [z.location for z in rep.zeros])
    print(f"energy {res.energy:.12g} residual {res.residual_sup:.3e} iters {res.iters} phase {rep.phase.label}")
    if not res.converged:
        print(f"minimize: not converged after {res.iters} iterations (residual {res.residual_sup:.3e})", file=sys.stderr)
        return 2
    return 0


def cmd_radial(cfg, args):
    from .io import write_profile_csv
    from .radial import NewtonDivergence, RadialGrid, default_model_grid, solve_equivariant_radial, solve_gl_vortex, solve_scalar_radial

    kind = cfg["kind"]
    params = _model(cfg)
    try:
        if kind == "gl_vortex":
            rg = RadialGrid(cfg["r_max"] or 20.0, cfg["m"] or 40001)
            prof = solve_gl_vortex(rg)
        elif kind in ("scalar", "equivariant"):
            rg = default_model_grid(params, cfg["r_max"], cfg["m"])
            prof = (solve_scalar_radial if kind == "scalar" else solve_equivariant_radial)(params, rg)
        else:
            raise UsageError(f"unknown radial kind {kind!r}")
    except NewtonDivergence as exc:
        print(f"radial: {exc}", file=sys.stderr)
        return 2
    os.makedirs(cfg["out_dir"], exist_ok=True)
    path = os.path.join(cfg["out_dir"], f"radial_{kind}.csv")
    write_profile_csv(path, prof)
    print(f"wrote {path} (residual {prof.residual:.3e})")
    return 0


def cmd_painleve(cfg, args):
    from .io import write_profile_csv
    from .painleve import PainleveSpec, solve_p2
    from .radial import NewtonDivergence

    spec = PainleveSpec(cfg["alpha"], cfg["branch"], cfg["S"], cfg["m"])
    try:
        prof = solve_p2(spec)
    except NewtonDivergence as exc:
        print(f"painleve: {exc}", file=sys.stderr)
        return 2
    os.makedirs(cfg["out_dir"], exist_ok=True)
    path = os.path.join(cfg["out_dir"], f"painleve_{spec.branch}.csv")
    write_profile_csv(path, prof, columns=("s", "y"))
    print(f"wrote {path}; y(0) = {float(prof(0.0)):.12g}, residual {prof.residual:.3e}")
    return 0


def cmd_analyze(cfg, args):
    from .analyze import analyze
    from .fields import ScalarField, VectorField2
    from .io import write_ppm, read_field

    params = _model(cfg)
    u = read_field(cfg["field"])
    if not isinstance(u, VectorField2):
        raise UsageError(f"{cfg['field']} holds a scalar field")
    rep = analyze(u, params, cfg["amp_tol"], cfg["r0"])
    out = cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(rep.to_text())
    from .io import fmt

    row = rep.csv_fields()
    with open(os.path.join(out, "report.csv"), "w") as fh:
        fh.write(",".join(row) + "\n" + ",".join(fmt(v) for v in row.values()) + "\n")
    write_ppm(os.path.join(out, "quicklook.ppm"), ScalarField(u.grid, u.modulus()), [z.location for z in rep.zeros])
    sys.stdout.write(rep.to_text())
    return 0


def cmd_sweep(cfg, args):
    from .minimize import Seed
    from .sweep import SweepSpec, run_sweep, write_gnuplot, write_sweep_csv

    spec = SweepSpec(
        epsilons=[float(t) for t in cfg["epsilons"].split(",") if t.strip()],
        scaling=cfg["scaling"],
        b_values=[float(t) for t in cfg["b_values"].split(",") if t.strip()],
        seeds=[Seed.parse(t) for t in cfg["seeds"].split()],
        continuation=cfg["continuation"],
        chi=cfg["chi"],
        half_width=cfg["half_width"],
        h_factor=cfg["h_factor"],
        max_iters=cfg["max_iters"],
        residual_tol=cfg["residual_tol"],
        out_dir=os.path.join(cfg["out_dir"], "points") if cfg["fields"] else None,
    )
    res = run_sweep(spec, threads=_threads(args))
    os.makedirs(cfg["out_dir"], exist_ok=True)
    write_sweep_csv(os.path.join(cfg["out_dir"], "sweep.csv"), res, spec)
    write_gnuplot(os.path.join(cfg["out_dir"], "phase_diagram.gp"), "sweep.csv", spec)
    failed = [r for r in res.rows if r.status != "ok"]
    for r in res.rows:
        print(f"eps {r.epsilon:g} b {r.b:g} a {r.a:.6g} phase {r.phase_label or '-'} gap {r.symmetry_gap:.3e} {r.status}")
    return 2 if failed else 0


def cmd_compare(cfg, args):
    from .analyze import core_profile_match, default_amp_tol, find_zeros
    from .fields import VectorField2
    from .io import read_field
    from .minimize import minimize_from_seed
    from .painleve import PainleveSpec, extract_layer, physical_alpha, solve_p2

    params = _model(cfg)
    if cfg["field"]:
        u = read_field(cfg["field"])
        if not isinstance(u, VectorField2):
            raise UsageError(f"{cfg['field']} holds a scalar field")
    else:
        res = minimize_from_seed(params, _grid(cfg, params))
        if not res.converged:
            print("compare: minimization did not converge", file=sys.stderr)
            return 2
        u = res.field
    lines = []
    alpha = physical_alpha(params)
    y = solve_p2(PainleveSpec(alpha, "plus"))
    s = cfg["s_half"]
    win = extract_layer(u, params, cfg["theta"], ((-s, s, 81), (0.0, 0.0, 1)))
    w = win.along_s1(0)
    ys = y(win.s1)
    err = float(np.max(np.abs(w - ys)) / np.max(np.abs(ys)))
    lines.append(f"alpha = {alpha:.12g}")
    lines.append(f"layer_sup_rel_error = {err:.6g}")
    for k, z in enumerate(find_zeros(u, default_amp_tol(params))):
        try:
            m = core_profile_match(u, z, params)
            lines.append(f"zero{k} radius {z.radius:.6g} winding {z.winding:+d} core_match {m:.6g}")
        except ValueError as exc:
            lines.append(f"zero{k} radius {z.radius:.6g} winding {z.winding:+d} core_match n/a ({exc})")
    os.makedirs(cfg["out_dir"], exist_ok=True)
    with open(os.path.join(cfg["out_dir"], "compare.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


COMMANDS = {
    "minimize": (cmd_minimize, "minimize the energy from a seed (or multistart)"),
    "radial": (cmd_radial, "solve a 1D radial reduction"),
    "painleve": (cmd_painleve, "solve the 1D Painleve II boundary value problem"),
    "analyze": (cmd_analyze, "diagnostics of a stored field"),
    "sweep": (cmd_sweep, "phase-plane sweep over (eps, b)"),
    "compare": (cmd_compare, "boundary layer vs Painleve II and vortex cores vs eta"),
}


def build_parser():
    p = _Parser(prog="glnematic", description="Ginzburg-Landau nematic light-matter laboratory.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(
            name,
            help=helptext,
            description=helptext + ". Config keys (file or flag) with defaults are listed below.",
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--threads", type=int, default=None, help="worker cap (default: $GLNEMATIC_THREADS or 1)")
        grp = sp.add_argument_group("config keys")
        for key, _, default, desc in KEYS[name]:
            grp.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE", help=f"{desc} (default: {default})")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 1
    func = COMMANDS[args.command][0]
    try:
        cfg = _resolve(args.command, args)
        return func(cfg, args)
    except UsageError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
