"""Command line interface: ``evosg <subcommand> ...``.

Exit codes: 0 success, 1 numerical failure (the typed error name is
printed), 2 invalid input (schema violations carry ``file:line``).
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .acceptance import SUITES, run_suite
from .dae import MatrixPencil, dae_trajectory, hy_condition, iv_space
from .delay_wave import (
    DelayLaw,
    SpatialMesh,
    accretivity_estimate,
    admissible_history,
    build_block_operator,
    delay_report,
    simulate_delay,
)
from .errors import ConfigError, EvosgError, InadmissibleHistoryError
from .evo_core import COND_LIMIT, random_source, solve
from .fourier_laplace import ConstantLaw, ShiftLaw
from .history_ivp import (
    HistoryState,
    history_value,
    hy_bound_check,
    semigroup_orbit,
    solve_ivp,
    tent_history,
)
from .weighted_time import TimeGrid, WeightedSignal, indicator, read_signal_csv, write_signal_csv

# ---------------------------------------------------------------- schemas

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MATRIX = {
    "description": "scalar, inline rows, or path to a CSV file",
    "anyOf": [
        _NUM,
        {"type": "array", "items": _VEC, "minItems": 1},
        {"type": "string", "minLength": 1},
    ],
}
_GRID = {
    "type": "object",
    "additionalProperties": False,
    "required": ["t_min", "t_max"],
    "properties": {
        "t_min": _NUM,
        "t_max": _NUM,
        "n_points": {"type": "integer", "minimum": 16, "maximum": 1 << 22},
    },
}
_LAW = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "shift"]},
        "E": _MATRIX,
        "B": _MATRIX,
        "h": _NUM,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "constant"}}}, "then": {"required": ["E"]}},
        {"if": {"properties": {"kind": {"const": "shift"}}}, "then": {"required": ["h"]}},
    ],
}
_TOLERANCES = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"tail_tol": _POS, "jump_tol": _POS, "cond_limit": _POS},
}
_RHS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["bumps", "indicator", "csv"]},
        "t_min": _NUM,
        "t_max": _NUM,
        "n_bumps": {"type": "integer", "minimum": 1, "maximum": 64},
        "a": _NUM,
        "b": _NUM,
        "vector": _VEC,
        "path": {"type": "string", "minLength": 1},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "bumps"}}},
         "then": {"required": ["t_min", "t_max"]}},
        {"if": {"properties": {"kind": {"const": "indicator"}}},
         "then": {"required": ["a", "b", "vector"]}},
        {"if": {"properties": {"kind": {"const": "csv"}}}, "then": {"required": ["path"]}},
    ],
}
_TENT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "x", "grid"],
    "properties": {
        "kind": {"const": "tent"},
        "x": _VEC,
        "width": _POS,
        "grid": _GRID,
    },
}

SOLVE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["material_law", "operator", "rho", "grid", "rhs"],
    "properties": {
        "material_law": _LAW,
        "operator": _MATRIX,
        "rho": _POS,
        "grid": _GRID,
        "rhs": _RHS,
        "calculus": {"enum": ["trapezoid", "exact"]},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

IVP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["material_law", "operator", "rho"],
    "properties": {
        "material_law": _LAW,
        "operator": _MATRIX,
        "rho": _POS,
        "history": _TENT,
        "method": {"enum": ["integrated", "direct"]},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": _TOLERANCES,
    },
}

DELAY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["interval", "n_x", "c", "h", "history", "t_final"],
    "properties": {
        "interval": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "n_x": {"type": "integer", "minimum": 2, "maximum": 4096},
        "boundary": {"enum": ["dirichlet", "neumann"]},
        "k": {"type": "number", "exclusiveMinimum": 0},
        "c": {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 2},
        "h": {"type": "array", "items": _POS, "minItems": 1, "maxItems": 2},
        "history": {
            "anyOf": [
                {"type": "string", "minLength": 1},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"const": "cosine"},
                        "mode": {"type": "integer", "minimum": 1},
                        "amplitude": _NUM,
                        "width": _POS,
                    },
                },
            ]
        },
        "t_final": _POS,
        "rho": {"anyOf": [{"const": "auto"}, _POS]},
        "n_points": {"type": "integer", "minimum": 64, "maximum": 1 << 20},
        "dt": _POS,
        "method": {"enum": ["direct", "neumann"]},
        "seed": {"type": "integer", "minimum": 0},
    },
}


# ---------------------------------------------------------------- config io

def _line_of(text, pos):
    return text.count("\n", 0, pos) + 1


def _anchor(text, err):
    """Line of the JSON text that best locates a validation error."""
    keys = [p for p in err.absolute_path if isinstance(p, str)]
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        keys += sorted(k for k in err.instance if k not in allowed)[:1]
    pos = 0
    for key in keys:
        hit = text.find(json.dumps(key), pos)
        if hit < 0:
            break
        pos = hit
    return _line_of(text, pos) if keys else 1


def load_config(path, schema):
    """Parse and validate a JSON config; raises :class:`ConfigError` with ``path:line:``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"{path}: cannot read config ({err.strerror})") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}: invalid JSON: {err.msg}") from err
    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{path}:{_anchor(text, err)}: {where}: {err.message}")
    return data, path.parent


def read_matrix(spec, base, name, dim=None):
    if isinstance(spec, str):
        p = (base / spec) if base is not None else Path(spec)
        try:
            m = np.loadtxt(p, delimiter=",", ndmin=2, encoding="utf-8")
        except (OSError, ValueError) as err:
            raise ConfigError(f"{p}: cannot read {name} matrix: {err}") from err
    elif np.ndim(spec) == 0:
        if dim is None:
            raise ConfigError(f"{name}: a scalar needs a known dimension")
        m = float(spec) * np.eye(dim)
    else:
        rows = {len(r) for r in spec}
        if len(rows) != 1:
            raise ConfigError(f"{name}: rows have different lengths")
        m = np.array(spec, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ConfigError(f"{name} has size {m.shape[0]}, expected {dim}")
    return m


def _vector(text, base=None):
    """Comma-separated numbers or a CSV file with one row or column."""
    p = Path(text) if base is None else base / text
    try:
        if p.is_file():
            return np.loadtxt(p, delimiter=",", ndmin=1, encoding="utf-8").ravel()
        return np.array([float(x) for x in text.split(",")])
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read vector from {text!r}: {err}") from err


def _operator_and_law(cfg, base):
    op = cfg["operator"]
    A = None if np.ndim(op) == 0 and not isinstance(op, str) else read_matrix(op, base, "operator")
    spec = cfg["material_law"]
    dim = None if A is None else A.shape[0]
    if spec["kind"] == "constant":
        E = read_matrix(spec["E"], base, "E", dim)
        dim = E.shape[0]
        law = ConstantLaw(E)
    else:
        B = read_matrix(spec.get("B", 1.0), base, "B", dim or 1)
        dim = B.shape[0]
        law = ShiftLaw(spec["h"], B)
    if A is None:
        A = read_matrix(cfg["operator"], base, "operator", dim)
    if A.shape[0] != dim:
        raise ConfigError(f"operator has size {A.shape[0]}, material law has {dim}")
    return law, A


def _grid(spec):
    if spec["t_max"] <= spec["t_min"]:
        raise ConfigError("grid: t_max must exceed t_min")
    return TimeGrid.covering(spec["t_min"], spec["t_max"], spec.get("n_points", 1 << 13))


def _rhs(spec, grid, rho, dim, rng, base):
    kind = spec["kind"]
    if kind == "bumps":
        return random_source(grid, rho, dim, spec["t_min"], spec["t_max"], rng,
                             spec.get("n_bumps", 3))
    if kind == "indicator":
        vec = np.asarray(spec["vector"], dtype=float)
        if vec.shape != (dim,):
            raise ConfigError(f"rhs vector has length {vec.size}, expected {dim}")
        return WeightedSignal(grid, rho, np.outer(indicator(grid, spec["a"], spec["b"]), vec))
    try:
        f = read_signal_csv(base / spec["path"], rho)
    except (OSError, ValueError) as err:
        raise ConfigError(f"rhs: {err}") from err
    if f.dim != dim:
        raise ConfigError(f"rhs has dimension {f.dim}, expected {dim}")
    return f


def _tolerances(cfg):
    tol = {"tail_tol": 1e-6, "jump_tol": 1e-6, "cond_limit": COND_LIMIT}
    tol.update(cfg.get("tolerances", {}))
    return tol


def _history(cfg, args, rho, dim):
    if args.history:
        gs = []
        for p in args.history:
            try:
                g = read_signal_csv(p, rho)
            except (OSError, ValueError) as err:
                raise ConfigError(f"history: {err}") from err
            if g.dim != dim:
                raise ConfigError(f"{p}: history has dimension {g.dim}, expected {dim}")
            gs.append(g)
        return gs
    spec = cfg.get("history")
    if spec is None:
        raise ConfigError("no history: pass --history or add a 'history' block to the config")
    if len(spec["x"]) != dim:
        raise ConfigError(f"history x has length {len(spec['x'])}, expected {dim}")
    width = spec.get("width", 1.0)
    gs = spec["grid"]
    if not gs["t_min"] <= -width < 0 < gs["t_max"]:
        raise ConfigError("history grid must contain [-width, 0] in its interior")
    grid = TimeGrid.aligned(gs["t_min"], gs["t_max"] - gs["t_min"], gs.get("n_points", 1 << 13),
                            unit=width)
    return [tent_history(grid, rho, spec["x"], width)]


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if not isinstance(v, (int, str)) else v for v in r])


# ---------------------------------------------------------------- commands

def cmd_solve(args):
    cfg, base = load_config(args.config, SOLVE_SCHEMA)
    seed = cfg.get("seed", 0)
    law, A = _operator_and_law(cfg, base)
    rho = cfg["rho"]
    grid = _grid(cfg["grid"])
    tol = _tolerances(cfg)
    f = _rhs(cfg["rhs"], grid, rho, law.dim, np.random.default_rng(seed), base)
    u, info = solve(law, A, f, rho, calculus=cfg.get("calculus", "trapezoid"),
                    cond_limit=tol["cond_limit"], tail_tol=tol["tail_tol"],
                    return_info=True, warn=False)
    write_signal_csv(u, args.out)
    _write_json({
        "seed": seed,
        "rho": rho,
        "grid": {"t_start": grid.t_start, "dt": grid.dt, "n_points": grid.n_points},
        "tolerances": {"cond_limit": tol["cond_limit"], "tail_tol": tol["tail_tol"]},
        "max_cond": info.max_cond,
        "max_residual": info.max_residual,
        "tail_fraction": info.tail_fraction,
        "octave_ratio": info.octave_ratio,
        "h1_resolved": info.h1_resolved,
        "norm": u.norm(),
    }, args.report)
    return 0


def cmd_ivp(args):
    cfg, base = load_config(args.config, IVP_SCHEMA)
    law, A = _operator_and_law(cfg, base)
    rho = cfg["rho"]
    tol = _tolerances(cfg)
    g = _history(cfg, args, rho, law.dim)[0]
    sol = solve_ivp(law, A, g, rho, method=cfg.get("method", "integrated"),
                    jump_tol=tol["jump_tol"], tail_tol=tol["tail_tol"])
    write_signal_csv(sol.u, args.out)
    _write_json({"seed": cfg.get("seed", 0), "rho": rho, "his_member": sol.his_member,
                 "diagnostics": sol.diagnostics}, args.report)
    return 0


def cmd_semigroup(args):
    cfg, base = load_config(args.config, IVP_SCHEMA)
    law, A = _operator_and_law(cfg, base)
    rho = cfg["rho"]
    tol = _tolerances(cfg)
    g = _history(cfg, args, rho, law.dim)[0]
    if args.steps < 1 or args.t < 0:
        raise ConfigError("--steps must be positive and --t non-negative")
    # step times are snapped to grid nodes; the CSV records the node times
    dt = g.grid.dt
    times = [round(k * args.t / args.steps / dt) * dt for k in range(args.steps + 1)]
    if abs(times[-1] - args.t) > 1e-9 * max(1.0, args.t):
        print(f"evosg: step times snapped to the grid (dt={dt!r})", file=sys.stderr)
    state = HistoryState.from_history(g)
    orbit = semigroup_orbit(law, A, state, times, jump_tol=tol["jump_tol"],
                            tail_tol=tol["tail_tol"])
    header = ["step", "t", "state_norm"]
    for j in range(law.dim):
        header += [f"re_{j}", f"im_{j}"]
    rows = []
    for k, (t, s) in enumerate(zip(times, orbit)):
        row = [k, t, s.distance(HistoryState(0 * s.x, s.g.with_values(0 * s.g.values)))]
        for z in s.x:
            row += [z.real, z.imag]
        rows.append(row)
        if args.history_dir:
            Path(args.history_dir).mkdir(parents=True, exist_ok=True)
            write_signal_csv(s.g, Path(args.history_dir) / f"history_{k:04d}.csv")
    _write_rows(args.out, header, rows)
    return 0


def cmd_hycheck(args):
    cfg, base = load_config(args.config, IVP_SCHEMA)
    law, A = _operator_and_law(cfg, base)
    rho = cfg["rho"]
    gs = _history(cfg, args, rho, law.dim)
    for g in gs:
        history_value(g)
    rep = hy_bound_check(law, A, gs, rho, k_max=args.kmax, mu=args.mu, tol=args.tol)
    out = {"seed": cfg.get("seed", 0), "tol": args.tol}
    out.update(rep.as_dict())
    _write_json(out, args.out)
    return 0


def _pencil(args):
    E = read_matrix(args.E, None, "E")
    A = read_matrix(args.A, None, "A", E.shape[0])
    return MatrixPencil(E, A)


def cmd_dae_check(args):
    p = _pencil(args)
    rep = hy_condition(p, n_max=args.nmax, tol=args.tol)
    out = rep.as_dict()
    out.update({"regular": p.regular, "spectral_bound": p.spectral_bound(), "tol": args.tol,
                "iv_space_dim": iv_space(p).dim})
    _write_json(out, args.out)
    return 0 if rep.passed else 1


def cmd_dae_run(args):
    p = _pencil(args)
    x0 = _vector(args.x0)
    if x0.shape != (p.dim,):
        raise ConfigError(f"x0 has length {x0.size}, expected {p.dim}")
    if not iv_space(p).contains(x0):
        raise InadmissibleHistoryError("x0 is not a consistent initial value")
    u, _ = dae_trajectory(p, x0, t_final=args.t)
    t = u.grid.times
    keep = np.flatnonzero((t >= -0.5 * u.grid.dt) & (t <= args.t + 0.5 * u.grid.dt))
    header = ["t"] + [f"x_{j}" for j in range(p.dim)]
    keep = np.union1d(keep[:: max(1, args.every)], keep[-1:])
    rows = ([t[k], *u.values[k].real] for k in keep)
    _write_rows(args.out, header, rows)
    return 0


def _delay_setup(cfg, base):
    a, b = cfg["interval"]
    mesh = SpatialMesh(a, b, cfg["n_x"], cfg.get("boundary", "dirichlet"))
    if len(cfg["c"]) != len(cfg["h"]):
        raise ConfigError("c and h must have the same length")
    law = DelayLaw.on_mesh(mesh, cfg["h"], cfg["c"], cfg.get("k", 1.0))
    A = build_block_operator(mesh)
    rho0, c = accretivity_estimate(law, A)
    rho = rho0 + 0.5 if cfg.get("rho", "auto") == "auto" else float(cfg["rho"])
    spec = cfg["history"]
    if isinstance(spec, str):
        try:
            g = read_signal_csv(base / spec, rho)
        except (OSError, ValueError) as err:
            raise ConfigError(f"history: {err}") from err
        if g.dim != mesh.dim:
            raise ConfigError(f"history has dimension {g.dim}, the mesh needs {mesh.dim}")
    else:
        s = (mesh.nodes - a) / (b - a)
        mode, amp = spec.get("mode", 1), spec.get("amplitude", 1.0)
        prof = np.sin(mode * np.pi * s) if mesh.boundary == "dirichlet" else np.cos(mode * np.pi * s)
        x = np.concatenate([amp * prof, np.zeros(mesh.n_q)])
        # the delayed onset of M g at 0+ is cubic; h_min / 512 resolves it
        dt = cfg.get("dt", None if "n_points" in cfg else law.h_min / 512)
        g = admissible_history(law, mesh, x, rho, cfg["t_final"], cfg.get("n_points", 4096),
                               width=spec.get("width"), dt=dt)
    return mesh, law, A, rho, rho0, c, g


def cmd_delay(args):
    cfg, base = load_config(args.config, DELAY_SCHEMA)
    mesh, law, A, rho, rho0, c, g = _delay_setup(cfg, base)
    u, sol = simulate_delay(law, mesh, g, cfg["t_final"], rho, cfg.get("method", "direct"))
    header = ["t"] + [f"v_{j}" for j in range(mesh.n_v)] + [f"q_{j}" for j in range(mesh.n_q)]
    t = u.grid.times
    keep = np.flatnonzero((t >= -0.5 * u.grid.dt) & (t <= cfg["t_final"] + 0.5 * u.grid.dt))
    _write_rows(args.out, header, ([t[k], *u.values[k].real] for k in keep))
    rep = delay_report(law, mesh, g, sol, rho, rho0, c)
    rep.update({"seed": cfg.get("seed", 0), "rho_policy": cfg.get("rho", "auto"),
                "mesh": {"interval": [mesh.a, mesh.b], "n_x": mesh.n_x,
                         "boundary": mesh.boundary},
                "method": cfg.get("method", "direct")})
    report = args.report or str(Path(args.out).with_name("report.json"))
    _write_json(rep, report)
    return 0


def cmd_verify(args):
    results = run_suite(args.suite, echo=print)
    passed = all(r.passed for r in results)
    payload = {"suite": args.suite, "passed": passed, "version": __version__,
               "criteria": [r.as_dict() for r in results]}
    if args.out:
        _write_json(payload, args.out)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if passed else 1


# ---------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="evosg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"evosg {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve (d/dt M + A) u = F on a weighted grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="solution CSV")
    p.add_argument("--report", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ivp", help="initial value problem with a history")
    p.add_argument("--config", required=True)
    p.add_argument("--history", action="append", help="history CSV (t,re_0,im_0,...)")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_ivp)

    p = sub.add_parser("semigroup", help="states T(k t / steps)(x, g) for k = 0..steps")
    p.add_argument("--config", required=True)
    p.add_argument("--history", action="append")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--out", required=True, help="per-step state CSV")
    p.add_argument("--history-dir", help="also write each step's history signal here")
    p.set_defaults(func=cmd_semigroup)

    p = sub.add_parser("hycheck", help="fit (M, omega) from resolvent derivative bounds")
    p.add_argument("--config", required=True)
    p.add_argument("--history", action="append")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--mu", type=float)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hycheck)

    p = sub.add_parser("dae-check", help="resolvent-power test for the pencil (E, A)")
    p.add_argument("--E", required=True, help="CSV matrix")
    p.add_argument("--A", required=True, help="CSV matrix")
    p.add_argument("--nmax", type=int, default=32)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dae_check)

    p = sub.add_parser("dae-run", help="trajectory of E u' + A u = 0 from x0")
    p.add_argument("--E", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--x0", required=True, help="comma-separated values or a CSV file")
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--every", type=int, default=1, help="write every n-th time node")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dae_run)

    p = sub.add_parser("delay", help="1D wave equation with delays")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="fields CSV")
    p.add_argument("--report", help="report JSON (default: report.json next to --out)")
    p.set_defaults(func=cmd_delay)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--out", help="pass/fail JSON")
    p.set_defaults(func=cmd_verify)
    return ap


def _thread_limit():
    raw = os.environ.get("EVOSG_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"EVOSG_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"EVOSG_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=_thread_limit()):
            return args.func(args)
    except ConfigError as err:
        print(f"evosg: error: {err}", file=sys.stderr)
        return 2
    except EvosgError as err:
        print(f"evosg: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as err:
        print(f"evosg: LinAlgError: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"evosg: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
