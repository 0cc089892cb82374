"""Command-line front end: parameter scans writing CSV/JSON tables and gnuplot scripts.

Exit codes: 0 success, 1 a request the library rejects (size limits, bad
input files), 2 bad usage (unknown flag, malformed range), 3 a physical
precondition is violated (odd N, N = 2 mod 4 for XXZ commands).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ed import (
    DegeneracyError,
    free_fermion_energy,
    ground_state,
    load_ground_state,
    neel_state,
    save_ground_state,
    xxz_hamiltonian,
)
from .fitkit import MODELS, fit_model, luttinger, r_squared
from .mbft import fourier_matrix, load_state, momentum_residual, save_state, transform
from .modes import BC, build_grid
from .quadratic import (
    QuadraticModel,
    block_entropy_quadratic,
    bogoliubov,
    finite_entropy_per_site,
    mode_entropy_density,
    scaling_collapse,
    single_mode_approx,
    thermo_entropy_per_site,
)
from .rdm import entropy_scan, minimax_entropy
from .state import Basis, ManyBodyState
from . import analysis

log = logging.getLogger("kspace_ent")


class PhysicsError(ValueError):
    """A request that is well-formed but physically inadmissible (exit code 3)."""


# --------------------------------------------------------------------------
# argument types
# --------------------------------------------------------------------------


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive), a comma list, or a single number."""
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        values = [float(t) for t in text.split(",") if t.strip()]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step with step > 0, or a,b,c") from None


def parse_ints(text: str) -> list[int]:
    vals = parse_range(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _require_even(Ns) -> None:
    for N in Ns:
        if N < 2 or N % 2:
            raise PhysicsError(f"N={N}: system size must be even")


def _require_xxz(Ns) -> None:
    for N in Ns:
        if N < 4 or N % 2:
            raise PhysicsError(f"N={N}: system size must be even and >= 4")
        if N % 4:
            raise PhysicsError(
                f"N={N} is 2 mod 4: the XXZ ground state is exactly degenerate for every Delta; "
                "N must be a multiple of 4"
            )


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".15g")
    return str(v)


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if np.isfinite(f) else None
    if isinstance(v, np.bool_):
        return bool(v)
    return v


class Table:
    def __init__(self, columns: list[str]):
        self.columns = columns
        self.rows: list[list] = []
        self.extra: dict = {}

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row length does not match columns")
        self.rows.append(list(values))


def _render(table: Table, fmt: str, config: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    doc = {
        "config": config,
        "results": [dict(zip(table.columns, map(_json_safe, row))) for row in table.rows],
        "version": __version__,
    }
    if table.extra:
        doc["extra"] = _json_safe(table.extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


PLOT_SPECS = {
    # command: (x column, y columns, group column)
    "xy-scan": ("x", ["S_P"], "gamma"),
    "itf-scan": ("J", ["s_per_site", "s_singlemode"], "N"),
    "entropy-scan": ("param", ["S_vn"], "delta"),
    "xxz-size-scan": ("N", ["S_P_half", "S_max"], "delta"),
    "occupations": ("k", ["n_k"], "delta"),
}


def _plot_script(command: str, data_path: Path, table: Table) -> str | None:
    spec = PLOT_SPECS.get(command)
    if spec is None:
        return None
    xcol, ycols, _ = spec
    cols = {c: i + 1 for i, c in enumerate(table.columns)}
    lines = [
        f"# gnuplot script for {data_path.name}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xcol}'",
        f"set terminal pngcairo size 800,600",
        f"set output '{data_path.with_suffix('.png').name}'",
    ]
    plots = [f"'{data_path.name}' using {cols[xcol]}:{cols[y]} with linespoints title '{y}'" for y in ycols]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_xy_scan(a) -> Table:
    _require_even(a.N)
    if a.table == "modes":
        t = Table(["N", "J", "gamma", "k", "v2", "s_k"])
        for N in a.N:
            grid = build_grid(N, a.bc)
            for g in a.gamma:
                sol = bogoliubov(QuadraticModel(a.J, g), grid)
                for j in grid.positive():
                    t.add(N, a.J, g, grid.momenta[j], sol.v2[j], mode_entropy_density(grid.momenta[j], a.J, g))
        return t
    t = Table(["N", "J", "gamma", "n", "x", "S_P"])
    for N in a.N:
        grid = build_grid(N, a.bc)
        for g in a.gamma:
            sol = bogoliubov(QuadraticModel(a.J, g), grid)
            for n in range(1, len(grid.positive()) + 1):
                from .modes import make_block

                S = block_entropy_quadratic(sol, make_block(grid, "P", n, a.kF)).vn
                t.add(N, a.J, g, n, n / N, S)
    return t


def cmd_itf_scan(a) -> Table:
    _require_even(a.N)
    if a.collapse:
        t = Table(["N", "J", "Jt", "s_N", "s_tilde"])
        rows = scaling_collapse(a.N, scaled=a.Jt) if a.Jt else scaling_collapse(a.N, a.J)
        for r in rows:
            t.add(*r)
        return t
    t = Table(["N", "J", "S_P_half", "s_per_site", "s_singlemode", "n_f"])
    for N in sorted(a.N):
        grid = build_grid(N, a.bc)
        for J in a.J:
            s = finite_entropy_per_site(J, N, 1.0, a.bc)
            sol = bogoliubov(QuadraticModel(J, 1.0), grid)
            t.add(N, J, s * N, s, single_mode_approx(J, N) / N, sol.n_f)
    t.extra["s0"] = {str(J): thermo_entropy_per_site(J) for J in a.J}
    return t


def _ground(N, delta, a):
    H = xxz_hamiltonian(N, delta)
    gs = ground_state(H, method=a.method, tol=a.tol, seed=a.seed)
    return H, gs


def cmd_xxz_gs(a) -> Table:
    _require_xxz(a.N)
    t = Table(["N", "delta", "energy", "residual", "gap", "low_gap", "free_fermion_energy"])
    for N in a.N:
        for d in a.delta:
            H, gs = _ground(N, d, a)
            ff = free_fermion_energy(N) if d == 0 else float("nan")
            t.add(N, d, gs.energy, gs.residual, gs.gap, gs.low_gap, ff)
            if a.checkpoint:
                path = Path(a.checkpoint.format(N=N, delta=d))
                save_ground_state(path, N, d, gs.vector)
    return t


def _position_state(a) -> tuple[ManyBodyState, float]:
    if a.load:
        if a.load.endswith(".state"):
            st, d = load_state(a.load)
            return st, d
        N, d, vec = load_ground_state(a.load)
        H = xxz_hamiltonian(N, d)
        return ManyBodyState.from_sector(N, H.basis.states, vec, Basis.POSITION, N // 2), d
    if a.neel:
        N = a.N[0]
        _require_even([N])
        return neel_state(N), float("inf")
    _require_xxz(a.N)
    _, gs = _ground(a.N[0], a.delta[0], a)
    H = xxz_hamiltonian(a.N[0], a.delta[0])
    return ManyBodyState.from_sector(a.N[0], H.basis.states, gs.vector, Basis.POSITION, a.N[0] // 2), a.delta[0]


def cmd_mbft(a) -> Table:
    st, d = _position_state(a)
    grid = build_grid(st.N, BC.APBC)
    m = transform(st, fourier_matrix(grid), a.transform)
    if a.save:
        save_state(a.save, m, d)
    t = Table(["N", "delta", "k", "n_k"])
    occ = m.occupations()
    for j, k in enumerate(grid.momenta):
        t.add(st.N, d, k, occ[j])
    t.extra.update(norm=m.norm, momentum_residual=momentum_residual(m, grid))
    return t


def _try_fit(fn, *args) -> dict:
    try:
        return fn(*args).to_dict()
    except (ValueError, ArithmeticError) as exc:
        return {"error": str(exc)}


def _momentum_states(a):
    for N in a.N:
        for d in a.delta:
            yield N, d, analysis.xxz_momentum_state(N, d, method=a.method, tol=a.tol, seed=a.seed)


def cmd_entropy_scan(a) -> Table:
    _require_xxz(a.N)
    cols = ["N", "delta", "family", "param", "S_vn"] + [f"S_{al:g}" for al in a.alpha]
    t = Table(cols)
    for N, d, m in _momentum_states(a):
        prof = entropy_scan(m, a.family, a.kF, a.alpha)
        for p, r in prof.points:
            t.add(N, d, a.family, p, r.vn, *[r.renyi[al] for al in a.alpha])
        if a.fit and a.family == "pair":
            t.extra[f"{N},{d}"] = _try_fit(analysis.pair_profile_fit, prof, a.kF)
    return t


def cmd_xxz_size_scan(a) -> Table:
    _require_xxz(a.N)
    t = Table(["N", "delta", "S_P_half", "S_max", "n_at_max"])
    data = {}
    for N, d, m in _momentum_states(a):
        sp = analysis.positive_half_entropy(m)
        smax, nmax = analysis.energy_block_max(m, a.kF)
        t.add(N, d, sp, smax, nmax)
        data.setdefault(d, []).append((N, sp, smax))
    if a.fit:
        for d, rows in data.items():
            if len(rows) >= 4:
                rows.sort()
                lin = fit_model([(n, s) for n, s, _ in rows], "linear")
                entry = {"linear_S_P_half": dict(lin.to_dict(), r2=r_squared(lin, [(n, s) for n, s, _ in rows]))}
                pts = [(n, s) for n, _, s in rows]
                entry["log_correction_S_max"] = _try_fit(fit_model, pts, "log_correction")
                entry["power_S_max"] = _try_fit(fit_model, pts, "power")
                t.extra[str(d)] = entry
    return t


def cmd_occupations(a) -> Table:
    _require_xxz(a.N)
    t = Table(["N", "delta", "k", "n_k", "alpha_fit", "alpha_theory"])
    for N, d, m in _momentum_states(a):
        grid = build_grid(N, BC.APBC)
        occ = m.occupations()
        fit = _try_fit(analysis.occupation_exponent, occ, grid, a.kF)
        alpha_fit = fit["params"]["b"] if "params" in fit else float("nan")
        try:
            theory = luttinger(d)[1]
        except ValueError:
            theory = float("nan")
        for j, k in enumerate(grid.momenta):
            t.add(N, d, k, occ[j], alpha_fit, theory)
    return t


def cmd_neel_check(a) -> Table:
    N = a.N[0]
    if N % 4:
        raise PhysicsError(f"N={N}: the Neel reference needs N a multiple of 4")
    rep = analysis.neel_check(N)
    t = Table(["N", "block", "S_transformed", "S_closed_form"])
    for name, (s_num, s_ref) in rep["entropies"].items():
        t.add(N, name, s_num, s_ref)
    t.extra.update({k: v for k, v in rep.items() if k != "entropies"})
    return t


def cmd_minimax(a) -> Table:
    if a.neel:
        st = transform(neel_state(a.N[0]), fourier_matrix(build_grid(a.N[0])))
        d = float("inf")
    else:
        _require_xxz(a.N[:1])
        d = a.delta[0]
        st = analysis.xxz_momentum_state(a.N[0], d, method=a.method, tol=a.tol, seed=a.seed)
    res = minimax_entropy(st, a.n_max, heuristic=a.heuristic, seed=a.seed)
    t = Table(["N", "delta", "n", "block", "S_min"])
    for n, b, v in res.per_size:
        t.add(st.N, d, n, " ".join(map(str, b.indices)), v)
    t.extra.update(n_star=res.n, block_star=list(res.block.indices), S_M=res.value, heuristic=res.heuristic)
    return t


def cmd_fit(a) -> Table:
    with open(a.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    pts = []
    for r in rows:
        if a.where:
            key, val = a.where.split("=", 1)
            if float(r[key]) != float(val):
                continue
        x, y = float(r[a.x]), float(r[a.y])
        if a.xmin is not None and x < a.xmin or a.xmax is not None and x > a.xmax:
            continue
        pts.append((x, y))
    res = fit_model(pts, a.model)
    t = Table(["model", "param", "value"])
    for k, v in res.params.items():
        t.add(res.model, k, v)
    t.extra.update(rss=res.rss, converged=res.converged, iterations=res.iterations, n_points=len(pts))
    return t


COMMANDS = {
    "xy-scan": cmd_xy_scan,
    "itf-scan": cmd_itf_scan,
    "xxz-gs": cmd_xxz_gs,
    "mbft": cmd_mbft,
    "entropy-scan": cmd_entropy_scan,
    "xxz-size-scan": cmd_xxz_size_scan,
    "occupations": cmd_occupations,
    "neel-check": cmd_neel_check,
    "minimax": cmd_minimax,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="default: from --out suffix, else csv")
    common.add_argument("--emit-plot", action="store_true", help="also write a gnuplot script next to --out")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="worker count; output is identical for any value")
    common.add_argument("-v", "--verbose", action="store_true")

    xxz = argparse.ArgumentParser(add_help=False)
    xxz.add_argument("--N", type=parse_ints, default=[12], help="sizes (multiples of 4)")
    xxz.add_argument("--delta", type=parse_range, default=[0.5])
    xxz.add_argument("--method", choices=["lanczos", "dense"], default="lanczos")
    xxz.add_argument("--tol", type=float, default=1e-10)
    xxz.add_argument("--kF", type=float, default=np.pi / 2)

    p = argparse.ArgumentParser(prog="kspace-ent", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("xy-scan", parents=[common], help="XY chain: S(P_n) or per-mode data over a gamma sweep")
    s.add_argument("--gamma", type=parse_range, default=parse_range("0:1.4:0.14"))
    s.add_argument("--J", type=float, default=0.0)
    s.add_argument("--N", type=parse_ints, default=[100])
    s.add_argument("--bc", choices=["APBC", "PBC"], default="APBC")
    s.add_argument("--kF", type=float, default=np.pi / 2)
    s.add_argument("--table", choices=["blocks", "modes"], default="blocks")

    s = sub.add_parser("itf-scan", parents=[common], help="Ising chain: s_N(J), single-mode approximation, collapse")
    s.add_argument("--J", type=parse_range, default=parse_range("0:2:0.05"))
    s.add_argument("--N", type=parse_ints, default=[200])
    s.add_argument("--bc", choices=["APBC", "PBC"], default="APBC")
    s.add_argument("--collapse", action="store_true", help="emit the (N, J, Jt, s_N, s_tilde) collapse table")
    s.add_argument("--Jt", type=parse_range, help="scaling-variable grid for --collapse")

    s = sub.add_parser("xxz-gs", parents=[common, xxz], help="XXZ ground state by exact diagonalisation")
    s.add_argument("--checkpoint", help="write ground vectors; may contain {N} and {delta}")

    s = sub.add_parser("mbft", parents=[common, xxz], help="many-body Fourier transform and momentum residual")
    s.add_argument("--neel", action="store_true", help="transform the Neel state instead of a ground state")
    s.add_argument("--load", help="ground-state checkpoint or .state file to transform")
    s.add_argument("--save", help="write the momentum-basis state (.state)")
    s.add_argument("--transform", choices=["givens", "determinant"], default="givens")

    s = sub.add_parser("entropy-scan", parents=[common, xxz], help="block-family entropy profiles of XXZ ground states")
    s.add_argument("--family", choices=["P", "pair", "E"], default="pair")
    s.add_argument("--alpha", type=parse_range, default=[])
    s.add_argument("--fit", action="store_true", help="fit pair profiles to the exponential-with-offset law")

    s = sub.add_parser("xxz-size-scan", parents=[common, xxz], help="S(P_N/2) and max S(E_n) versus N")
    s.add_argument("--fit", action="store_true")

    sub.add_parser("occupations", parents=[common, xxz], help="momentum occupations and Luttinger exponent fit")

    s = sub.add_parser("neel-check", parents=[common], help="Neel state: transform vs closed form")
    s.add_argument("--N", type=parse_ints, default=[8])

    s = sub.add_parser("minimax", parents=[common, xxz], help="minimax block entropy")
    s.add_argument("--neel", action="store_true")
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--heuristic", action="store_true")

    s = sub.add_parser("fit", parents=[common], help="fit a CSV column pair to a model")
    s.add_argument("--input", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--model", choices=sorted(MODELS), required=True)
    s.add_argument("--where", help="row filter col=value")
    s.add_argument("--xmin", type=float)
    s.add_argument("--xmax", type=float)
    return p


def _config_echo(args, argv) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "emit_plot", "verbose", "format")}
    return {"argv": list(argv), "args": _json_safe(cfg)}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad usage
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        table = COMMANDS[args.command](args)
    except (PhysicsError, DegeneracyError) as exc:
        print(f"kspace-ent {args.command}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"kspace-ent {args.command}: {exc}", file=sys.stderr)
        return 1
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    text = _render(table, fmt, _config_echo(args, argv))
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        if args.emit_plot:
            script = _plot_script(args.command, out, table)
            if script is not None and fmt == "csv":
                out.with_suffix(".gp").write_text(script)
            elif fmt != "csv":
                log.warning("plot scripts reference CSV data; rerun with --format csv")
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
