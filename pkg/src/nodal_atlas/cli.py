"""Command-line front end: ``nodal-atlas {solve,simulate,certify,sector-ratio}``.

Exit codes: 0 success, 1 claim failure, 2 parse error, 3 mesh or
eigensolver error, 4 geometry error, 5 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import (ConfigError, GeometryError, MeshError, SimulationError, SpecError,
                     SpectralError)

EXIT_OK, EXIT_CLAIM, EXIT_PARSE, EXIT_MESH, EXIT_GEOMETRY, EXIT_CONFIG = range(6)
DEFAULT_SEED = 42
DEFAULT_DT = 1e-4
DEFAULT_T_MAX = 20.0
SEED_ENV = "NODAL_ATLAS_SEED"
FORMATS = ("csv", "json", "svg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nodal-atlas", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, sim=False):
        sp.add_argument("--out", default=".", help="output directory (created if missing)")
        sp.add_argument("--format", action="append", choices=FORMATS,
                        help="output formats to write (repeatable; default all)")
        sp.add_argument("--h", type=float, help="mesh size (default 0.02 * diameter)")
        if sim:
            sp.add_argument("--dt", type=float, help="time step (default 1e-4)")
            sp.add_argument("--tmax", type=float, help="time horizon (default 20)")
            sp.add_argument("--seed", type=int)

    s = sub.add_parser("solve", help="second eigenfunction and nodal line of a domain")
    s.add_argument("domain", help="domain spec JSON file")
    common(s)

    s = sub.add_parser("simulate", help="simulate one mirror-coupled pair")
    s.add_argument("domain", help="domain spec JSON file")
    s.add_argument("--x", required=True, help="start of X as 'x,y'")
    s.add_argument("--y", required=True, help="start of Y as 'x,y'")
    common(s, sim=True)

    s = sub.add_parser("certify", help="run a claim suite")
    s.add_argument("config", help="suite config JSON file")
    common(s, sim=True)
    s.add_argument("--paths", type=int, help="paths per start pair (default 40)")

    sub.add_parser("sector-ratio", help="print a0, a1 and a0/a1")
    return p


def resolve_seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def _formats(args) -> set[str]:
    return set(args.format or FORMATS)


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _regions_for(D):
    from .geometry import (lip_domain_regions, obtuse_triangle_markers, region_A1_triangle,
                           region_A_triangle, triangle_corners)

    if D.kind == "obtuse-triangle":
        m = obtuse_triangle_markers(*triangle_corners(D))
        return [("region A", region_A_triangle(m, D)), ("region A1", region_A1_triangle(m, D))]
    if D.kind == "lip" and D.lip_params:
        A, A1 = lip_domain_regions(D.lip_params["a"], D.lip_params.get("b", 0.0), D)
        return [("region A", A), ("region A1", A1)]
    return []


def cmd_solve(args) -> int:
    from . import io
    from .spectral import multiplicity_estimate, second_eigenfunction, write_mesh_text
    from .svg import nodal_figure

    D = io.domain_from_spec(Path(args.domain))
    h = args.h if args.h is not None else 0.02 * D.diameter
    out = _outdir(args.out)
    eig, ns = second_eigenfunction(D, h)
    mult = multiplicity_estimate(eig)
    fmts = _formats(args)
    if "json" in fmts:
        io.write_eigen_json(eig, out / "eigen.json", {
            "h": h, "domain": D.to_spec(), "domain_count": ns.domain_count,
            "multiplicity": mult, "nodes": eig.mesh.n_nodes, "triangles": eig.mesh.n_triangles})
    if "csv" in fmts:
        io.write_eigenvector_csv(eig.mesh, eig.eigenvectors, out / "eigenvectors.csv")
        io.write_nodal_csv(ns, out / "nodal.csv")
        write_mesh_text(eig.mesh, out / "mesh.txt")
    if "svg" in fmts:
        nodal_figure(D, ns.segments, _regions_for(D), f"h = {h:.4g}").save(out / "nodal.svg")
    print(f"mu2 = {eig.mu2:.9f}  nodal domains = {ns.domain_count}  multiplicity = {mult}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import io
    from .coupling import simulate_coupling, write_events_csv, write_trajectory_csv
    from .svg import mirror_figure

    D = io.domain_from_spec(Path(args.domain))
    x, y = io.parse_point(args.x), io.parse_point(args.y)
    seed = resolve_seed(args.seed)
    dt = args.dt if args.dt is not None else DEFAULT_DT
    t_max = args.tmax if args.tmax is not None else DEFAULT_T_MAX
    out = _outdir(args.out)
    tr = simulate_coupling(D, x, y, dt, t_max, seed)
    fmts = _formats(args)
    if "csv" in fmts:
        write_trajectory_csv(tr, out / "trajectory.csv")
        write_events_csv(tr, out / "events.csv")
    if "json" in fmts:
        io.write_json({"domain": D.to_spec(), "x": x, "y": y, "dt": dt, "t_max": t_max,
                       "seed": seed, "zeta": tr.zeta, "states": len(tr.t),
                       "events": len(tr.event_t)}, out / "run.json")
    if "svg" in fmts:
        mirror_figure(D, tr, title=f"seed {seed}").save(out / "mirror.svg")
    print(f"zeta = {tr.zeta:.6g}" if tr.zeta is not None else "not coupled")
    return EXIT_OK


def _load_config(path: Path) -> dict:
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise SpecError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("suite config must be a JSON object")
    return cfg


def cmd_certify(args) -> int:
    from . import io
    from .verify import suite_passed, run_suite

    path = Path(args.config)
    cfg = _load_config(path)
    dom = cfg.get("domain")
    if isinstance(dom, str):
        p = Path(dom)
        if not p.is_absolute() and not dom.lstrip().startswith("{"):
            p = path.parent / p
        cfg["domain"] = io.domain_from_spec(p)
    elif isinstance(dom, dict):
        cfg["domain"] = io.domain_from_spec(dom)
    for key, val in (("h", args.h), ("dt", args.dt), ("t_max", args.tmax), ("N", args.paths)):
        if val is not None:
            cfg[key] = val
    cfg["seed"] = resolve_seed(args.seed if args.seed is not None else cfg.get("seed"))
    out = _outdir(args.out)
    reports = run_suite(cfg)
    ok = suite_passed(reports)
    summary = "\n".join(r.summary() for r in reports)
    summary += f"\nsuite: {'PASS' if ok else 'FAIL'} ({len(reports)} claims)\n"
    fmts = _formats(args)
    if "json" in fmts:
        io.write_json([r.to_dict() for r in reports], out / "report.json")
    (out / "summary.txt").write_text(summary)
    print(summary, end="")
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_sector_ratio(args) -> int:
    from .spectral import sector_constants

    a0, a1, ratio = sector_constants()
    print(f"a0 = {a0:.9f}")
    print(f"a1 = {a1:.9f}")
    print(f"ratio = {ratio:.9f}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "certify": cmd_certify,
            "sector-ratio": cmd_sector_ratio}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SpecError as exc:
        code, msg = EXIT_PARSE, f"parse error: {exc}"
    except (MeshError, SpectralError) as exc:
        code, msg = EXIT_MESH, f"mesh/solver error: {exc}"
    except GeometryError as exc:
        code, msg = EXIT_GEOMETRY, f"geometry error: {exc}"
    except ConfigError as exc:
        code, msg = EXIT_CONFIG, f"config error: {exc}"
    except SimulationError as exc:
        code, msg = EXIT_CLAIM, f"simulation error: {exc}"
    print(f"nodal-atlas: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
