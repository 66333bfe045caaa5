"""Acceptance criteria, one test per criterion, each at its stated tolerance."""

import json
import math
import time

import numpy as np
import pytest

from nodal_atlas import cli
from nodal_atlas.coupling import Trajectory, check_rule_M
from nodal_atlas.errors import GeometryError
from nodal_atlas.geometry import build_polygon, lip_domain_regions
from nodal_atlas.spectral import (multiplicity_estimate, nodal_domain, mixed_first_eigenvalue,
                                  second_eigenfunction, sector_nodal_ratio)
from nodal_atlas.spectral.nodal import second_modes, solve_domain
from nodal_atlas.verify import (certify_lip, certify_triangle, exit_rate_check,
                                rule_m_report, run_suite, sector_check)

MU2_RECT = (math.pi / 2) ** 2
RECT = build_polygon([(0, 0), (2, 0), (2, 1), (0, 1)])
TRIANGLES = [((0, 0), (4, 0), (1, 1)), ((0, 0), (3, 0), (0.8, 1.2)), ((0, 0), (5, 0), (2, 0.9))]
RECT_LIP = build_polygon([(-1, 0), (1, 0), (1, 1), (-1, 1)], kind="lip",
                         lip_params={"a": 1.0, "b": 0.0})
HEXAGON = build_polygon([(-1.4, 0), (1, 0), (1.4, 0.4), (1.4, 1), (-1, 1), (-1.4, 0.6)],
                        kind="lip", lip_params={"a": 1.0, "b": 0.4})


def test_sector_constant(criterion):
    t0 = time.perf_counter()
    r = sector_nodal_ratio()
    dt = time.perf_counter() - t0
    ok = abs(r - 0.6276) <= 1e-4 and dt < 1.0
    assert criterion(1, "sector constant a0/a1", ok, f"ratio={r:.9f}, {dt:.3f}s")


def test_rectangle_spectral_oracle(criterion):
    t0 = time.perf_counter()
    eig, ns = second_eigenfunction(RECT, 0.02)
    dt = time.perf_counter() - t0
    rel = abs(eig.mu2 - MU2_RECT) / MU2_RECT
    dist = float(np.abs(ns.points()[:, 0] - 1.0).max())
    ok = rel <= 0.01 and dist <= 0.02 and dt < 60
    assert criterion(2, "rectangle spectral oracle", ok,
                     f"mu2 rel err={rel:.2e}, nodal dist={dist:.2e}, {dt:.1f}s")


@pytest.mark.slow
def test_sector_fem(criterion):
    t0 = time.perf_counter()
    rep = sector_check(h=0.01, chords=24, opening=0.15)
    dt = time.perf_counter() - t0
    ok = rep.passed and rep.measured["relative_difference"] <= 0.02 and dt < 300
    assert criterion(3, "sector FEM nodal radius", ok,
                     f"mean radius={rep.measured.get('mean_nodal_radius')}, {dt:.1f}s")


@pytest.mark.slow
def test_example1_claims(criterion):
    results = []
    for C in TRIANGLES:
        r1, r2 = certify_triangle(*C, 0.01)
        results.append((C, r1.status, r2.status))
    ok = all(s1 == "pass" and s2 == "pass" for _, s1, s2 in results)
    assert criterion(4, "Example 1 claims on three triangles", ok,
                     "; ".join(f"{C[2]}: {s1}/{s2}" for C, s1, s2 in results))


def test_example2_claims(criterion):
    out = []
    for name, D, a, b in (("rectangle", RECT_LIP, 1.0, 0.0), ("hexagon", HEXAGON, 1.0, 0.4)):
        r1, r2 = certify_lip(D, a, b, 0.02)
        out.append((name, r1.status, r2.status))
    try:
        lip_domain_regions(0.6, 0.5)
        rejected = False
    except GeometryError:
        rejected = True
    ok = all(s1 == "pass" and s2 == "pass" for _, s1, s2 in out) and rejected
    assert criterion(5, "Example 2 claims and lip constraint", ok,
                     "; ".join(f"{n}: {s1}/{s2}" for n, s1, s2 in out)
                     + f"; (0.6,0.5) rejected={rejected}")


@pytest.mark.slow
def test_coupling_certificate(criterion):
    t0 = time.perf_counter()
    reps = run_suite({"claims": ["THM1-premise", "ANGLE-WINDOW"],
                      "domain": {"vertices": [[0, 0], [4, 0], [1, 1]],
                                 "kind": "obtuse-triangle"},
                      "N": 40, "dt": 1e-4, "t_max": 20.0, "seed": 42, "h": 0.02})
    dt = time.perf_counter() - t0
    thm, ang = reps
    frac = thm.measured["coupled_fraction"]
    ok = (thm.passed and ang.passed and thm.measured["paths"] == 200 and frac >= 0.9
          and dt < 600)
    assert criterion(6, "Example 1 coupling certificate", ok,
                     f"failed paths={thm.measured['failed_paths']}, angle violations="
                     f"{ang.measured['violations']}, coupled={frac:.3f}, {dt:.1f}s")


def _synthetic_violation():
    th = np.linspace(0.0, 0.3, 6)
    X = np.tile([0.5, 0.5], (6, 1))
    Y = X + 0.6 * np.c_[np.cos(th), np.sin(th)]
    dt = 1e-4
    return Trajectory(t=np.arange(6) * dt, X=X, Y=Y, coupled=np.zeros(6, bool),
                      event_t=np.array([1.0, 2.0, 3.0]) * dt,
                      event_which=np.zeros(3, np.int8), event_edge=np.zeros(3, np.int64),
                      event_push=np.zeros(3), zeta=None, seed=0, dt=dt)


@pytest.mark.slow
def test_rule_M(criterion):
    rep = rule_m_report(RECT, [((0.5, 0.5), (1.5, 0.5))], N=40, dt=1e-4, t_max=20.0, seed=42)
    flagged = not check_rule_M(_synthetic_violation(), RECT).passes()
    ok = rep.passed and rep.measured["windows"] > 0 and flagged
    assert criterion(7, "rule (M) monitor", ok,
                     f"windows={rep.measured['windows']}, drift={rep.measured['max_hinge_drift']:.1e}"
                     f", decrease={rep.measured['max_alpha_decrease']:.1e}"
                     f", bound={rep.tolerances['bound']:.1e}, synthetic flagged={flagged}")


def test_mixed_identity(criterion):
    md = second_modes(RECT, 0.02)[0]
    B = nodal_domain(md.mesh, md.u, -1)
    lam = mixed_first_eigenvalue(B.mesh)
    rel = abs(lam - md.eig.mu2) / md.eig.mu2
    left = bool(np.all(B.mesh.nodes[:, 0] <= 1.0 + 0.02))
    ok = rel <= 0.02 and left
    assert criterion(8, "mixed eigenvalue identity", ok,
                     f"lambda1={lam:.5f}, mu2={md.eig.mu2:.5f}, rel={rel:.2e}")


@pytest.mark.slow
def test_exit_rate(criterion):
    rep = exit_rate_check(RECT, 0.02, N=2000, dt=1e-4, seed=42)
    ok = rep.passed and rep.measured["relative_difference"] <= 0.15
    assert criterion(9, "exit-rate slope", ok,
                     f"slope={rep.measured.get('slope')}, mu2={rep.measured.get('mu2'):.5f}")


@pytest.mark.slow
def test_structural_facts(criterion):
    lines = []
    ok = True
    domains = [("triangle %d" % i, build_polygon(C), 1) for i, C in enumerate(TRIANGLES)]
    domains += [("rectangle lip", RECT_LIP, 1), ("hexagon", HEXAGON, 1),
                ("unit square", build_polygon([(0, 0), (1, 0), (1, 1), (0, 1)]), 2)]
    for name, D, mult_expected in domains:
        h = 0.01 if D.diameter > 3 else 0.02
        ev = solve_domain(D, h)
        mult = multiplicity_estimate(ev)
        const = abs(ev.eigenvalues[0]) <= 1e-8 and np.std(ev.eigenvectors[:, 0]) <= 1e-6
        counts = [m.nodal.domain_count for m in second_modes(D, h)]
        good = const and mult == mult_expected and all(c == 2 for c in counts)
        ok &= good
        lines.append(f"{name}: mu1={ev.eigenvalues[0]:.1e} mult={mult} domains={counts}")
    assert criterion(10, "structural facts", ok, "; ".join(lines))


def test_determinism(criterion, tmp_path):
    spec = tmp_path / "tri.json"
    spec.write_text(json.dumps({"vertices": [[0, 0], [4, 0], [1, 1]],
                                "kind": "obtuse-triangle"}))
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"domain": "tri.json", "h": 0.05}))
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes = (cli.main(["solve", str(spec), "--h", "0.05", "--out", str(out / "solve")]),
                 cli.main(["simulate", str(spec), "--x", "0.3,0.1", "--y", "1.2,0.6",
                           "--tmax", "0.5", "--out", str(out / "sim")]),
                 cli.main(["certify", str(cfg), "--paths", "3", "--tmax", "1",
                           "--out", str(out / "cert")]))
        files = {str(p.relative_to(out)): p.read_bytes()
                 for p in sorted(out.rglob("*")) if p.is_file()}
        runs.append((codes, files))
    ok = runs[0] == runs[1] and runs[0][0] == (0, 0, 0) and len(runs[0][1]) >= 10
    assert criterion(11, "determinism of all outputs", ok,
                     f"{len(runs[0][1])} files compared, exit codes {runs[0][0]}")
