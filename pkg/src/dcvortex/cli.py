"""Batch front door: solve / stability / verify-reduction / verify-hk / deg-p1.

Exit codes: 0 all checks passed, 2 a check failed or the solver did not
converge (report still written), 1 usage or configuration error.
DCVORTEX_THREADS caps the BLAS/FFT thread pools (read before numpy loads).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

if "DCVORTEX_THREADS" in os.environ:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, os.environ["DCVORTEX_THREADS"])

import numpy as np

from . import geometry as geo
from . import hyperkahler, reduction, stability, vortex
from .config import ConfigError, RunConfig, parse_config
from .errors import ConstraintError, DomainError
from .report import Report, make_check, provenance_block, write_history_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2


def _constants_block(c: vortex.VortexConstants) -> dict:
    return {
        "tau": c.tau,
        "tau_prime": c.tau_prime,
        "sigma": c.sigma,
        "lambda_he": c.lambda_he if c.reduction_enabled else None,
    }


def _write_report(report: Report, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(report.to_json())
    return path


def _solve_pipeline(cfg: RunConfig, out_dir: Path, seed):
    q = cfg.quadruplet()
    c = cfg.constants()
    h, rep = vortex.solve(q, c, cfg.solver)
    csv_path = out_dir / "history.csv"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_history_csv(csv_path, rep.history)
    return q, c, h, rep, csv_path


def cmd_solve(cfg: RunConfig, out_dir: Path, seed, check_tol) -> Report:
    q, c, h, rep, csv_path = _solve_pipeline(cfg, out_dir, seed)
    target = check_tol or cfg.check_tol or cfg.solver.target_residual
    report = Report(
        command="solve",
        seed=seed,
        constants=_constants_block(c),
        provenance=provenance_block(cfg.raw_text, seed),
    )
    report.checks.append(make_check("final_sup_residual", rep.sup(), target))
    identity = vortex.trace_identity_check(q, h, c)
    report.checks.append(make_check("trace_identity", identity, 1e-8))
    report.solver = {
        "converged": rep.converged,
        "iterations": rep.iterations,
        "final_sup_r1": rep.final_sup_r1,
        "final_sup_r2": rep.final_sup_r2,
        "message": rep.message,
        "history_csv": csv_path.name,
    }
    return report


def cmd_stability(cfg: RunConfig, out_dir: Path, seed, check_tol) -> Report:
    q = cfg.quadruplet()
    c = cfg.constants()
    if cfg.catalog_path:
        catalog = stability.catalog_from_text(Path(cfg.catalog_path).read_text())
    else:
        catalog = stability.coordinate_subquadruplets(q)
    for r1, r2, d1, d2 in cfg.user_subobjects:
        catalog.add(stability.QuadInvariants(r1, r2, d1, d2), "user-supplied")
    vt = stability.verdict_tau(catalog, c.tau)
    vs = stability.verdict_sigma(catalog, c.sigma)
    equiv = stability.equivalence_check(catalog, c.sigma)
    report = Report(
        command="stability",
        seed=seed,
        constants=_constants_block(c),
        provenance=provenance_block(cfg.raw_text, seed),
    )
    report.checks.append(make_check("theta_mu_equivalence_identity", 0.0 if equiv else 1.0, 0.5))
    report.checks.append(
        make_check("tau_sigma_verdicts_agree", 0.0 if vt.verdict == vs.verdict else 1.0, 0.5)
    )

    def verdict_dict(v):
        return {
            "verdict": v.verdict,
            "vacuous": v.vacuous,
            "witness_value": str(v.witness_value) if v.witness_value is not None else None,
            "witnesses": [
                {"invariants": list(e.invariants), "provenance": e.provenance} for e in v.witnesses
            ],
            "note": v.note,
        }

    report.stability = {
        "catalog": [
            {"invariants": list(e.invariants), "provenance": e.provenance} for e in catalog.entries
        ],
        "tau_verdict": verdict_dict(vt),
        "sigma_verdict": verdict_dict(vs),
    }
    return report


def cmd_verify_reduction(cfg: RunConfig, out_dir: Path, seed, check_tol) -> Report:
    q, c, h, rep, csv_path = _solve_pipeline(cfg, out_dir, seed)
    rng = np.random.default_rng(seed if seed is not None else 0)
    charts = geo.p1_quadrature(cfg.n_radial, cfg.n_angular)
    sigma = float(c.sigma)
    assembled = reduction.assemble_F(
        q, h, sigma, n_points=cfg.n_product_points, rng=rng, charts=charts
    )
    he = reduction.he_residual_product(assembled, c)
    integ = reduction.integrability_residual(q, sigma, rng=rng, charts=charts)
    report = Report(
        command="verify-reduction",
        seed=seed,
        constants=_constants_block(c),
        provenance=provenance_block(cfg.raw_text, seed),
    )
    report.checks.append(make_check("solver_converged", rep.sup(), cfg.solver.target_residual))
    report.checks.append(make_check("he_product_residual", he.sup_diagonal, check_tol or cfg.check_tol or 1e-6))
    report.checks.append(make_check("he_offdiagonal", he.sup_offdiagonal, 1e-8))
    report.checks.append(make_check("integrability", integ.total, 1e-9))
    for n in range(-4, 5):
        report.checks.append(make_check(f"deg_p1({n})", abs(reduction.deg_p1(n, charts) - n), 1e-6))
    fs_const = reduction.fs_contraction_constant(2, charts)
    report.checks.append(make_check("fs_contraction_constant", abs(fs_const + 4j * np.pi), 1e-8))
    report.verification = {
        "lambda_used": [he.lambda_used.real, he.lambda_used.imag],
        "rescale_constant": he.rescale_constant,
        "n_product_points": he.n_points,
        "calibration": {
            "c_alpha": assembled.forms.c_alpha,
            "c_beta": assembled.forms.c_beta,
            "raw_ratio": assembled.forms.raw_ratio,
        },
        "history_csv": csv_path.name,
    }
    return report


def cmd_verify_hk(cfg: RunConfig, out_dir: Path, seed, check_tol) -> Report:
    rng = np.random.default_rng(seed if seed is not None else 0)
    grid = cfg.grid()
    r1, r2 = len(cfg.block_degrees1), len(cfg.block_degrees2)
    c = cfg.constants()
    quat_worst = 0.0
    for _ in range(cfg.hk_draws):
        a = hyperkahler.random_tangent(grid, r1, r2, rng)
        for op in (hyperkahler.apply_I, hyperkahler.apply_J, hyperkahler.apply_K):
            b = op(op(a))
            quat_worst = max(
                quat_worst,
                *(geo.sup_norm(x + y) for x, y in zip(
                    (b.a1, b.p1, b.a2, b.p2, b.f, b.g),
                    (a.a1, a.p1, a.a2, a.p2, a.f, a.g),
                )),
            )
        k1 = hyperkahler.apply_K(a)
        k2 = hyperkahler.apply_I(hyperkahler.apply_J(a))
        quat_worst = max(quat_worst, *(geo.sup_norm(x - y) for x, y in zip(
            (k1.a1, k1.p1, k1.a2, k1.p2, k1.f, k1.g),
            (k2.a1, k2.p1, k2.a2, k2.p2, k2.f, k2.g),
        )))
    x = hyperkahler.random_configuration(grid, r1, r2, rng)
    moment_worst = 0.0
    for _ in range(5):
        a = hyperkahler.random_tangent(grid, r1, r2, rng)
        xi = hyperkahler.random_gauge_direction(grid, r1, r2, rng)
        moment_worst = max(moment_worst, hyperkahler.moment_map_property_check(x, a, xi))
    g1 = hyperkahler.random_unitary_gauge(grid, r1, rng)
    g2 = hyperkahler.random_unitary_gauge(grid, r2, rng)
    gx = hyperkahler.gauge_transform(x, g1, g2)
    mu = hyperkahler.moment_mu_I(x)
    mu_g = hyperkahler.moment_mu_I(gx)
    adj = geo.adjoint_values
    equin = max(
        geo.sup_norm(mu_g[0].values - g1 @ mu[0].values @ adj(g1)),
        geo.sup_norm(mu_g[1].values - g2 @ mu[1].values @ adj(g2)),
    )
    report = Report(
        command="verify-hk",
        seed=seed,
        constants=_constants_block(c),
        provenance=provenance_block(cfg.raw_text, seed),
    )
    report.checks.append(make_check("quaternion_relations", quat_worst, 1e-12))
    report.checks.append(make_check("moment_map_identity", moment_worst, check_tol or cfg.check_tol or 1e-6))
    report.checks.append(make_check("moment_equivariance", equin, 1e-10))
    return report


def cmd_deg_p1(n: int, tol: float) -> Report:
    value = reduction.deg_p1(n)
    report = Report(command="deg-p1", constants={"n": n}, provenance={})
    report.checks.append(make_check(f"deg_p1({n})", abs(value - n), tol))
    report.verification = {"value": value}
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcvortex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "stability", "verify-reduction", "verify-hk"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to an INI run configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None, help="override the check tolerance")
        p.add_argument("--seed", type=int, default=None)
    p = sub.add_parser("deg-p1")
    p.add_argument("n", type=int)
    p.add_argument("--out", default="out")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=None)
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "stability": cmd_stability,
    "verify-reduction": cmd_verify_reduction,
    "verify-hk": cmd_verify_hk,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.command == "deg-p1":
            report = cmd_deg_p1(args.n, args.tol)
        else:
            cfg = parse_config(args.config)
            report = _COMMANDS[args.command](cfg, out_dir, args.seed, args.tol)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstraintError, DomainError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE

    path = _write_report(report, out_dir, f"{report.command.replace('-', '_')}_report.json")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: value={check.value:.3e} tol={check.tolerance:.3e}")
    if report.solver is not None:
        print(f"solver: {report.solver['message']} after {report.solver['iterations']} iterations")
    if report.stability is not None:
        for kind in ("tau_verdict", "sigma_verdict"):
            v = report.stability[kind]
            print(f"{kind}: {v['verdict']} (witnesses {v['witnesses']})")
    print(f"report: {path}")
    return EXIT_OK if report.all_passed() else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
