"""Command-line front end: runs experiments, writes run records and tables.

Record files are YAML with schema_version as the first key. Every numeric
entry in the results section carries a provenance tag (closed_form,
optimizer, or mc with a trial count) so plots can cite their source.
Config precedence is flags > config file > built-in defaults, and the
resolved parameters are echoed into the record.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from datetime import datetime, timezone

import numpy as np
import yaml
from scipy.integrate import quad

from . import gaf, mc, measures, polydensity, special, varopt, zeros
from .errors import (
    ContourError,
    ConvergenceError,
    CoverageError,
    DomainError,
    ParameterError,
    SingularParameterError,
)

__all__ = [
    "main",
    "cmd_table",
    "cmd_measure",
    "cmd_varopt",
    "cmd_simulate",
    "cmd_check",
    "write_record",
    "load_record",
]

ARTIFACT_VERSION = "0.1.0"
SCHEMA_VERSION = 1

DEFAULTS = {
    "beta": 2.0,
    "alpha": 10.0,
    "p": 0.0,
    "r": 1.0,
    "trials": 10000,
    "seed": 7,
    "grid": 400,
    "threads": 1,
}


def _plain(obj):
    """Convert numpy scalars/arrays and tuples to plain YAML-safe types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return float(obj)
    return obj


def _val(value, provenance, trials=None):
    out = {"value": _plain(value), "provenance": provenance}
    if trials is not None:
        out["trials"] = int(trials)
    return out


def _record(command, params, results):
    now = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": _plain(params),
        "started_at": now,
        "finished_at": now,
        "results": _plain(results),
        "artifact_version": ARTIFACT_VERSION,
    }


def write_record(record, out_path):
    text = yaml.safe_dump(record, sort_keys=False, allow_unicode=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def load_record(path):
    with open(path, encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def record_payload(record):
    """The byte-identity payload: everything except timestamps."""
    return yaml.safe_dump(
        {k: v for k, v in record.items() if k not in ("started_at", "finished_at")},
        sort_keys=False,
    )


# ----------------------------------------------------------------- commands


def cmd_table(beta, p_list, out_path=None):
    """q(p), Z_p, and regime for each requested p, as CSV plus a record."""
    model = special.WeightModel(beta=beta)
    rows = []
    for p in p_list:
        if abs(p - 1.0) < 1e-12:
            rows.append({"p": p, "q": "", "Z_p": "", "regime": "singular"})
            continue
        hp = measures.hole_params(p)
        rows.append({"p": p, "q": hp.q, "Z_p": hp.z_p, "regime": hp.regime})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["p", "q", "Z_p", "regime"])
    for row in rows:
        writer.writerow([row["p"], row["q"], row["Z_p"], row["regime"]])
    csv_text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    results = {
        "rows": [
            {
                "p": _val(row["p"], "closed_form"),
                "q": _val(row["q"], "closed_form") if row["q"] != "" else None,
                "Z_p": _val(row["Z_p"], "closed_form") if row["Z_p"] != "" else None,
                "regime": row["regime"],
            }
            for row in rows
        ],
        "csv": csv_text,
    }
    return _record("table", {"beta": beta, "p_list": list(p_list)}, results)


def cmd_measure(alpha, beta, p, out_path=None):
    """Minimizer measure, its equilibrium diagnostics, and energy identity."""
    model = special.WeightModel(beta=beta)
    mu = measures.minimizer_measure(alpha, model, p)
    report = measures.equilibrium_report(mu, alpha, model, p)
    hp = measures.hole_params(p)
    identity = (math.log(alpha) - 1.5) / beta + 2.0 * hp.z_p / (beta * alpha**2)
    results = {
        "measure": {
            "provenance": "closed_form",
            "circle_atoms": [[r, m] for r, m in mu.circle_atoms],
            "annulus_pieces": [[a, b, c] for a, b, c in mu.annulus_pieces],
            "total_mass": mu.total_mass(),
        },
        "b_value": _val(report.b_value, "closed_form"),
        "log_energy": _val(report.sigma_value, "closed_form"),
        "i_value": _val(report.i_value, "closed_form"),
        "identity_value": _val(identity, "closed_form"),
        "identity_gap": _val(report.i_value - identity, "closed_form"),
        "g_max": _val(report.g_max, "closed_form"),
        "g_support_dev": _val(report.g_support_dev, "closed_form"),
    }
    rec = _record("measure", {"alpha": alpha, "beta": beta, "p": p}, results)
    if out_path:
        write_record(rec, out_path)
    return rec


def cmd_varopt(alpha, beta, p, constraint=None, grid_size=400, out_path=None):
    """Direct constrained minimization compared against the closed form."""
    model = special.WeightModel(beta=beta)
    if constraint is None:
        constraint = varopt.CONSTRAINT_LE if p < 1.0 else varopt.CONSTRAINT_GE
    res = varopt.minimize_constrained(alpha, model, p, constraint, grid_size=grid_size)
    hp = measures.hole_params(p)
    closed = (math.log(alpha) - 1.5) / beta + 2.0 * hp.z_p / (beta * alpha**2)
    band = varopt.forbidden_band_mass(res.measure, p)
    atom = varopt.atom_mass(res.measure)
    if p < 1.0:
        atom_expected = (hp.q - p) / alpha
    elif p < math.e:
        atom_expected = (p - hp.q) / alpha
    else:
        atom_expected = p / alpha
    results = {
        "objective": _val(res.objective, "optimizer"),
        "closed_form_min": _val(closed, "closed_form"),
        "gap": _val(res.objective - closed, "optimizer"),
        "band_mass": _val(band, "optimizer"),
        "atom_mass": _val(atom, "optimizer"),
        "atom_mass_expected": _val(atom_expected, "closed_form"),
        "converged": bool(res.converged),
        "iterations": int(res.iterations),
        "polish_improved": bool(res.polish_improved),
        "constraint": constraint,
    }
    rec = _record(
        "varopt",
        {"alpha": alpha, "beta": beta, "p": p, "constraint": constraint, "grid": grid_size},
        results,
    )
    if out_path:
        write_record(rec, out_path)
    return rec


def _radii_histogram(experiment):
    edges = np.linspace(0.0, 3.0, 61)
    cond, _ = np.histogram(experiment.conditional_zero_radii, bins=edges)
    uncond, _ = np.histogram(experiment.unconditional_zero_radii, bins=edges)
    return {
        "bin_edges": [float(e) for e in edges],
        "cond_counts": [int(c) for c in cond],
        "uncond_counts": [int(c) for c in uncond],
    }


def cmd_simulate(subcommand, params, out_path=None):
    """Monte Carlo experiments: hole, conditional, or dominant."""
    beta = params["beta"]
    trials = params["trials"]
    seed = params["seed"]
    threads = params.get("threads", 1)
    model = special.WeightModel(beta=beta)
    if subcommand in ("hole", "conditional"):
        r = params["r"]
        plan = mc.make_hole_plan(model, r)
        exp = mc.estimate_hole_probability(model, plan, r, trials, seed, threads=threads)
        results = {
            "p_hat": _val(exp.p_hat, "mc", trials),
            "ci95": _val(list(exp.ci95), "mc", trials),
            "hole_count": _val(exp.hole_count, "mc", trials),
            "n_trunc": int(plan.n_trunc),
            "flagged": bool(exp.flagged),
            "radii_histogram": {"provenance": "mc", "trials": trials, **_radii_histogram(exp)},
        }
        if subcommand == "hole":
            dep = mc.depletion_statistic(exp)
            results["depletion"] = {
                "band_frac_cond": _val(dep.band_frac_cond, "mc", trials),
                "band_frac_uncond": _val(dep.band_frac_uncond, "mc", trials),
                "zscore": _val(dep.zscore, "mc", trials),
                "ok": bool(dep.ok),
                "note": dep.note,
            }
        else:
            phi = zeros.radial_bump(2.0)
            stats = mc.conditional_linear_statistics(exp, phi)
            results["linear_statistic"] = {
                "phi": phi.name,
                "mean_cond": _val(stats["mean_cond"], "mc", trials),
                "target": _val(stats["target"], "closed_form"),
                "gap": _val(stats["gap"], "mc", trials),
                "ok": bool(stats["ok"]),
                "n_accepted": int(stats["n_accepted"]),
            }
    elif subcommand == "dominant":
        r = params["r"]
        p = params.get("p", 0.0)
        out = mc.dominant_monomial_probability(model, r, p, trials, seed)
        results = {
            "p_hat": _val(out["p_hat"], "mc", trials),
            "ci95": _val(list(out["ci95"]), "mc", trials),
            "log_lower_bound": _val(out["log_lower_bound"], "closed_form"),
            "k0": int(out["k0"]),
            "n_trunc": int(out["n_trunc"]),
            "n_event": _val(out["n_event"], "mc", trials),
            "n_checked": _val(out["n_checked"], "mc", trials),
            "n_violations": _val(out["n_violations"], "mc", trials),
        }
    else:
        raise ParameterError(f"unknown simulate subcommand: {subcommand!r}")
    rec = _record(f"simulate {subcommand}", {"subcommand": subcommand, **params}, results)
    if out_path:
        write_record(rec, out_path)
    return rec


def _check_density(params):
    model = special.WeightModel(beta=2.0)
    dp = polydensity.make_density_params(1, 1.0, model)
    xs = np.linspace(-3.0, 3.0, 25)
    worst = 0.0
    for x in xs:
        for y in xs:
            z = complex(x, y)
            if abs(z) > 3.0:
                continue
            got = polydensity.joint_density(np.array([z]), dp)
            want = (1.0 / math.pi) * (1.0 + abs(z) ** 2) ** (-2.0)
            worst = max(worst, abs(got - want))
    return {"name": "density_n1_closed_form", "max_abs_gap": worst, "passed": worst <= 1e-12}


def _check_intensity(params):
    model = special.WeightModel(beta=2.0)
    plan = special.make_truncation_plan(2.0, model, alpha=20.0)
    r = 1.5
    integral, _ = quad(
        lambda t: 2.0 * math.pi * t * gaf.first_intensity(model, plan.n_trunc, t), 0.0, r, limit=200
    )
    count = gaf.expected_count(model, plan.n_trunc, r)
    gap = abs(integral - count)
    return {
        "name": "intensity_integrates_to_expected_count",
        "integral": integral,
        "expected_count": count,
        "abs_gap": gap,
        "passed": gap <= 5e-3 * max(1.0, count),
    }


def _check_stirling(params):
    expected = {0.5: 13, 1.0: 5, 2.0: 1, 3.0: 1, 4.0: 1}
    rows = []
    ok = True
    for beta, want in expected.items():
        model = special.WeightModel(beta=beta)
        k0 = special.stirling_threshold(model)
        ks = np.arange(k0, 10001)
        target = special.log_gamma(2.0 * (ks + 1) / beta)
        lo, hi = special.stirling_bounds(ks, model)
        contained = bool(np.all(lo <= target) and np.all(target <= hi))
        good = (k0 == want) and contained
        ok = ok and good
        rows.append({"beta": beta, "threshold": k0, "expected": want, "contained": contained})
    return {"name": "stirling_threshold_table", "rows": rows, "passed": ok}


def _check_tail(params):
    seed = params.get("seed", DEFAULTS["seed"])
    exceed = 0
    worst_margin = -math.inf
    for beta in (1.0, 2.0):
        model = special.WeightModel(beta=beta)
        plan = special.make_truncation_plan(1.5, model, alpha=4.0**beta * math.e)
        bound = math.exp(gaf.tail_bound(plan, model))
        n_lo = plan.n_trunc + 1
        n_hi = plan.n_trunc + 600
        theta = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
        radii = np.linspace(0.05, plan.big_b * plan.r, 12)
        grid = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
        for t in range(200):
            xi = gaf.standard_complex_gaussians(n_hi + 1, seed, 10_000 + t)
            tail = gaf.evaluate_range(xi[n_lo:], model, grid, n_lo)
            m = float(np.max(np.abs(tail)))
            worst_margin = max(worst_margin, m - bound)
            if m > bound:
                exceed += 1
    return {
        "name": "tail_bound_never_exceeded",
        "exceedances": exceed,
        "worst_margin": worst_margin,
        "passed": exceed == 0,
    }


def _check_potential(params):
    worst = 0.0
    for alpha in (10.0, 100.0):
        for beta in (1.0, 2.0):
            model = special.WeightModel(beta=beta)
            for p in (0.0, 0.5, 2.0, 4.0):
                mu = measures.minimizer_measure(alpha, model, p)
                xs = np.linspace(1e-6, alpha ** (1.0 / beta), 200)
                for x in xs:
                    a = measures.potential_closed(mu, alpha, model, p, x)
                    b = measures.potential_quadrature(mu, x)
                    worst = max(worst, abs(a - b))
    return {"name": "closed_form_potential_vs_quadrature", "max_abs_gap": worst, "passed": worst <= 1e-10}


_CHECKS = {
    "density": _check_density,
    "intensity": _check_intensity,
    "stirling": _check_stirling,
    "tail": _check_tail,
    "potential": _check_potential,
}


def cmd_check(subcommand, params=None, out_path=None):
    """Self-checks with pass/fail summaries."""
    params = params or {}
    if subcommand not in _CHECKS:
        raise ParameterError(f"unknown check subcommand: {subcommand!r}")
    outcome = _CHECKS[subcommand](params)
    results = {"check": outcome, "all_passed": bool(outcome["passed"])}
    rec = _record(f"check {subcommand}", {"subcommand": subcommand, **params}, results)
    if out_path:
        write_record(rec, out_path)
    return rec


# -------------------------------------------------------------------- main


def _parse_p_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="gaflab",
        description="Zeros of power-exponential Gaussian analytic functions: "
        "equilibrium measures, hole-probability experiments, self-checks.",
    )
    ap.add_argument("--config", help="YAML config file; flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "beta" in names:
            p.add_argument("--beta", type=float, default=None)
        if "alpha" in names:
            p.add_argument("--alpha", type=float, default=None)
        if "p" in names:
            p.add_argument("--p", type=str, default=None)
        if "r" in names:
            p.add_argument("--r", type=float, default=None)
        if "trials" in names:
            p.add_argument("--trials", type=int, default=None)
        if "seed" in names:
            p.add_argument("--seed", type=int, default=None)
        if "grid" in names:
            p.add_argument("--grid", type=int, default=None)
        if "threads" in names:
            p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None)

    p_table = sub.add_parser("table", help="q(p), Z_p, regime table as CSV")
    common(p_table, "beta", "p")

    p_measure = sub.add_parser("measure", help="closed-form minimizer measure record")
    common(p_measure, "beta", "alpha", "p")

    p_varopt = sub.add_parser("varopt", help="direct constrained minimization")
    common(p_varopt, "beta", "alpha", "p", "grid")
    p_varopt.add_argument(
        "--constraint",
        choices=[varopt.CONSTRAINT_LE, varopt.CONSTRAINT_GE],
        default=None,
        help="default: inferred from p",
    )

    p_sim = sub.add_parser("simulate", help="Monte Carlo experiments")
    p_sim.add_argument("subcommand", choices=["hole", "conditional", "dominant"])
    common(p_sim, "beta", "p", "r", "trials", "seed", "threads")

    p_check = sub.add_parser("check", help="module self-checks")
    p_check.add_argument(
        "subcommand", choices=["density", "intensity", "stirling", "tail", "potential"]
    )
    common(p_check, "seed")
    return ap


def _resolved(args, config, key, cast=float):
    flag = getattr(args, key, None)
    if flag is not None:
        return cast(flag)
    if config and key in config:
        return cast(config[key])
    return DEFAULTS[key]


def main(argv=None):
    args = _build_parser().parse_args(argv)
    config = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = yaml.safe_load(fh) or {}
    try:
        if args.command == "table":
            beta = _resolved(args, config, "beta")
            p_text = args.p if args.p is not None else config.get("p", "0,0.5,1,2,2.7182818284590452,3")
            rec = cmd_table(beta, _parse_p_list(str(p_text)), args.out)
            if not args.out:
                sys.stdout.write(rec["results"]["csv"])
            else:
                print(f"wrote {args.out}")
        elif args.command == "measure":
            rec = cmd_measure(
                _resolved(args, config, "alpha"),
                _resolved(args, config, "beta"),
                float(args.p) if args.p is not None else float(config.get("p", DEFAULTS["p"])),
                args.out,
            )
            sys.stdout.write(yaml.safe_dump(rec, sort_keys=False))
        elif args.command == "varopt":
            rec = cmd_varopt(
                _resolved(args, config, "alpha"),
                _resolved(args, config, "beta"),
                float(args.p) if args.p is not None else float(config.get("p", DEFAULTS["p"])),
                constraint=args.constraint or config.get("constraint"),
                grid_size=int(_resolved(args, config, "grid", int)),
                out_path=args.out,
            )
            sys.stdout.write(yaml.safe_dump(rec, sort_keys=False))
        elif args.command == "simulate":
            params = {
                "beta": _resolved(args, config, "beta"),
                "r": _resolved(args, config, "r"),
                "trials": int(_resolved(args, config, "trials", int)),
                "seed": int(_resolved(args, config, "seed", int)),
                "threads": int(_resolved(args, config, "threads", int)),
            }
            if args.subcommand == "dominant":
                params["p"] = float(args.p) if args.p is not None else float(config.get("p", 0.0))
            rec = cmd_simulate(args.subcommand, params, args.out)
            sys.stdout.write(yaml.safe_dump(rec, sort_keys=False))
        elif args.command == "check":
            params = {"seed": int(_resolved(args, config, "seed", int))}
            rec = cmd_check(args.subcommand, params, args.out)
            sys.stdout.write(yaml.safe_dump(rec, sort_keys=False))
            if not rec["results"]["all_passed"]:
                return 3
        else:  # pragma: no cover - argparse enforces choices
            return 2
    except (SingularParameterError, ParameterError, DomainError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ContourError, CoverageError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
