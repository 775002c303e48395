"""Batch command-line front end.

Every subcommand takes the same flags (--config, --set, --out, --seed,
--quiet), resolves one strict config, and writes deterministic reports into
the output directory.  Exit codes: 0 success, 1 selftest failure, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, config as config_mod, invariants, reporting, sampling
from .errors import ConfigError, DomainError, NilsphereError
from .hamiltonians import builtin_profile
from .heisenberg import NilCotangent
from .integrators import IntegratorConfig, Trajectory, integrate
from .reduction import ProductState, ReducedState
from .sphere import SphereCotangent

_STATE_COLUMNS = {
    "nil": ["x", "y", "z", "px", "py", "pz"],
    "sphere": ["xi1", "xi2", "xi3", "p1", "p2", "p3"],
    "product": [
        "x", "y", "z", "px", "py", "pz",
        "xi1", "xi2", "xi3", "p1", "p2", "p3",
    ],
    "reduced": ["x", "y", "r", "s", "px", "py", "pr", "ps"],
}

COMMANDS = (
    "simulate",
    "audit-invariants",
    "brackets",
    "rank",
    "scan-tori",
    "rotation",
    "recurrence",
    "lyapunov",
    "selftest",
)


def _say(cfg: dict, message: str) -> None:
    if not cfg.get("quiet"):
        print(message)


def _explicit_state(cfg: dict):
    system = cfg["system"]
    values = cfg["initial"]["state"]
    try:
        if system in ("H1", "H1_variant"):
            return NilCotangent(*values)
        if system == "H2":
            return SphereCotangent(np.array(values[:3]), np.array(values[3:6]))
        if system == "H_product":
            return ProductState.from_array(np.array(values, dtype=float))
        return ReducedState(*values)
    except DomainError as exc:
        raise ConfigError(f"explicit initial state is invalid: {exc}") from exc


def _initial_states(cfg: dict) -> list:
    init = cfg["initial"]
    if init["mode"] == "explicit":
        return [_explicit_state(cfg)]
    system = cfg["system"]
    count = init["count"]
    seed = cfg["seed"]
    k = cfg["k"]
    if system == "H_product":
        return sampling.random_regular_product_states(count, seed, k)
    if system in ("H1", "H1_variant"):
        return sampling.random_nil_states(count, seed, k)
    if system == "H2":
        return sampling.random_sphere_states(count, seed)
    return sampling.random_reduced_states(count, seed)


def _integrator_config(cfg: dict) -> IntegratorConfig:
    integ = dict(cfg["integrator"])
    scheme = integ.pop("scheme")
    if scheme is None:
        scheme = config_mod._DEFAULT_SCHEMES[cfg["system"]]
    return IntegratorConfig(scheme=scheme, **integ)


def _tracked_ids(cfg: dict) -> list[str] | None:
    return cfg["analysis"]["integrals"]


def _integrate_one(cfg: dict, state) -> Trajectory:
    icfg = _integrator_config(cfg)
    profile = builtin_profile(cfg["profile"])
    return integrate(
        cfg["system"], state, icfg, k=cfg["k"], profile=profile,
        track=_tracked_ids(cfg),
    )


_NON_INTEGRAL_DIAGNOSTICS = ("H", "constraint_norm", "constraint_tangency")


def _write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    # column schema: t, state components, H, one column per tracked integral
    tags = [
        key for key in traj.diagnostics if key not in _NON_INTEGRAL_DIAGNOSTICS
    ]
    header = ["t"] + _STATE_COLUMNS[traj.kind] + ["H"] + tags
    diag = traj.diagnostics

    def rows():
        for i in range(traj.n_samples):
            row = [float(traj.times[i])]
            row.extend(float(v) for v in traj.states[i])
            row.append(float(diag["H"][i]))
            row.extend(float(diag[tag][i]) for tag in tags)
            yield row

    reporting.write_csv(path, header, rows())


def _drift_summary(traj: Trajectory) -> dict:
    h = traj.diagnostics["H"]
    out = {
        "energy_drift": float(
            np.max(np.abs(h - h[0])) / max(1.0, abs(float(h[0])))
        )
    }
    tags = [
        key for key in traj.diagnostics if key not in _NON_INTEGRAL_DIAGNOSTICS
    ]
    drifts = {}
    for tag in tags:
        series = traj.diagnostics[tag]
        drifts[tag] = float(
            np.max(np.abs(series - series[0])) / max(1.0, abs(float(series[0])))
        )
    out["integral_drift"] = drifts
    return out


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_simulate(cfg: dict, out_dir: Path) -> int:
    states = _initial_states(cfg)
    summaries = []
    for idx, state in enumerate(states):
        traj = _integrate_one(cfg, state)
        csv_path = out_dir / f"trajectory_{idx:03d}.csv"
        _write_trajectory_csv(csv_path, traj)
        summary = {"index": idx, "file": csv_path.name, **_drift_summary(traj)}
        summaries.append(summary)
        _say(cfg, f"trajectory {idx}: energy drift {summary['energy_drift']:.3e}")
    payload = reporting.report_envelope("simulate", cfg)
    payload["trajectories"] = summaries
    reporting.write_json(out_dir / "simulate.json", payload)
    return 0


def _cmd_audit_invariants(cfg: dict, out_dir: Path) -> int:
    states = _initial_states(cfg)
    results = []
    for idx, state in enumerate(states):
        traj = _integrate_one(cfg, state)
        entry = {"index": idx, **_drift_summary(traj)}
        if traj.kind == "product" and abs(traj.states[0, 5]) >= 0.1:
            entry["nu_bound"] = invariants.nu_bound_check(traj)
        results.append(entry)
        _say(cfg, f"state {idx}: energy drift {entry['energy_drift']:.3e}")
    payload = reporting.report_envelope("audit-invariants", cfg)
    payload["results"] = results
    payload["max_energy_drift"] = max(r["energy_drift"] for r in results)
    reporting.write_json(out_dir / "audit_invariants.json", payload)
    return 0


def _cmd_brackets(cfg: dict, out_dir: Path) -> int:
    ids = cfg["analysis"]["integrals"] or ["H1", "H2", "f1", "f2", "f3"]
    n = cfg["analysis"]["samples"]
    h = cfg["analysis"]["h"]
    states = sampling.random_regular_product_states(n, cfg["seed"], cfg["k"])
    reports = invariants.commutation_matrix(ids, states, h=h, k=cfg["k"])
    pairs = [
        reports[key].to_json_dict() for key in sorted(reports, key=lambda p: p)
    ]
    payload = reporting.report_envelope("brackets", cfg)
    payload["pairs"] = pairs
    reporting.write_json(out_dir / "brackets.json", payload)
    worst = max(
        (p["max_abs"] for p in pairs if p["expected_commuting"]), default=0.0
    )
    _say(cfg, f"max |bracket| over expected-commuting pairs: {worst:.3e}")
    return 0


def _cmd_rank(cfg: dict, out_dir: Path) -> int:
    ids = cfg["analysis"]["integrals"] or ["H1", "H2", "f1", "f2", "f3"]
    n = cfg["analysis"]["samples"]
    h = cfg["analysis"]["h"]
    states = sampling.random_regular_product_states(n, cfg["seed"], cfg["k"])
    ranks = [
        invariants.independence_rank(ids, state, h=h, k=cfg["k"])
        for state in states
    ]
    hist: dict[str, int] = {}
    for r in ranks:
        hist[str(r)] = hist.get(str(r), 0) + 1
    full = len(ids)
    fraction_full = sum(1 for r in ranks if r == full) / len(ranks)
    strata = {}
    for stratum in ("c", "e1", "e2"):
        st = sampling.singular_stratum_state(stratum, cfg["seed"] + 1, cfg["k"])
        strata[stratum] = invariants.independence_rank(ids, st, h=h, k=cfg["k"])
    payload = reporting.report_envelope("rank", cfg)
    payload["ids"] = list(ids)
    payload["histogram"] = hist
    payload["fraction_full_rank"] = fraction_full
    payload["singular_strata_ranks"] = strata
    reporting.write_json(out_dir / "rank.json", payload)
    _say(cfg, f"full-rank fraction: {fraction_full:.4f}; strata ranks {strata}")
    return 0


def _cmd_scan_tori(cfg: dict, out_dir: Path) -> int:
    if cfg["system"] != "H_product":
        raise ConfigError("scan-tori requires system H_product")
    states = _initial_states(cfg)
    h = cfg["analysis"]["h"]
    results = []
    for idx, state in enumerate(states):
        traj = _integrate_one(cfg, state)
        entry = {"index": idx}
        for kind in analysis.FIBRATION_KINDS:
            value = analysis.fibration_value(kind, state, k=cfg["k"])
            drift = analysis.fibration_drift(kind, traj)
            rank = analysis.rank_of_fibration(kind, state, h=h, k=cfg["k"])
            entry[kind] = {
                "value": [float(v) for v in value.as_array()],
                "singular": value.singular,
                "max_drift": max(drift.values()),
                "drift": drift,
                "rank": rank,
            }
        results.append(entry)
        _say(
            cfg,
            f"state {idx}: rank {entry['fprime1']['rank']}, "
            f"max drift {entry['fprime1']['max_drift']:.3e}",
        )
    payload = reporting.report_envelope("scan-tori", cfg)
    payload["results"] = results
    reporting.write_json(out_dir / "scan_tori.json", payload)
    return 0


def _phase_subset(est: analysis.RotationEstimate) -> analysis.RotationEstimate:
    phase_names = [n for n in est.angles if n.endswith("-phase")]
    if not phase_names:
        return est
    return analysis.RotationEstimate(
        frequencies={n: est.frequencies[n] for n in phase_names},
        residuals={n: est.residuals[n] for n in phase_names},
        window=est.window,
        angles=phase_names,
    )


def _cmd_rotation(cfg: dict, out_dir: Path) -> int:
    states = _initial_states(cfg)
    angles = cfg["analysis"]["angles"]
    tol = cfg["analysis"]["minimality_tol"]
    results = []
    csv_rows = []
    for idx, state in enumerate(states):
        traj = _integrate_one(cfg, state)
        est = analysis.rotation_vector(traj, angles=angles)
        verdict = analysis.minimality_heuristic(_phase_subset(est), tol=tol)
        results.append(
            {
                "index": idx,
                "frequencies": est.frequencies,
                "residuals": est.residuals,
                "window": est.window,
                "minimality": verdict,
            }
        )
        for name in est.angles:
            csv_rows.append(
                [idx, name, est.frequencies[name], est.residuals[name]]
            )
        _say(cfg, f"state {idx}: minimality {verdict}")
    payload = reporting.report_envelope("rotation", cfg)
    payload["results"] = results
    reporting.write_json(out_dir / "rotation.json", payload)
    reporting.write_csv(
        out_dir / "rotation.csv",
        ["state_index", "angle", "frequency", "residual"],
        csv_rows,
    )
    return 0


def _cmd_recurrence(cfg: dict, out_dir: Path) -> int:
    if cfg["system"] != "H_product":
        raise ConfigError("recurrence requires system H_product")
    states = _initial_states(cfg)
    t_max = cfg["analysis"]["t_max"] or 1e4
    eps_values = cfg["analysis"]["eps_values"]
    results = []
    csv_rows = []
    for idx, state in enumerate(states):
        report = analysis.recurrence_stat(
            state,
            eps_values=eps_values,
            dt=cfg["integrator"]["dt"],
            t_max=t_max,
            k=cfg["k"],
        )
        results.append({"index": idx, **report})
        for row in report["table"]:
            csv_rows.append(
                [idx, row["eps"], row["forward_time"], row["backward_time"]]
            )
            _say(
                cfg,
                f"state {idx} eps={row['eps']}: forward "
                f"{row['forward_time']}, backward {row['backward_time']}",
            )
    payload = reporting.report_envelope("recurrence", cfg)
    payload["results"] = results
    reporting.write_json(out_dir / "recurrence.json", payload)
    reporting.write_csv(
        out_dir / "recurrence.csv",
        ["state_index", "eps", "forward_time", "backward_time"],
        csv_rows,
    )
    return 0


def _cmd_lyapunov(cfg: dict, out_dir: Path) -> int:
    if cfg["system"] != "H_product":
        raise ConfigError("lyapunov requires system H_product")
    states = _initial_states(cfg)
    ana = cfg["analysis"]
    t_max = ana["t_max"] or 1e4
    results = []
    csv_rows = []
    for idx, state in enumerate(states):
        report = analysis.lyapunov_max(
            state,
            k=cfg["k"],
            dt=cfg["integrator"]["dt"],
            t_max=t_max,
            delta0=ana["delta0"],
            renorm_time=ana["renorm_time"],
            n_checkpoints=ana["n_checkpoints"],
        )
        results.append({"index": idx, **report})
        for t, lam in zip(report["checkpoint_times"], report["lambda_max"]):
            csv_rows.append([idx, t, lam])
        _say(cfg, f"state {idx}: lambda({t_max:g}) = {report['lambda_max'][-1]:.3e}")
    payload = reporting.report_envelope("lyapunov", cfg)
    payload["results"] = results
    reporting.write_json(out_dir / "lyapunov.json", payload)
    reporting.write_csv(
        out_dir / "lyapunov.csv",
        ["state_index", "time", "lambda_max"],
        csv_rows,
    )
    return 0


def _cmd_selftest(cfg: dict, out_dir: Path) -> int:
    from . import acceptance

    results = acceptance.run_all(out_dir, quiet=cfg["quiet"])
    payload = reporting.report_envelope("selftest", cfg)
    payload["criteria"] = results["criteria"]
    payload["all_passed"] = results["all_passed"]
    reporting.write_json(out_dir / "selftest.json", payload)
    return 0 if results["all_passed"] else 1


_DISPATCH = {
    "simulate": _cmd_simulate,
    "audit-invariants": _cmd_audit_invariants,
    "brackets": _cmd_brackets,
    "rank": _cmd_rank,
    "scan-tori": _cmd_scan_tori,
    "rotation": _cmd_rotation,
    "recurrence": _cmd_recurrence,
    "lyapunov": _cmd_lyapunov,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilsphere",
        description=(
            "Geodesic-flow experiments on a nil times sphere product: "
            "simulation, invariant audits, and torus analysis."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", default=None)
        p.add_argument(
            "--set",
            metavar="KEY=VALUE",
            action="append",
            default=[],
            dest="overrides",
        )
        p.add_argument("--out", metavar="DIR", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--quiet", action="store_true", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_mod.load_config(
            path=args.config,
            overrides=args.overrides,
            seed=args.seed,
            out=args.out,
            quiet=args.quiet,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(cfg["out"])
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NilsphereError as exc:
        when = getattr(exc, "time", None)
        suffix = f" at t={when:g}" if when is not None else ""
        print(
            f"numerical failure in {args.command}{suffix}: {exc}",
            file=sys.stderr,
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
