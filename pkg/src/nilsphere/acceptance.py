"""The nine-point acceptance suite, shared by pytest and `nilsphere selftest`.

Each criterion function is deterministic given its fixed seed and returns a
CriterionResult whose details contain no run-varying data (no wall-clock
values), so selftest reports are byte-stable.  Criterion 1 additionally
enforces its runtime target, but only when the compiled backend is active.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import analysis, backend, invariants, sampling
from .hamiltonians import frame_norm_report, submersion_profile
from .integrators import IntegratorConfig, integrate
from .reduction import reduced_from_product

TOL_CONSERVATION = 1e-7
TOL_COMMUTING = 1e-6
TOL_NONCOMMUTING = 1e-3
TOL_CHART_MATCH = 1e-6
TOL_FRAME = 1e-10
TOL_FIBRATION_DRIFT = 1e-6
TOL_LYAPUNOV = 5e-3
TOL_EXACT_DRIFT = 1e-12
TOL_CONSTRAINT = 1e-10
CONVERGENCE_RANGE = (3.5, 4.5)
RUNTIME_TARGET_SECONDS = 60.0

SEEDS = {
    "conservation": 101,
    "commutation": 202,
    "independence": 303,
    "strata": 331,
    "cross_validation": 404,
    "frame_points": 440,
    "cover": 505,
    "lyapunov": 606,
    "fibration": 707,
    "convergence": 808,
    "exact_nil": 881,
    "exact_sphere": 882,
    "determinism": (901, 902, 903),
}

CONSERVED_IDS = ["H1", "H2", "f1", "f2", "f3", "psi", "nu1", "nu2", "nu3"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} ({self.name}): {status}"


def _split_config(t_max: float, stride: int = 100) -> IntegratorConfig:
    return IntegratorConfig(
        dt=1e-3, t_max=t_max, scheme="split-product", sample_stride=stride
    )


def criterion_1_conservation() -> CriterionResult:
    states = sampling.random_regular_product_states(20, SEEDS["conservation"])
    cfg = _split_config(1e3)
    worst = {tag: 0.0 for tag in CONSERVED_IDS}
    started = time.perf_counter()
    for state in states:
        traj = integrate("H_product", state, cfg)
        drifts = invariants.drift_report(traj, CONSERVED_IDS)
        for tag, value in drifts.items():
            worst[tag] = max(worst[tag], value)
    elapsed = time.perf_counter() - started
    drift_ok = all(v < TOL_CONSERVATION for v in worst.values())
    runtime_ok = True
    if backend.USE_NUMBA:
        runtime_ok = elapsed < RUNTIME_TARGET_SECONDS
    return CriterionResult(
        number=1,
        name="conservation along split-product trajectories",
        passed=drift_ok and runtime_ok,
        details={
            "n_states": len(states),
            "t_max": cfg.t_max,
            "dt": cfg.dt,
            "tolerance": TOL_CONSERVATION,
            "max_drift": {tag: float(v) for tag, v in worst.items()},
            "runtime_within_target": runtime_ok,
        },
    )


_COMMUTING_CHECK = [
    ("H1", "H2"),
    ("H1", "f1"),
    ("H1", "f2"),
    ("H2", "f1"),
    ("H2", "f2"),
    ("f1", "f2"),
    ("H1", "f3"),
    ("H2", "f3"),
    ("f1", "f3"),
]

_VARIANT_IDS = ["H1_variant", "H2", "f1", "f2"]


def criterion_2_commutation() -> CriterionResult:
    states = sampling.random_regular_product_states(100, SEEDS["commutation"])
    reports = invariants.commutation_matrix(
        ["H1", "H2", "f1", "f2", "f3"], states
    )
    per_pair = {}
    commuting_max = 0.0
    for pair in _COMMUTING_CHECK:
        value = reports[pair].max_abs
        per_pair["{},{}".format(*pair)] = float(value)
        commuting_max = max(commuting_max, value)
    f2f3_max = reports[("f2", "f3")].max_abs
    per_pair["f2,f3"] = float(f2f3_max)
    variant_reports = invariants.commutation_matrix(_VARIANT_IDS, states)
    variant_max = max(rep.max_abs for rep in variant_reports.values())
    for pair, rep in variant_reports.items():
        per_pair["{},{}".format(*pair)] = float(rep.max_abs)
    passed = (
        commuting_max < TOL_COMMUTING
        and f2f3_max > TOL_NONCOMMUTING
        and variant_max < TOL_COMMUTING
    )
    return CriterionResult(
        number=2,
        name="bracket commutation structure",
        passed=passed,
        details={
            "n_samples": len(states),
            "commuting_tolerance": TOL_COMMUTING,
            "max_commuting": float(commuting_max),
            "max_variant": float(variant_max),
            "max_f2_f3": float(f2f3_max),
            "noncommuting_floor": TOL_NONCOMMUTING,
            "per_pair": per_pair,
        },
    )


def criterion_3_independence() -> CriterionResult:
    ids = ["H1", "H2", "f1", "f2", "f3"]
    states = sampling.random_regular_product_states(1000, SEEDS["independence"])
    ranks = np.array(
        [invariants.independence_rank(ids, state) for state in states]
    )
    fraction_full = float(np.mean(ranks == 5))
    strata_ranks = {}
    for offset, stratum in enumerate(("c", "e1", "e2")):
        st = sampling.singular_stratum_state(stratum, SEEDS["strata"] + offset)
        strata_ranks[stratum] = invariants.independence_rank(ids, st)
    deficits_ok = all(rank < 5 for rank in strata_ranks.values())
    return CriterionResult(
        number=3,
        name="functional independence and singular strata",
        passed=fraction_full >= 0.95 and deficits_ok,
        details={
            "n_samples": len(states),
            "fraction_full_rank": fraction_full,
            "rank_histogram": {
                str(r): int(np.sum(ranks == r)) for r in np.unique(ranks)
            },
            "strata_ranks": strata_ranks,
        },
    )


def _project_product_to_chart(traj) -> np.ndarray:
    s = traj.states
    x, y, z = s[:, 0], s[:, 1], s[:, 2]
    px, py, ps = s[:, 3], s[:, 4], s[:, 5]
    xi, p = s[:, 6:9], s[:, 9:12]
    r = np.arccos(np.clip(xi[:, 0], -1.0, 1.0))
    phi = np.unwrap(np.arctan2(xi[:, 2], xi[:, 1])) / (2.0 * math.pi)
    sr, cr = np.sin(r), np.cos(r)
    cphi = np.cos(2.0 * math.pi * phi)
    sphi = np.sin(2.0 * math.pi * phi)
    pr = -sr * p[:, 0] + cr * cphi * p[:, 1] + cr * sphi * p[:, 2]
    return np.column_stack([x, y, r, z + phi, px, py, pr, ps])


def criterion_4_cross_validation() -> CriterionResult:
    states = sampling.random_regular_product_states(10, SEEDS["cross_validation"])
    profile = submersion_profile()
    max_diff = 0.0
    for state in states:
        # the split scheme composes the exact factor flows of a decoupled
        # sum, so the product trajectory is exact to roundoff; the chart
        # runs at a small dt so that its own O(dt^2) error stays well
        # under the matching tolerance
        product_cfg = IntegratorConfig(
            dt=1e-3, t_max=10.0, scheme="split-product", sample_stride=50
        )
        product_traj = integrate("H_product", state, product_cfg)
        projected = _project_product_to_chart(product_traj)
        reduced0 = reduced_from_product(state)
        chart_cfg = IntegratorConfig(
            dt=2e-5,
            t_max=10.0,
            scheme="implicit-midpoint-chart",
            sample_stride=2500,
        )
        chart_traj = integrate(
            "H_reduced", reduced0, chart_cfg, profile=profile
        )
        # the chart s-coordinate integrates continuously; align the
        # projected sequence by its (integer) starting branch
        offset = projected[0, 3] - chart_traj.states[0, 3]
        projected[:, 3] -= offset
        max_diff = max(
            max_diff, float(np.max(np.abs(projected - chart_traj.states)))
        )
    rng = sampling.seeded_rng(SEEDS["frame_points"])
    max_frame = 0.0
    for _ in range(100):
        x = rng.uniform(-1.0, 1.0)
        y = rng.uniform(-1.0, 1.0)
        r = rng.uniform(0.3, math.pi - 0.3)
        rep = frame_norm_report(profile, x, y, r)
        err = max(
            abs(rep["X"] - 1.0),
            abs(rep["Y"] - 1.0),
            abs(rep["R"] - 1.0),
            abs(rep["S"] - rep["S_expected"]),
            rep["max_cross"],
        )
        max_frame = max(max_frame, err)
    return CriterionResult(
        number=4,
        name="submersion cross-validation and frame norms",
        passed=max_diff < TOL_CHART_MATCH and max_frame < TOL_FRAME,
        details={
            "n_states": len(states),
            "max_chart_difference": max_diff,
            "chart_tolerance": TOL_CHART_MATCH,
            "max_frame_error": max_frame,
            "frame_tolerance": TOL_FRAME,
        },
    )


def criterion_5_cover_dynamics() -> CriterionResult:
    states = sampling.random_regular_product_states(20, SEEDS["cover"])
    cfg = _split_config(1e3)
    bound_ok = True
    max_nu_drift = 0.0
    return_times = []
    all_return = True
    for state in states:
        traj = integrate("H_product", state, cfg)
        report = invariants.nu_bound_check(traj)
        bound_ok = bound_ok and report["bound_ok"] and report["conserved"]
        max_nu_drift = max(max_nu_drift, max(report["nu_drift"].values()))
        rec = analysis.recurrence_stat(
            state, eps_values=(0.5,), dt=1e-3, t_max=1e4
        )
        row = rec["table"][0]
        fwd, bwd = row["forward_time"], row["backward_time"]
        if fwd is None or bwd is None:
            all_return = False
        return_times.append({"forward": fwd, "backward": bwd})
    return CriterionResult(
        number=5,
        name="cover confinement and two-sided recurrence",
        passed=bound_ok and all_return,
        details={
            "n_states": len(states),
            "bound_and_conservation_ok": bound_ok,
            "max_nu_drift": float(max_nu_drift),
            "all_returned": all_return,
            "epsilon": 0.5,
            "return_times": return_times,
        },
    )


def criterion_6_lyapunov() -> CriterionResult:
    states = sampling.random_regular_product_states(10, SEEDS["lyapunov"])
    finals = []
    monotone_ok = True
    for state in states:
        report = analysis.lyapunov_max(
            state, t_max=1e4, n_checkpoints=12
        )
        lam = np.array(report["lambda_max"])
        finals.append(float(lam[-1]))
        if np.any(np.diff(lam) > 1e-12):
            monotone_ok = False
    max_final = max(finals)
    return CriterionResult(
        number=6,
        name="vanishing largest Lyapunov estimate",
        passed=max_final < TOL_LYAPUNOV and monotone_ok,
        details={
            "n_states": len(states),
            "final_lambda_max": finals,
            "largest": float(max_final),
            "tolerance": TOL_LYAPUNOV,
            "monotone_decreasing": monotone_ok,
        },
    )


def criterion_7_fibration() -> CriterionResult:
    states = sampling.random_regular_product_states(10, SEEDS["fibration"])
    cfg = _split_config(1e3)
    max_drift = {"fprime1": 0.0, "f1": 0.0}
    ranks = {"fprime1": [], "f1": []}
    for state in states:
        traj = integrate("H_product", state, cfg)
        for kind in ("fprime1", "f1"):
            drift = analysis.fibration_drift(kind, traj)
            max_drift[kind] = max(max_drift[kind], max(drift.values()))
            ranks[kind].append(analysis.rank_of_fibration(kind, state))
    ranks_ok = all(r == 5 for r in ranks["fprime1"]) and all(
        r == 4 for r in ranks["f1"]
    )
    drift_ok = all(v < TOL_FIBRATION_DRIFT for v in max_drift.values())
    return CriterionResult(
        number=7,
        name="torus fibration conservation and rank",
        passed=ranks_ok and drift_ok,
        details={
            "n_states": len(states),
            "max_drift": {k: float(v) for k, v in max_drift.items()},
            "drift_tolerance": TOL_FIBRATION_DRIFT,
            "ranks_fprime1": ranks["fprime1"],
            "ranks_f1": ranks["f1"],
        },
    )


def criterion_8_integrator_quality() -> CriterionResult:
    # order-2 convergence of the chart midpoint scheme
    reduced_states = sampling.random_reduced_states(3, SEEDS["convergence"])
    factors = []
    for state in reduced_states:
        endpoints = {}
        for dt in (2e-3, 1e-3, 6.25e-5):
            cfg = IntegratorConfig(
                dt=dt,
                t_max=1.0,
                scheme="implicit-midpoint-chart",
                sample_stride=int(round(1.0 / dt)),
            )
            traj = integrate("H_reduced", state, cfg)
            endpoints[dt] = traj.states[-1]
        ref = endpoints[6.25e-5]
        e_coarse = float(np.max(np.abs(endpoints[2e-3] - ref)))
        e_fine = float(np.max(np.abs(endpoints[1e-3] - ref)))
        factors.append(e_coarse / e_fine)
    factors_ok = all(
        CONVERGENCE_RANGE[0] <= f <= CONVERGENCE_RANGE[1] for f in factors
    )

    # exact-scheme conservation over one million steps
    nil_state = sampling.random_nil_states(1, SEEDS["exact_nil"])[0]
    nil_cfg = IntegratorConfig(
        dt=1e-3, t_max=1e3, scheme="euler-arnold-nil", sample_stride=100
    )
    nil_traj = integrate("H1", nil_state, nil_cfg)
    nil_drifts = invariants.drift_report(
        nil_traj, ["H1", "f1", "f2", "f3", "nu1", "nu2", "nu3"]
    )
    sphere_state = sampling.random_sphere_states(1, SEEDS["exact_sphere"])[0]
    sphere_cfg = IntegratorConfig(
        dt=1e-3, t_max=1e3, scheme="exact-sphere", sample_stride=100
    )
    sphere_traj = integrate("H2", sphere_state, sphere_cfg)
    sphere_drifts = invariants.drift_report(sphere_traj, ["H2", "psi2"])
    constraint_max = float(
        max(
            np.max(sphere_traj.diagnostics["constraint_norm"]),
            np.max(sphere_traj.diagnostics["constraint_tangency"]),
        )
    )
    nil_max = max(nil_drifts.values())
    sphere_max = max(sphere_drifts.values())
    exact_ok = (
        nil_max <= TOL_EXACT_DRIFT
        and sphere_max <= TOL_EXACT_DRIFT
        and constraint_max < TOL_CONSTRAINT
    )
    return CriterionResult(
        number=8,
        name="integrator order and exact-scheme conservation",
        passed=factors_ok and exact_ok,
        details={
            "convergence_factors": [float(f) for f in factors],
            "convergence_range": list(CONVERGENCE_RANGE),
            "nil_max_drift": float(nil_max),
            "sphere_max_drift": float(sphere_max),
            "exact_tolerance": TOL_EXACT_DRIFT,
            "constraint_max": constraint_max,
            "constraint_tolerance": TOL_CONSTRAINT,
            "steps": 10**6,
        },
    )


_DETERMINISM_RUNS = (
    (
        "brackets",
        ["--set", "analysis.samples=5", "--set", "initial.count=5"],
        901,
    ),
    (
        "simulate",
        [
            "--set",
            "integrator.t_max=1.0",
            "--set",
            "integrator.sample_stride=10",
        ],
        902,
    ),
    (
        "recurrence",
        [
            "--set",
            "analysis.t_max=50.0",
            "--set",
            "analysis.eps_values=[0.5]",
        ],
        903,
    ),
)


def criterion_9_determinism(work_dir) -> CriterionResult:
    from .cli import main as cli_main

    work_dir = Path(work_dir)
    identical = True
    files_compared = 0
    commands_run = []
    for command, extra, seed in _DETERMINISM_RUNS:
        out = work_dir / command
        argv = [
            command,
            "--seed",
            str(seed),
            "--out",
            str(out),
            "--quiet",
            *extra,
        ]
        status = cli_main(argv)
        if status != 0:
            identical = False
            commands_run.append({"command": command, "status": status})
            continue
        snapshot = {
            f.name: f.read_bytes() for f in sorted(out.iterdir()) if f.is_file()
        }
        status = cli_main(argv)
        if status != 0:
            identical = False
        rerun = {
            f.name: f.read_bytes() for f in sorted(out.iterdir()) if f.is_file()
        }
        same = set(snapshot) == set(rerun) and all(
            snapshot[name] == rerun[name] for name in snapshot
        )
        identical = identical and same
        files_compared += len(snapshot)
        commands_run.append(
            {"command": command, "status": status, "byte_identical": same}
        )
    return CriterionResult(
        number=9,
        name="byte-identical reruns",
        passed=identical,
        details={
            "files_compared": files_compared,
            "runs": commands_run,
        },
    )


def run_all(out_dir, quiet: bool = False) -> dict:
    """Run all nine criteria; returns JSON-ready results."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    criteria = [
        criterion_1_conservation,
        criterion_2_commutation,
        criterion_3_independence,
        criterion_4_cross_validation,
        criterion_5_cover_dynamics,
        criterion_6_lyapunov,
        criterion_7_fibration,
        criterion_8_integrator_quality,
    ]
    results = []
    for fn in criteria:
        res = fn()
        if not quiet:
            print(res.line())
        results.append(res)
    res9 = criterion_9_determinism(out_dir / "determinism")
    if not quiet:
        print(res9.line())
    results.append(res9)
    return {
        "criteria": [asdict(r) for r in results],
        "all_passed": all(r.passed for r in results),
    }
