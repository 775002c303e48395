"""Run a fixed workload and print final states; used by the backend test.

Executed as a subprocess with NILSPHERE_NUMBA set to 1 or 0 so the backend
choice is fixed at import time.
"""

import json
import math

import numpy as np

from nilsphere import backend
from nilsphere.analysis import lyapunov_max, recurrence_stat
from nilsphere.heisenberg import NilCotangent
from nilsphere.integrators import IntegratorConfig, integrate
from nilsphere.reduction import ProductState, ReducedState
from nilsphere.sampling import random_regular_product_states
from nilsphere.sphere import SphereCotangent


def main() -> None:
    state = random_regular_product_states(1, 555)[0]
    out = {"backend": backend.BACKEND}

    cfg = IntegratorConfig(
        dt=1e-3, t_max=10.0, scheme="split-product", sample_stride=1000
    )
    traj = integrate("H_product", state, cfg)
    out["split_final"] = traj.states[-1].tobytes().hex()

    red = ReducedState(
        x=0.1, y=-0.2, r=1.3, s=0.4, px=0.5, py=0.3, pr=0.2, ps=0.6
    )
    cfg = IntegratorConfig(
        dt=1e-3, t_max=5.0, scheme="implicit-midpoint-chart", sample_stride=500
    )
    traj = integrate("H_reduced", red, cfg)
    out["midpoint_final"] = traj.states[-1].tobytes().hex()

    nil = NilCotangent(0.1, 0.2, -0.3, 0.4, 0.5, 0.7)
    cfg = IntegratorConfig(
        dt=1e-3, t_max=10.0, scheme="euler-arnold-nil", sample_stride=1000
    )
    out["nil_final"] = integrate("H1", nil, cfg).states[-1].tobytes().hex()

    sph = SphereCotangent(
        np.array([0.0, 1.0, 0.0]), np.array([0.3, 0.0, 0.5])
    )
    cfg = IntegratorConfig(
        dt=1e-3, t_max=10.0, scheme="exact-sphere", sample_stride=1000
    )
    out["sphere_final"] = integrate("H2", sph, cfg).states[-1].tobytes().hex()

    rec = recurrence_stat(state, eps_values=(0.5, 0.2), dt=1e-3, t_max=20.0)
    out["recurrence"] = [
        [row["forward_time"], row["backward_time"]] for row in rec["table"]
    ]

    # a state with a short exactly periodic cover orbit, so the comparison
    # includes finite return times as well
    periodic = ProductState(
        NilCotangent(0.3, -0.2, 0.1, -0.1, -0.15, 1.0),
        SphereCotangent(
            np.array([0.0, 1.0, 0.0]),
            np.array([0.0, 0.0, 1.0 / (2.0 * math.pi)]),
        ),
    )
    rec = recurrence_stat(periodic, eps_values=(0.2,), dt=1e-3, t_max=5.0)
    out["recurrence_periodic"] = [
        [row["forward_time"], row["backward_time"]] for row in rec["table"]
    ]

    lya = lyapunov_max(state, t_max=50.0, n_checkpoints=4)
    out["lyapunov"] = lya["lambda_max"]

    print(json.dumps(out))


if __name__ == "__main__":
    main()
