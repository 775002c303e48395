"""Seeded, cross-platform random state generators.

All draws use the PCG64 generator with an explicit integer seed and a fixed
draw order, so a (seed, count) pair names the same states on every platform.
The regular product sampler produces horizontal unit-energy states whose
invariant-level margins are guaranteed by construction, not by rejection:

* |c| is drawn in [0.5, 0.62], so the vertical momentum margin holds;
* e1 = a^2 + b^2 is drawn in [0.15, 0.4];
* the polar radius lies in [0.35, pi - 0.35] and the resulting sphere
  transverse energy e2 = 2*H2 - psi2^2 always exceeds 1.1.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .heisenberg import NilCotangent
from .reduction import ProductState, ReducedState
from .sphere import SphereCotangent, SpherePolar, embedded_from_polar

TWO_PI = 2.0 * math.pi

C_RANGE = (0.5, 0.62)
E1_RANGE = (0.15, 0.4)
R_MARGIN = 0.35
TOTAL_ENERGY = 1.0


def seeded_rng(seed: int) -> np.random.Generator:
    if seed is None:
        raise ConfigError("a seed is mandatory for random sampling")
    if not isinstance(seed, (int, np.integer)):
        raise ConfigError("seed must be an integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _one_regular_product(rng: np.random.Generator, k: int) -> ProductState:
    c = rng.uniform(*C_RANGE) * (1.0 if rng.uniform() < 0.5 else -1.0)
    e1 = rng.uniform(*E1_RANGE)
    ab_angle = rng.uniform(0.0, TWO_PI)
    a = math.sqrt(e1) * math.cos(ab_angle)
    b = math.sqrt(e1) * math.sin(ab_angle)
    x = rng.uniform(-0.5, 0.5)
    y = rng.uniform(-0.5, 0.5)
    z = rng.uniform(-0.5, 0.5)
    nil = NilCotangent(
        x=x,
        y=y,
        z=z,
        px=a + 0.5 * k * y * c,
        py=b - 0.5 * k * x * c,
        pz=c,
    )
    r = rng.uniform(R_MARGIN, math.pi - R_MARGIN)
    phi = rng.uniform(0.0, 1.0)
    two_h2 = 2.0 * TOTAL_ENERGY - (e1 + c * c)
    w = TWO_PI * math.sin(r)
    pr_sq = two_h2 - (c * c) / (w * w)
    if pr_sq <= 0.0:
        # unreachable for the stated ranges; guard against future edits
        raise ConfigError("sampler ranges no longer guarantee pr^2 > 0")
    pr = math.sqrt(pr_sq) * (1.0 if rng.uniform() < 0.5 else -1.0)
    sphere = embedded_from_polar(SpherePolar(r=r, phi=phi, pr=pr, pphi=c))
    return ProductState(nil=nil, sphere=sphere)


def random_regular_product_states(
    n: int, seed: int, k: int = 1
) -> list[ProductState]:
    """Horizontal unit-energy states away from every singular stratum."""
    rng = seeded_rng(seed)
    return [_one_regular_product(rng, k) for _ in range(n)]


def singular_stratum_state(stratum: str, seed: int, k: int = 1) -> ProductState:
    """A horizontal state on (or flat-regime-near) one singular stratum.

    ``"e1"``: zero nil transverse momentum (a = b = 0).
    ``"e2"``: equatorial sphere state with zero polar momentum.
    ``"c"``: vertical momentum deep in the flat regime (c = 0.01), where the
    flat integrals vanish identically along with their derivatives.
    """
    rng = seeded_rng(seed)
    base = _one_regular_product(rng, k)
    nil = base.nil
    if stratum == "e1":
        a = b = 0.0
        c = nil.pz
        new_nil = NilCotangent(
            x=nil.x,
            y=nil.y,
            z=nil.z,
            px=a + 0.5 * k * nil.y * c,
            py=b - 0.5 * k * nil.x * c,
            pz=c,
        )
        return ProductState(nil=new_nil, sphere=base.sphere)
    if stratum == "e2":
        c = nil.pz
        sphere = embedded_from_polar(
            SpherePolar(r=0.5 * math.pi, phi=0.25, pr=0.0, pphi=c)
        )
        return ProductState(nil=nil, sphere=sphere)
    if stratum == "c":
        c = 0.01
        a = 0.4
        b = 0.3
        new_nil = NilCotangent(
            x=nil.x,
            y=nil.y,
            z=nil.z,
            px=a + 0.5 * k * nil.y * c,
            py=b - 0.5 * k * nil.x * c,
            pz=c,
        )
        r = 1.2
        w = TWO_PI * math.sin(r)
        pr = math.sqrt(1.0 - (c * c) / (w * w))
        sphere = embedded_from_polar(SpherePolar(r=r, phi=0.6, pr=pr, pphi=c))
        return ProductState(nil=new_nil, sphere=sphere)
    raise ConfigError(f"unknown singular stratum {stratum!r}")


def random_nil_states(n: int, seed: int, k: int = 1) -> list[NilCotangent]:
    rng = seeded_rng(seed)
    out = []
    for _ in range(n):
        c = rng.uniform(*C_RANGE) * (1.0 if rng.uniform() < 0.5 else -1.0)
        e1 = rng.uniform(*E1_RANGE)
        ab_angle = rng.uniform(0.0, TWO_PI)
        a = math.sqrt(e1) * math.cos(ab_angle)
        b = math.sqrt(e1) * math.sin(ab_angle)
        x = rng.uniform(-0.5, 0.5)
        y = rng.uniform(-0.5, 0.5)
        z = rng.uniform(-0.5, 0.5)
        out.append(
            NilCotangent(
                x=x,
                y=y,
                z=z,
                px=a + 0.5 * k * y * c,
                py=b - 0.5 * k * x * c,
                pz=c,
            )
        )
    return out


def random_sphere_states(n: int, seed: int) -> list[SphereCotangent]:
    rng = seeded_rng(seed)
    out = []
    for _ in range(n):
        r = rng.uniform(R_MARGIN, math.pi - R_MARGIN)
        phi = rng.uniform(0.0, 1.0)
        pr = rng.uniform(-1.0, 1.0)
        pphi = rng.uniform(0.3, 1.0) * (1.0 if rng.uniform() < 0.5 else -1.0)
        out.append(embedded_from_polar(SpherePolar(r=r, phi=phi, pr=pr, pphi=pphi)))
    return out


def random_reduced_states(n: int, seed: int) -> list[ReducedState]:
    rng = seeded_rng(seed)
    out = []
    for _ in range(n):
        out.append(
            ReducedState(
                x=rng.uniform(-0.5, 0.5),
                y=rng.uniform(-0.5, 0.5),
                r=rng.uniform(1.0, math.pi - 1.0),
                s=rng.uniform(0.0, 1.0),
                px=rng.uniform(-0.7, 0.7),
                py=rng.uniform(-0.7, 0.7),
                pr=rng.uniform(-0.7, 0.7),
                ps=rng.uniform(0.5, 0.62) * (1.0 if rng.uniform() < 0.5 else -1.0),
            )
        )
    return out
