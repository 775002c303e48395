"""Experiment configuration: JSON file + dot-path overrides, strict schema.

The schema is validated by hand (no third-party dependency) because its
contract is small and exact: unknown keys are rejected everywhere, every
value is type- and range-checked, and the fully resolved config embeds
verbatim into every report.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError

SYSTEMS = ("H1", "H2", "H_product", "H_reduced", "H1_variant")
PROFILES = ("submersion", "u-sin", "u-sin-cubed")

_STATE_DIMS = {"H1": 6, "H2": 6, "H_product": 12, "H_reduced": 8, "H1_variant": 6}

_DEFAULT_SCHEMES = {
    "H1": "euler-arnold-nil",
    "H2": "exact-sphere",
    "H_product": "split-product",
    "H_reduced": "implicit-midpoint-chart",
    "H1_variant": "implicit-midpoint-chart",
}


def default_config() -> dict:
    return {
        "system": "H_product",
        "k": 1,
        "profile": "submersion",
        "seed": None,  # mandatory whenever random sampling is requested
        "out": "out",
        "quiet": False,
        "initial": {
            "mode": "random",
            "count": 1,
            "state": None,
        },
        "integrator": {
            "dt": 1e-3,
            "t_max": 10.0,
            "scheme": None,  # resolved from the system when left null
            "sample_stride": 1,
            "newton_tol": 1e-12,
            "newton_max_iter": 25,
            "delta_pole": 1e-3,
        },
        "analysis": {
            "integrals": None,  # resolved per command
            "h": 1e-5,
            "samples": 100,
            "eps_values": [0.5, 0.2, 0.1],
            "angles": None,
            "t_max": None,  # analysis horizon (recurrence/lyapunov)
            "delta0": 1e-8,
            "renorm_time": 1.0,
            "n_checkpoints": 16,
            "minimality_tol": 1e-9,
        },
    }


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate_config(cfg: dict) -> None:
    """Raise ConfigError on any unknown key or ill-typed/ranged value."""
    defaults = default_config()
    unknown = set(cfg) - set(defaults)
    _check(not unknown, f"unknown config keys: {sorted(unknown)}")
    _check(cfg["system"] in SYSTEMS, f"system must be one of {SYSTEMS}")
    _check(
        isinstance(cfg["k"], int) and not isinstance(cfg["k"], bool) and cfg["k"] != 0,
        "k must be a nonzero integer",
    )
    _check(cfg["profile"] in PROFILES, f"profile must be one of {PROFILES}")
    _check(
        cfg["seed"] is None
        or (
            isinstance(cfg["seed"], int)
            and not isinstance(cfg["seed"], bool)
            and cfg["seed"] >= 0
        ),
        "seed must be a nonnegative integer",
    )
    _check(isinstance(cfg["out"], str) and cfg["out"], "out must be a directory path")
    _check(isinstance(cfg["quiet"], bool), "quiet must be a boolean")

    init = cfg["initial"]
    _check(isinstance(init, dict), "initial must be an object")
    unknown = set(init) - set(defaults["initial"])
    _check(not unknown, f"unknown initial keys: {sorted(unknown)}")
    mode = init.get("mode")
    _check(mode in ("random", "explicit"), "initial.mode must be random|explicit")
    count = init.get("count", 1)
    _check(
        isinstance(count, int) and not isinstance(count, bool) and count >= 1,
        "initial.count must be a positive integer",
    )
    if mode == "explicit":
        state = init.get("state")
        dim = _STATE_DIMS[cfg["system"]]
        _check(
            isinstance(state, list)
            and len(state) == dim
            and all(_is_number(v) for v in state),
            f"initial.state must be a list of {dim} numbers for {cfg['system']}",
        )

    integ = cfg["integrator"]
    _check(isinstance(integ, dict), "integrator must be an object")
    unknown = set(integ) - set(defaults["integrator"])
    _check(not unknown, f"unknown integrator keys: {sorted(unknown)}")
    _check(_is_number(integ["dt"]) and integ["dt"] > 0, "integrator.dt must be > 0")
    _check(
        _is_number(integ["t_max"]) and integ["t_max"] > 0,
        "integrator.t_max must be > 0",
    )
    scheme = integ.get("scheme")
    from .integrators import SCHEMES

    _check(
        scheme is None or scheme in SCHEMES,
        f"integrator.scheme must be null or one of {SCHEMES}",
    )
    _check(
        _is_number(integ["newton_tol"]) and integ["newton_tol"] > 0,
        "integrator.newton_tol must be > 0",
    )
    _check(
        isinstance(integ["newton_max_iter"], int)
        and not isinstance(integ["newton_max_iter"], bool)
        and integ["newton_max_iter"] >= 1,
        "integrator.newton_max_iter must be a positive integer",
    )
    _check(
        isinstance(integ["sample_stride"], int)
        and not isinstance(integ["sample_stride"], bool)
        and integ["sample_stride"] >= 1,
        "integrator.sample_stride must be a positive integer",
    )
    _check(
        _is_number(integ["delta_pole"]) and 0 < integ["delta_pole"] < 1,
        "integrator.delta_pole must be in (0, 1)",
    )

    ana = cfg["analysis"]
    _check(isinstance(ana, dict), "analysis must be an object")
    unknown = set(ana) - set(defaults["analysis"])
    _check(not unknown, f"unknown analysis keys: {sorted(unknown)}")
    from .invariants import TAGS

    integrals = ana.get("integrals")
    _check(
        integrals is None
        or (
            isinstance(integrals, list)
            and all(tag in TAGS for tag in integrals)
        ),
        f"analysis.integrals must be null or a list drawn from {TAGS}",
    )
    _check(
        _is_number(ana["h"]) and 1e-6 <= ana["h"] <= 1e-4,
        "analysis.h must lie in [1e-6, 1e-4]",
    )
    _check(
        isinstance(ana["samples"], int)
        and not isinstance(ana["samples"], bool)
        and ana["samples"] >= 1,
        "analysis.samples must be a positive integer",
    )
    eps = ana["eps_values"]
    _check(
        isinstance(eps, list) and eps and all(_is_number(v) and v > 0 for v in eps),
        "analysis.eps_values must be a nonempty list of positive numbers",
    )
    angles = ana.get("angles")
    _check(
        angles is None
        or (isinstance(angles, list) and all(isinstance(a, str) for a in angles)),
        "analysis.angles must be null or a list of angle names",
    )
    _check(
        ana["t_max"] is None or (_is_number(ana["t_max"]) and ana["t_max"] > 0),
        "analysis.t_max must be null or > 0",
    )
    _check(
        _is_number(ana["delta0"]) and ana["delta0"] > 0,
        "analysis.delta0 must be > 0",
    )
    _check(
        _is_number(ana["renorm_time"]) and ana["renorm_time"] > 0,
        "analysis.renorm_time must be > 0",
    )
    _check(
        isinstance(ana["n_checkpoints"], int)
        and not isinstance(ana["n_checkpoints"], bool)
        and ana["n_checkpoints"] >= 2,
        "analysis.n_checkpoints must be an integer >= 2",
    )
    _check(
        _is_number(ana["minimality_tol"]) and ana["minimality_tol"] > 0,
        "analysis.minimality_tol must be > 0",
    )


def _merge(base: dict, update: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in update.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _parse_override_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_override(cfg: dict, assignment: str) -> dict:
    """Apply one ``dot.path=value`` override; value parses as JSON or string."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form KEY=VALUE")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"override key {key!r} is malformed")
    value = _parse_override_value(raw)
    node = cfg
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config section {part!r} in {key!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {key!r}")
    node[parts[-1]] = value
    return cfg


def load_config(
    path: str | None = None,
    overrides: list[str] | None = None,
    seed: int | None = None,
    out: str | None = None,
    quiet: bool | None = None,
) -> dict:
    """Resolve defaults <- file <- --set overrides <- dedicated flags."""
    cfg = default_config()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must contain a JSON object")
        cfg = _merge(cfg, loaded)
    for assignment in overrides or []:
        cfg = apply_override(cfg, assignment)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = out
    if quiet is not None:
        cfg["quiet"] = quiet
    validate_config(cfg)
    return cfg
