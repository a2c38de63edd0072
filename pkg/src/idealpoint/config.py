"""Scenario config files: flat TOML mirroring the Scenario fields.

Example::

    mode = "depth"
    d = 10
    noise_var = 1.0
    values = [0, 1, 2, 4, 8, 16, 32]
    trials = 50000
    master_seed = 12345
    assortment_method = "product-quantizer"

    [prior]
    kind = "gaussian"
    scale = 1.0     # per-axis standard deviation of the isotropic prior

Unknown keys are rejected.
"""

from __future__ import annotations

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ValidationError
from .generalprior import PriorSpec
from .harness import Scenario

_TOP_KEYS = {
    "mode",
    "d",
    "noise_var",
    "values",
    "trials",
    "master_seed",
    "assortment_method",
    "prior",
}
_PRIOR_KEYS = {"kind", "scale"}
_REQUIRED = ("mode", "d", "values")

_DEFAULTS = {
    "noise_var": 1.0,
    "trials": 50_000,
    "master_seed": 0,
    "assortment_method": "product-quantizer",
}


def scenario_from_mapping(data: dict) -> Scenario:
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise ValidationError(f"missing required config keys: {', '.join(missing)}")

    prior_tbl = data.get("prior", {})
    if not isinstance(prior_tbl, dict):
        raise ValidationError("prior must be a [prior] table")
    unknown_prior = set(prior_tbl) - _PRIOR_KEYS
    if unknown_prior:
        raise ValidationError(f"unknown [prior] keys: {', '.join(sorted(unknown_prior))}")
    kind = prior_tbl.get("kind", "gaussian")
    if kind != "gaussian":
        raise ValidationError("the harness supports only kind = 'gaussian' priors")
    scale = float(prior_tbl.get("scale", 1.0))
    if not (scale > 0):
        raise ValidationError("[prior] scale must be positive")

    d = int(data["d"])
    if d < 1:
        raise ValidationError("d must be >= 1")
    prior = PriorSpec.gaussian(np.zeros(d), scale * scale * np.eye(d))

    merged = dict(_DEFAULTS)
    merged.update({k: v for k, v in data.items() if k not in ("prior", "d")})
    values = merged["values"]
    if not isinstance(values, (list, tuple)):
        raise ValidationError("values must be a list of integers")
    try:
        return Scenario(
            mode=str(merged["mode"]),
            d=d,
            prior=prior,
            noise_var=float(merged["noise_var"]),
            values=tuple(int(v) for v in values),
            trials=int(merged["trials"]),
            master_seed=int(merged["master_seed"]),
            assortment_method=str(merged["assortment_method"]),
        )
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad config value: {exc}") from exc


def load_scenario(path) -> Scenario:
    """Parse a TOML scenario file into a validated Scenario."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"invalid config file: {exc}") from exc
    return scenario_from_mapping(data)
